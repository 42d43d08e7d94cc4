"""Command-line entry point.

Exit codes:

    0  success
    2  usage error (bad flags or arguments)
    3  input error (bad hex, wrong key length, partial block, unreadable file)
    4  scenario parse error
    5  scenario expectation failed
    6  constants file missing or malformed
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from dprcrypt.aes_core import BLOCK_SIZE, SBOX, VARIANTS, CipherVariant, decrypt, encrypt, key_expansion
from dprcrypt.errors import BlockLengthError, ConstantsFileError, KeyLengthError
from dprcrypt.perf_model import SimRun, build_report, cycles_per_block, published_profiles
from dprcrypt.reconfig_fabric import ReconfigurableFabric, default_modules, make_job
from dprcrypt.reference_data import load_constants
from dprcrypt.scenario import ScenarioParseError, generated_blocks, parse_scenario, run_scenario

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_PARSE = 4
EXIT_ASSERT = 5
EXIT_CONSTANTS = 6


class InputError(Exception):
    pass


def _err(message: str) -> None:
    print(f"dprcrypt: error: {message}", file=sys.stderr)


def _parse_hex(text: str, what: str) -> bytes:
    try:
        return bytes.fromhex(text)
    except ValueError:
        raise InputError(f"{what} is not valid hex") from None


def cmd_crypt(args, decrypting: bool) -> int:
    key = _parse_hex(args.key, "key")
    variant: Optional[CipherVariant] = VARIANTS[args.key_bits] if args.key_bits else None
    ks = key_expansion(key, variant)
    if args.data is not None:
        data = _parse_hex(args.data, "data")
    else:
        try:
            data = Path(args.input).read_bytes()
        except OSError as exc:
            raise InputError(f"cannot read {args.input}: {exc.strerror}") from None
    if len(data) % BLOCK_SIZE:
        raise BlockLengthError(f"input is {len(data)} bytes, not a multiple of 16 (no padding is applied)")
    out = decrypt(data, ks) if decrypting else encrypt(data, ks)
    if args.output:
        Path(args.output).write_bytes(out)
    else:
        print(out.hex())
    return EXIT_OK


def format_sbox(table: bytes) -> str:
    return "\n".join(" ".join(f"{b:02x}" for b in table[r * 16:(r + 1) * 16]) for r in range(16))


def cmd_sbox(args) -> int:
    print(format_sbox(SBOX.inverse if args.inverse else SBOX.forward))
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        text = Path(args.scenario).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read scenario {args.scenario}: {exc.strerror}") from None
    try:
        directives = parse_scenario(text)
    except ScenarioParseError as exc:
        _err(f"{args.scenario}: {exc}")
        return EXIT_PARSE
    result = run_scenario(directives, cycles_per_unit=args.cycles_per_unit)
    for entry in result.log:
        if args.json:
            print(json.dumps({"cycle": entry.cycle, "kind": entry.kind, **dict(entry.fields)}))
        else:
            print(entry.render())
    status = result.system.fabric.query_status()
    loaded = status.loaded.variant.key_bits if status.loaded else "none"
    print(f"final: clock={status.clock} state={result.system.state.value} loaded={loaded} "
          f"queue={len(status.job_queue)} in_flight={len(status.in_flight)} "
          f"completed={len(result.system.fabric.completions)}", file=sys.stderr)
    for f in result.failures:
        _err(f"line {f.get('line')}: expected {f.get('what')} = {f.get('expected')}, got {f.get('actual')}")
    return EXIT_OK if result.ok else EXIT_ASSERT


def swap_free_runs(blocks: int, constants=None, cycles_per_unit: int = 1) -> dict[int, SimRun]:
    """Run one job of ``blocks`` blocks per variant on a preloaded fabric."""
    runs = {}
    for bits, v in VARIANTS.items():
        fabric = ReconfigurableFabric(default_modules(constants), cycles_per_unit=cycles_per_unit)
        fabric.load_full_configuration(v)
        fabric.submit_job(make_job(bytes(v.key_bytes), generated_blocks(blocks)))
        fabric.run_until_idle()
        done = fabric.completions[0]
        runs[bits] = SimRun(done.blocks, done.completed_at - done.started_at)
    return runs


def cmd_bench(args) -> int:
    try:
        constants = load_constants(args.constants)
        for v in VARIANTS.values():
            cycles_per_block(v, constants)
        profiles = published_profiles(constants)
        runs = swap_free_runs(args.blocks, constants, args.cycles_per_unit)
        report = build_report(runs, profiles, constants)
    except (ConstantsFileError, LookupError, ValueError) as exc:
        _err(f"constants: {exc}")
        return EXIT_CONSTANTS
    print(report.to_json() if args.json else report.render_text())
    return EXIT_OK


def _nonneg_int(text: str) -> int:
    value = int(text, 0)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _positive_int(text: str) -> int:
    value = int(text, 0)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dprcrypt", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("encrypt", "decrypt"):
        p = sub.add_parser(name, help=f"{name} whole 16-byte blocks (ECB, no padding)")
        p.add_argument("--key", required=True, help="key as hex (16, 24 or 32 bytes)")
        p.add_argument("--key-bits", type=int, choices=sorted(VARIANTS),
                       help="key size; inferred from the key when omitted")
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--data", help="input as hex")
        src.add_argument("--input", help="input file")
        p.add_argument("--output", help="write raw bytes here instead of hex on stdout")

    p = sub.add_parser("sbox", help="print the derived S-box as a 16x16 hex table")
    p.add_argument("--inverse", action="store_true", help="print the inverse table")

    p = sub.add_parser("simulate", help="run a reconfiguration scenario file")
    p.add_argument("scenario")
    p.add_argument("--cycles-per-unit", type=_nonneg_int, default=1,
                   help="reconfiguration cycles per bitstream size unit (default 1)")
    p.add_argument("--json", action="store_true", help="emit the event log as JSON lines")

    p = sub.add_parser("bench", help="compare modelled throughput with the published figures")
    p.add_argument("--constants", help="constants file (default: the bundled one)")
    p.add_argument("--blocks", type=_positive_int, default=100, help="blocks per simulated run")
    p.add_argument("--cycles-per-unit", type=_nonneg_int, default=1)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        if args.command in ("encrypt", "decrypt"):
            return cmd_crypt(args, decrypting=args.command == "decrypt")
        if args.command == "sbox":
            return cmd_sbox(args)
        if args.command == "simulate":
            return cmd_simulate(args)
        return cmd_bench(args)
    except KeyLengthError as exc:
        _err(f"key length: {exc}")
    except BlockLengthError as exc:
        _err(f"block length: {exc}")
    except InputError as exc:
        _err(str(exc))
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
