"""Plain-text reconfiguration scenarios.

One directive per line, ``#`` starts a comment::

    set-constraints max_latency=5000 allow_static=false
    signal-key-length 128 [mode=dynamic|static]
    submit-job 128 key=<hex> (data=<hex> | blocks=<n>) [direction=encrypt|decrypt]
    advance <cycles>
    expect <subject> ... <value>

``expect`` subjects: ``state``, ``loaded``, ``clock``, ``queue``,
``completed``, ``reconfigs``, and ``job <id> <field>`` where field is one of
``started_at``, ``completed_at``, ``module``, ``output``. Job ids count up
from 1 in submission order. ``blocks=<n>`` generates block ``i`` as the
16-byte big-endian encoding of ``i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from dprcrypt.config_controller import Constraints, FsmState, LogEntry, SelfReconfiguringSystem, log_entry
from dprcrypt.reconfig_fabric import Direction, EncryptionJob, ReconfigMode, ReconfigurableFabric

KEY_SIZES = (128, 192, 256)
JOB_FIELDS = ("started_at", "completed_at", "module", "output")


class ScenarioParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Directive:
    line: int
    name: str
    args: tuple[str, ...] = ()
    options: tuple[tuple[str, str], ...] = ()

    def option(self, key: str, default: Optional[str] = None) -> Optional[str]:
        return dict(self.options).get(key, default)


def _int(line: int, text: str, what: str, minimum: int = 0) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise ScenarioParseError(line, f"{what} must be an integer, got {text!r}") from None
    if value < minimum:
        raise ScenarioParseError(line, f"{what} must be >= {minimum}, got {value}")
    return value


def _bits(line: int, text: str) -> int:
    bits = _int(line, text, "key size")
    if bits not in KEY_SIZES:
        raise ScenarioParseError(line, f"key size must be 128, 192 or 256, got {bits}")
    return bits


def _hex(line: int, text: Optional[str], what: str) -> bytes:
    if text is None:
        raise ScenarioParseError(line, f"missing {what}=<hex>")
    try:
        return bytes.fromhex(text)
    except ValueError:
        raise ScenarioParseError(line, f"{what} is not valid hex") from None


def _bool(line: int, text: str, what: str) -> bool:
    if text.lower() in ("true", "yes", "1", "on"):
        return True
    if text.lower() in ("false", "no", "0", "off"):
        return False
    raise ScenarioParseError(line, f"{what} must be true or false, got {text!r}")


def _check_options(d: Directive, allowed: tuple[str, ...]) -> None:
    for key, _ in d.options:
        if key not in allowed:
            raise ScenarioParseError(d.line, f"{d.name}: unknown option {key!r}")


def _validate(d: Directive) -> None:
    n = d.line
    if d.name == "advance":
        if len(d.args) != 1 or d.options:
            raise ScenarioParseError(n, "usage: advance <cycles>")
        _int(n, d.args[0], "cycles")
    elif d.name == "signal-key-length":
        if len(d.args) != 1:
            raise ScenarioParseError(n, "usage: signal-key-length <bits> [mode=dynamic|static]")
        _check_options(d, ("mode",))
        _bits(n, d.args[0])
        mode = d.option("mode", "dynamic")
        if mode not in ("dynamic", "static"):
            raise ScenarioParseError(n, f"mode must be dynamic or static, got {mode!r}")
    elif d.name == "set-constraints":
        if d.args:
            raise ScenarioParseError(n, "usage: set-constraints [max_latency=<n>|none] [allow_static=<bool>]")
        _check_options(d, ("max_latency", "allow_static"))
        latency = d.option("max_latency")
        if latency is not None and latency != "none":
            _int(n, latency, "max_latency")
        if d.option("allow_static") is not None:
            _bool(n, d.option("allow_static"), "allow_static")
    elif d.name == "submit-job":
        if len(d.args) != 1:
            raise ScenarioParseError(n, "usage: submit-job <bits> key=<hex> (data=<hex>|blocks=<n>)")
        _check_options(d, ("key", "data", "blocks", "direction"))
        bits = _bits(n, d.args[0])
        key = _hex(n, d.option("key"), "key")
        if len(key) * 8 != bits:
            raise ScenarioParseError(n, f"AES-{bits} needs a {bits // 8}-byte key, got {len(key)} bytes")
        if (d.option("data") is None) == (d.option("blocks") is None):
            raise ScenarioParseError(n, "submit-job needs exactly one of data= or blocks=")
        if d.option("data") is not None:
            data = _hex(n, d.option("data"), "data")
            if not data or len(data) % 16:
                raise ScenarioParseError(n, f"data must be a non-empty multiple of 16 bytes, got {len(data)}")
        else:
            _int(n, d.option("blocks"), "blocks", minimum=1)
        if d.option("direction", "encrypt") not in ("encrypt", "decrypt"):
            raise ScenarioParseError(n, "direction must be encrypt or decrypt")
    elif d.name == "expect":
        _validate_expect(d)
    else:
        raise ScenarioParseError(n, f"unknown directive {d.name!r}")


def _validate_expect(d: Directive) -> None:
    n, args = d.line, d.args
    if d.options or not args:
        raise ScenarioParseError(n, "usage: expect <subject> ... <value>")
    subject = args[0]
    if subject == "job":
        if len(args) != 4 or args[2] not in JOB_FIELDS:
            raise ScenarioParseError(n, f"usage: expect job <id> ({'|'.join(JOB_FIELDS)}) <value>")
        _int(n, args[1], "job id", minimum=1)
    elif subject in ("state", "loaded", "clock", "queue", "completed", "reconfigs"):
        if len(args) != 2:
            raise ScenarioParseError(n, f"usage: expect {subject} <value>")
        if subject == "state" and args[1] not in {s.value for s in FsmState}:
            raise ScenarioParseError(n, f"unknown controller state {args[1]!r}")
    else:
        raise ScenarioParseError(n, f"unknown expect subject {subject!r}")


def parse_scenario(text: str) -> list[Directive]:
    directives = []
    for n, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        tokens = body.split()
        args, options = [], []
        for tok in tokens[1:]:
            if "=" in tok:
                key, _, value = tok.partition("=")
                options.append((key, value))
            else:
                args.append(tok)
        d = Directive(n, tokens[0], tuple(args), tuple(options))
        _validate(d)
        directives.append(d)
    return directives


@dataclass
class ScenarioResult:
    system: SelfReconfiguringSystem
    failures: list[LogEntry] = field(default_factory=list)

    @property
    def log(self) -> list[LogEntry]:
        return self.system.log

    @property
    def ok(self) -> bool:
        return not self.failures

    def render_log(self) -> str:
        return self.system.render_log()


def generated_blocks(count: int) -> tuple[bytes, ...]:
    return tuple(i.to_bytes(16, "big") for i in range(count))


def _job_from(d: Directive) -> EncryptionJob:
    bits = int(d.args[0])
    if d.option("data") is not None:
        data = bytes.fromhex(d.option("data"))
        blocks = tuple(data[i:i + 16] for i in range(0, len(data), 16))
    else:
        blocks = generated_blocks(int(d.option("blocks"), 0))
    return EncryptionJob(bytes.fromhex(d.option("key")), bits, blocks, Direction(d.option("direction", "encrypt")))


def _actual(system: SelfReconfiguringSystem, args: tuple[str, ...]) -> str:
    fabric = system.fabric
    subject = args[0]
    if subject == "state":
        return system.state.value
    if subject == "loaded":
        return str(fabric.loaded.variant.key_bits) if fabric.loaded else "none"
    if subject == "clock":
        return str(fabric.clock)
    if subject == "queue":
        return str(len(fabric.job_queue))
    if subject == "completed":
        return str(len(fabric.completions))
    if subject == "reconfigs":
        return str(len(fabric.reconfigurations))
    job_id, what = int(args[1], 0), args[2]
    done = {c.job_id: c for c in fabric.completions}
    if job_id not in done:
        for job in (*fabric.in_flight, *fabric.job_queue):
            if job.id == job_id and what == "started_at" and job.started_at is not None:
                return str(job.started_at)
        return "pending"
    c = done[job_id]
    if what == "started_at":
        return str(c.started_at)
    if what == "completed_at":
        return str(c.completed_at)
    if what == "module":
        return str(c.executed_on)
    return b"".join(c.output).hex()


def run_scenario(directives: list[Directive], cycles_per_unit: int = 1) -> ScenarioResult:
    """Apply directives in order to a fresh, unconfigured system."""
    system = SelfReconfiguringSystem(ReconfigurableFabric(cycles_per_unit=cycles_per_unit))
    result = ScenarioResult(system)
    for d in directives:
        if d.name == "advance":
            system.advance(int(d.args[0], 0))
        elif d.name == "signal-key-length":
            system.request_key_length(int(d.args[0]), ReconfigMode(d.option("mode", "dynamic")))
        elif d.name == "set-constraints":
            latency = d.option("max_latency")
            system.set_constraints(Constraints(
                max_latency_cycles=None if latency in (None, "none") else int(latency, 0),
                allow_static_mode=_bool(d.line, d.option("allow_static", "false"), "allow_static"),
            ))
        elif d.name == "submit-job":
            system.submit(_job_from(d))
        elif d.name == "expect":
            expected = d.args[-1]
            actual = _actual(system, d.args)
            passed = expected.lower() == actual.lower()
            entry = log_entry(system.clock, "expect", line=d.line, what=" ".join(d.args[:-1]),
                           expected=expected, actual=actual, result="pass" if passed else "fail")
            system.log.append(entry)
            if not passed:
                result.failures.append(entry)
    return result


def run_scenario_text(text: str, cycles_per_unit: int = 1) -> ScenarioResult:
    return run_scenario(parse_scenario(text), cycles_per_unit)
