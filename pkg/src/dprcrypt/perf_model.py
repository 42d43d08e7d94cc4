"""Analytic cycle and throughput model for the AES coprocessor.

Throughput is ``128 * f / cycles_per_block`` (one 128-bit block per
``cycles_per_block`` clock cycles at ``f`` MHz, in Mbit/s). The published
Mbit/s figures are kept alongside as reference points and each computed value
is reported together with its relative deviation from them.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Mapping, Optional

from dprcrypt.aes_core import VARIANTS, CipherVariant
from dprcrypt.reference_data import ReferenceData, default_constants

BLOCK_BITS = 128
PUBLISHED_DEVICES = ("XC2S200E", "XC2V500")


@dataclass(frozen=True)
class DeviceProfile:
    name: str
    period_ns: Mapping[int, float]
    max_freq_mhz: Mapping[int, float]
    slices_used: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        for label, table in (("period_ns", self.period_ns), ("max_freq_mhz", self.max_freq_mhz)):
            for bits, value in table.items():
                if not value > 0:
                    raise ValueError(f"{self.name}: {label} for AES-{bits} must be > 0, got {value}")


def cycles_per_block(v: CipherVariant, constants: Optional[ReferenceData] = None) -> int:
    data = constants or default_constants()
    values = {data.get(3, v.name, dev, "cycles") for dev in data.devices(3)} - {None}
    if len(values) != 1:
        raise LookupError(f"no single cycle count for {v.name} in the constants file: {values}")
    return int(values.pop())


def published_profiles(constants: Optional[ReferenceData] = None) -> dict[str, DeviceProfile]:
    data = constants or default_constants()
    profiles = {}
    for dev in data.devices(3):
        period, freq, slices = {}, {}, {}
        for bits, v in VARIANTS.items():
            p = data.get(3, v.name, dev, "period_ns")
            f = data.get(3, v.name, dev, "max_freq_mhz")
            s = data.get(2, v.name, dev, "slices")
            if p is not None:
                period[bits] = float(p)
            if f is not None:
                freq[bits] = float(f)
            if s is not None:
                slices[bits] = int(s)
        profiles[dev] = DeviceProfile(dev, period, freq, slices)
    return profiles


def _frequency(v: CipherVariant, d: DeviceProfile) -> float:
    try:
        f = d.max_freq_mhz[v.key_bits]
    except KeyError:
        raise LookupError(f"device {d.name} has no frequency for {v.name}") from None
    if not f > 0:
        raise ValueError(f"device {d.name}: frequency for {v.name} must be > 0, got {f}")
    return f


def throughput_mbps(v: CipherVariant, d: DeviceProfile, constants: Optional[ReferenceData] = None) -> float:
    return BLOCK_BITS * _frequency(v, d) / cycles_per_block(v, constants)


def tps_kbps_per_slice(v: CipherVariant, d: DeviceProfile, throughput: Optional[float] = None) -> float:
    """Throughput per occupied slice in kbit/s/slice."""
    try:
        slices = d.slices_used[v.key_bits]
    except KeyError:
        raise LookupError(f"device {d.name} has no slice count for {v.name}") from None
    if throughput is None:
        throughput = throughput_mbps(v, d)
    return throughput * 1000.0 / slices


@dataclass(frozen=True)
class SimRun:
    """A swap-free simulated run: blocks processed in elapsed region cycles."""

    blocks: int
    elapsed_cycles: int

    def throughput_mbps(self, f_mhz: float) -> float:
        return self.blocks * BLOCK_BITS * f_mhz / self.elapsed_cycles


@dataclass(frozen=True)
class PerfRecord:
    variant: str
    device: str
    cycles_per_block: int
    max_freq_mhz: float
    computed_throughput_mbps: float
    published_throughput_mbps: Optional[float]
    deviation_fraction: Optional[float]
    computed_tps: Optional[float]
    published_tps: Optional[float]
    simulated_throughput_mbps: Optional[float] = None


@dataclass(frozen=True)
class PerfReport:
    records: tuple[PerfRecord, ...]

    def to_dict(self) -> dict:
        return {"records": [{k: _round(v) for k, v in asdict(r).items()} for r in self.records]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def render_text(self) -> str:
        headers = ("variant", "device", "cycles", "f_MHz", "Mbps", "pub_Mbps",
                   "deviation", "TPS", "pub_TPS", "sim_Mbps")
        rows = [headers]
        for r in self.records:
            rows.append((
                r.variant, r.device, str(r.cycles_per_block), _fmt(r.max_freq_mhz),
                _fmt(r.computed_throughput_mbps), _fmt(r.published_throughput_mbps),
                _fmt(r.deviation_fraction), _fmt(r.computed_tps), _fmt(r.published_tps),
                _fmt(r.simulated_throughput_mbps),
            ))
        widths = [max(len(row[i]) for row in rows) for i in range(len(headers))]
        return "\n".join(
            "  ".join(cell.rjust(w) for cell, w in zip(row, widths)).rstrip() for row in rows
        )


DECIMALS = 4


def _round(value):
    return round(value, DECIMALS) if isinstance(value, float) else value


def _fmt(value) -> str:
    if value is None:
        return "-"
    return f"{value:.{DECIMALS}f}"


def build_report(
    sim_results: Optional[Mapping[int, SimRun]] = None,
    profiles: Optional[Mapping[str, DeviceProfile]] = None,
    constants: Optional[ReferenceData] = None,
) -> PerfReport:
    """One record per (variant, device), computed next to the published values."""
    data = constants or default_constants()
    profiles = profiles if profiles is not None else published_profiles(data)
    sim_results = sim_results or {}
    records = []
    for bits, v in VARIANTS.items():
        cpb = cycles_per_block(v, data)
        for name, d in profiles.items():
            if bits not in d.max_freq_mhz:
                continue
            f = d.max_freq_mhz[bits]
            computed = throughput_mbps(v, d, data)
            published = data.get(3, v.name, name, "throughput_mbps")
            deviation = None if published is None else abs(computed - published) / published
            tps = tps_kbps_per_slice(v, d, computed) if bits in d.slices_used else None
            published_tps = data.get(3, v.name, name, "tps_kbps_per_slice")
            run = sim_results.get(bits)
            sim = run.throughput_mbps(f) if run is not None else None
            records.append(PerfRecord(
                variant=v.name,
                device=name,
                cycles_per_block=cpb,
                max_freq_mhz=f,
                computed_throughput_mbps=computed,
                published_throughput_mbps=None if published is None else float(published),
                deviation_fraction=deviation,
                computed_tps=tps,
                published_tps=None if published_tps is None else float(published_tps),
                simulated_throughput_mbps=sim,
            ))
    for r in records:
        if r.deviation_fraction is not None and not math.isfinite(r.deviation_fraction):
            raise ArithmeticError(f"non-finite deviation for {r.variant}/{r.device}")
    return PerfReport(tuple(records))
