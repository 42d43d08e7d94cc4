import math

import pytest

from dprcrypt.aes_core import AES128, AES192, AES256
from dprcrypt.perf_model import (
    DeviceProfile,
    SimRun,
    build_report,
    cycles_per_block,
    published_profiles,
    throughput_mbps,
    tps_kbps_per_slice,
)
from dprcrypt.reference_data import default_constants


@pytest.mark.parametrize("v, cycles", [(AES128, 250), (AES192, 300), (AES256, 350)])
def test_cycles_per_block(v, cycles):
    assert cycles_per_block(v) == cycles


def test_throughput_examples():
    dev = published_profiles()["XC2V500"]
    # 128 bits * 78.59 MHz / 250 cycles
    assert throughput_mbps(AES128, dev) == pytest.approx(40.23808)
    assert abs(throughput_mbps(AES128, dev) - 40.57) / 40.57 < 0.05
    assert throughput_mbps(AES256, dev) == pytest.approx(25.9566, abs=1e-4)


def test_zero_frequency_is_rejected():
    with pytest.raises(ValueError):
        DeviceProfile("bad", {128: 10.0}, {128: 0.0})


def test_unknown_variant_lookup_error():
    dev = DeviceProfile("partial", {128: 10.0}, {128: 100.0})
    with pytest.raises(LookupError):
        throughput_mbps(AES192, dev)
    with pytest.raises(LookupError):
        tps_kbps_per_slice(AES128, dev)


def test_tps_examples():
    dev = published_profiles()["XC2V500"]
    assert tps_kbps_per_slice(AES128, dev) == pytest.approx(40238.08 / 192)
    assert tps_kbps_per_slice(AES128, dev, throughput=0.0) == 0.0
    small = DeviceProfile("s", {128: 1.0}, {128: 100.0}, {128: 100})
    large = DeviceProfile("l", {128: 1.0}, {128: 100.0}, {128: 200})
    assert tps_kbps_per_slice(AES128, small) == pytest.approx(2 * tps_kbps_per_slice(AES128, large))


def test_throughput_monotone_in_cycles_and_linear_in_frequency():
    d1 = DeviceProfile("d", {}, {128: 50.0, 192: 50.0, 256: 50.0})
    d2 = DeviceProfile("d2", {}, {128: 100.0, 192: 100.0, 256: 100.0})
    values = [throughput_mbps(v, d1) for v in (AES128, AES192, AES256)]
    assert values == sorted(values, reverse=True)
    for v in (AES128, AES192, AES256):
        assert throughput_mbps(v, d2) == pytest.approx(2 * throughput_mbps(v, d1))


def test_report_shape_and_deviations():
    report = build_report()
    assert len(report.records) == 6
    for r in report.records:
        assert math.isfinite(r.deviation_fraction) and r.deviation_fraction >= 0
        assert r.deviation_fraction == pytest.approx(
            abs(r.computed_throughput_mbps - r.published_throughput_mbps) / r.published_throughput_mbps)
        assert r.simulated_throughput_mbps is None


def test_report_with_sim_results():
    runs = {128: SimRun(100, 25000)}
    report = build_report(runs)
    rec = next(r for r in report.records if r.variant == "AES-128" and r.device == "XC2V500")
    assert rec.simulated_throughput_mbps == pytest.approx(rec.computed_throughput_mbps)


def test_text_and_json_agree():
    report = build_report({256: SimRun(10, 3500)})
    rows = report.render_text().splitlines()[1:]
    records = report.to_dict()["records"]
    assert len(rows) == len(records)
    for line, rec in zip(rows, records):
        cells = line.split()
        assert cells[0] == rec["variant"] and cells[1] == rec["device"]
        numeric = ["computed_throughput_mbps", "published_throughput_mbps", "deviation_fraction",
                   "computed_tps", "published_tps", "simulated_throughput_mbps"]
        for cell, key in zip(cells[4:], numeric):
            if rec[key] is None:
                assert cell == "-"
            else:
                assert float(cell) == rec[key]


def test_custom_profiles():
    profiles = {"fast": DeviceProfile("fast", {}, {128: 100.0})}
    report = build_report(profiles=profiles, constants=default_constants())
    assert [(r.variant, r.device) for r in report.records] == [("AES-128", "fast")]
    assert report.records[0].deviation_fraction is None
