import pytest

from dprcrypt.errors import ConstantsFileError
from dprcrypt.reference_data import COLUMNS, FORMAT_VERSION, default_constants, load_constants, parse_constants

# Transcribed independently from the published tables; the bundled file must agree.
TABLE2 = {
    ("AES-128", "XC2S200E"): (196, 92, 352, 6), ("AES-128", "XC2V500"): (192, 78, 342, 6),
    ("AES-192", "XC2S200E"): (265, 102, 467, 6), ("AES-192", "XC2V500"): (241, 76, 341, 6),
    ("AES-256", "XC2S200E"): (252, 99, 469, 6), ("AES-256", "XC2V500"): (207, 81, 381, 6),
}
TABLE3 = {
    ("AES-128", "XC2S200E"): (35.520, 28.742, 250, 16.362, 83),
    ("AES-128", "XC2V500"): (13.674, 78.59, 250, 40.57, 232),
    ("AES-192", "XC2S200E"): (41.387, 25.825, 300, 11.361, 41),
    ("AES-192", "XC2V500"): (13.863, 71.78, 300, 31.72, 135),
    ("AES-256", "XC2S200E"): (37.648, 27.067, 350, 9.739, None),
    ("AES-256", "XC2V500"): (15.043, 70.975, 350, 26.734, None),
}
TABLE4 = {
    "MicroBlaze": (4083, 3383, 3228, 25),
    "AES-128": (3565, 3086, 3042, 4),
    "AES-192": (3764, 3259, 3149, 4),
    "AES-256": (3632, 3127, 3205, 4),
}


def test_golden_values():
    data = default_constants()
    assert data.version == FORMAT_VERSION == 1
    for (v, dev), values in TABLE2.items():
        got = tuple(data.get(2, v, dev, m) for m in ("slices", "slice_ff", "lut4", "bram"))
        assert got == values
    for (v, dev), values in TABLE3.items():
        got = tuple(data.get(3, v, dev, m) for m in
                    ("period_ns", "max_freq_mhz", "cycles", "throughput_mbps", "tps_kbps_per_slice"))
        assert got == values
    for v, values in TABLE4.items():
        got = tuple(data.get(4, v, "XC2VP", m) for m in ("slices", "luts", "ff_latches", "bram"))
        assert got == values
    for v, nk, nr in (("AES-128", 4, 10), ("AES-192", 6, 12), ("AES-256", 8, 14)):
        assert (data.get(1, v, "-", "nk"), data.get(1, v, "-", "nr")) == (nk, nr)
    assert len(data.entries) == 6 + 24 + 28 + 16


def test_low_confidence_row_is_marked():
    data = default_constants()
    low = {(e.variant, e.device) for e in data.entries if e.confidence == "low"}
    assert low == {("AES-256", "XC2S200E")}


def test_every_entry_has_an_anchor():
    assert all(e.anchor for e in default_constants().entries)


def test_header_is_fixed():
    text = "# format-version: 1\n" + ",".join(COLUMNS) + "\n3,AES-128,X,cycles,250,high,a\n"
    data = parse_constants(text)
    assert data.entries[0].value == 250 and isinstance(data.entries[0].value, int)


@pytest.mark.parametrize("text", [
    "table,variant,device,metric,value,confidence,anchor\n",
    "# format-version: 2\ntable,variant,device,metric,value,confidence,anchor\n",
    "# format-version: 1\ntable,variant,device,value\n",
    "# format-version: 1\ntable,variant,device,metric,value,confidence,anchor\nx,a,b,c,1,high,q\n",
])
def test_malformed_files_rejected(text):
    with pytest.raises(ConstantsFileError):
        parse_constants(text)


def test_missing_file(tmp_path):
    with pytest.raises(ConstantsFileError):
        load_constants(tmp_path / "absent.csv")
