"""Loader for the bundled table of published implementation figures."""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from dprcrypt.errors import ConstantsFileError

FORMAT_VERSION = 1
COLUMNS = ("table", "variant", "device", "metric", "value", "confidence", "anchor")

_VERSION_RE = re.compile(r"#\s*format-version:\s*(\d+)")


@dataclass(frozen=True)
class ConstantEntry:
    table: int
    variant: str
    device: str
    metric: str
    value: Union[int, float]
    confidence: str
    anchor: str


@dataclass(frozen=True)
class ReferenceData:
    version: int
    entries: tuple[ConstantEntry, ...]

    def get(self, table: int, variant: str, device: str, metric: str, default=None):
        for e in self.entries:
            if (e.table, e.variant, e.device, e.metric) == (table, variant, device, metric):
                return e.value
        return default

    def require(self, table: int, variant: str, device: str, metric: str):
        value = self.get(table, variant, device, metric)
        if value is None:
            raise LookupError(f"no table {table} value for {variant}/{device}/{metric}")
        return value

    def devices(self, table: int) -> list[str]:
        seen = []
        for e in self.entries:
            if e.table == table and e.device not in seen:
                seen.append(e.device)
        return seen


def _number(text: str) -> Union[int, float]:
    return float(text) if "." in text else int(text)


def parse_constants(text: str) -> ReferenceData:
    version = None
    body = []
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("#"):
            m = _VERSION_RE.match(stripped)
            if m:
                version = int(m.group(1))
            continue
        if stripped:
            body.append(line)
    if version is None:
        raise ConstantsFileError("constants file has no '# format-version:' line")
    if version != FORMAT_VERSION:
        raise ConstantsFileError(f"unsupported constants format-version {version}")
    if not body:
        raise ConstantsFileError("constants file has no header row")

    reader = csv.DictReader(io.StringIO("\n".join(body)))
    if tuple(reader.fieldnames or ()) != COLUMNS:
        raise ConstantsFileError(f"expected columns {','.join(COLUMNS)}, got {reader.fieldnames}")
    entries = []
    for n, row in enumerate(reader, start=2):
        try:
            entries.append(ConstantEntry(
                table=int(row["table"]),
                variant=row["variant"],
                device=row["device"],
                metric=row["metric"],
                value=_number(row["value"]),
                confidence=row["confidence"],
                anchor=row["anchor"],
            ))
        except (TypeError, ValueError) as exc:
            raise ConstantsFileError(f"bad constants row {n}: {exc}") from None
    return ReferenceData(version, tuple(entries))


def load_constants(path: Optional[Union[str, Path]] = None) -> ReferenceData:
    """Read a constants file, or the bundled one when ``path`` is None."""
    if path is None:
        return default_constants()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConstantsFileError(f"cannot read constants file {path}: {exc.strerror}") from None
    return parse_constants(text)


@lru_cache(maxsize=1)
def default_constants() -> ReferenceData:
    text = resources.files("dprcrypt").joinpath("data/published_constants.csv").read_text(encoding="utf-8")
    return parse_constants(text)
