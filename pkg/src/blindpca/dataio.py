"""CSV ingestion and the vertebral-column dataset loader."""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InvalidDataError

VERTEBRAL_COLUMNS = [
    "pelvic_incidence",
    "pelvic_tilt",
    "lumbar_lordosis_angle",
    "sacral_slope",
    "pelvic_radius",
    "degree_spondylolisthesis",
]
VERTEBRAL_CLASSES = {"DH": "Hernia", "SL": "Spondylolisthesis", "NO": "Normal"}


@dataclass
class Table:
    """Numeric columns of a CSV file plus any excluded (label) columns."""

    values: np.ndarray
    names: list[str]
    labels: dict[str, list[str]]
    source: str = ""
    sha256: str = ""

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def parse_filter(spec: str | None) -> tuple[str, set[str]] | None:
    """Parse ``COLUMN=v1,v2`` into (column, {v1, v2})."""
    if not spec:
        return None
    if "=" not in spec:
        raise InvalidDataError(f"row filter must look like COLUMN=value[,value...], got {spec!r}")
    col, vals = spec.split("=", 1)
    return col.strip(), {v.strip() for v in vals.split(",") if v.strip()}


def read_csv(path: str | Path, exclude: Sequence[str] = (), row_filter: str | None = None) -> Table:
    """Read a headed, comma-delimited numeric CSV.

    Every column not listed in ``exclude`` must be numeric in every row.
    ``row_filter`` (``COLUMN=v1,v2``) keeps only rows whose COLUMN value is
    listed; COLUMN must be one of the excluded columns.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InvalidDataError(f"cannot read {path}: {exc}") from exc
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise InvalidDataError(f"{path} is empty") from None
    unknown = [c for c in exclude if c not in header]
    if unknown:
        raise InvalidDataError(f"excluded columns not in header: {unknown}")
    flt = parse_filter(row_filter)
    if flt and flt[0] not in exclude:
        raise InvalidDataError(f"filter column {flt[0]!r} must also be excluded")
    keep = [k for k, h in enumerate(header) if h not in exclude]
    lab = [k for k, h in enumerate(header) if h in exclude]
    rows, labels = [], {header[k]: [] for k in lab}
    for lineno, rec in enumerate(reader, start=2):
        if not rec or all(not c.strip() for c in rec):
            continue
        if len(rec) != len(header):
            raise InvalidDataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(rec)}")
        if flt and rec[header.index(flt[0])].strip() not in flt[1]:
            continue
        try:
            rows.append([float(rec[k]) for k in keep])
        except ValueError:
            bad = next(header[k] for k in keep if not _is_float(rec[k]))
            raise InvalidDataError(
                f"{path}:{lineno}: non-numeric value in column {bad!r}; exclude it with --exclude-cols"
            ) from None
        for k in lab:
            labels[header[k]].append(rec[k].strip())
    values = np.array(rows, dtype=np.float64).reshape(len(rows), len(keep))
    if values.shape[0] < 2:
        raise InvalidDataError(f"{path}: need at least 2 data rows, got {values.shape[0]}")
    if not np.all(np.isfinite(values)):
        raise InvalidDataError(f"{path}: non-finite values present")
    return Table(values, [header[k] for k in keep], labels, str(path), file_sha256(path))


def _is_float(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def write_csv(path: str | Path, header: Sequence[str], rows) -> None:
    """Write rows with floats in shortest round-trip form."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def load_vertebral(path: str | Path) -> Table:
    """Load the UCI vertebral-column data.

    Accepts the distribution's whitespace-separated ``column_3C.dat`` (six
    attributes and a DH/SL/NO class code), the ``.arff`` variants, or a CSV
    already holding the six named columns and a ``class`` column.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".csv":
        return read_csv(path, exclude=["class"])
    rows, classes = [], []
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith(("%", "@")):
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 7:
            raise InvalidDataError(f"{path}: unexpected record {line!r}")
        rows.append([float(v) for v in parts[:6]])
        code = parts[6].strip("'\"")
        classes.append(VERTEBRAL_CLASSES.get(code, code))
    return Table(np.array(rows), list(VERTEBRAL_COLUMNS), {"class": classes}, str(path), file_sha256(path))


def vertebral_to_csv(table: Table, path: str | Path) -> None:
    cls = table.labels["class"]
    write_csv(path, [*table.names, "class"], ([*row, c] for row, c in zip(table.values.tolist(), cls)))
