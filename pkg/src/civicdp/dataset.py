"""Time-series ingestion, clamping, and the versioned dataset store.

The CSV external format: first header column is ``timestamp``, remaining
headers are series IDs; one row per timestamp; ``.`` decimal separator; UTF-8.
Timestamps are integer epoch seconds or ISO-8601 (naive values are read as
UTC). The step between consecutive timestamps must be constant, with zero
tolerance.

Version 0 of every store is the clamped upload; noisy releases are forked
from it and carry provenance. Versions are immutable once created.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterable, Optional

import numpy as np

from .errors import (
    EmptyDataset,
    MalformedCsv,
    NonMonotonicTimestamps,
    ShapeMismatch,
    UnknownVersion,
)

SYNTHETIC_EPOCH_START = 1_000_000_000  # fixed base so generated files are reproducible
SYNTHETIC_STEP_SECONDS = 600  # 10-minute resolution
SYNTHETIC_VALUE_RANGE = (0.0, 10_000.0)  # watts

MECHANISM_LAPLACE = "laplace"
_MAX_SEED = 2 ** 64


@dataclass(frozen=True)
class ClampBounds:
    """Clamp range applied at ingestion; fixes the per-cell sensitivity."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError("clamp bounds must be finite")
        if not self.lower < self.upper:
            raise ValueError(f"clamp bounds require lower < upper, got [{self.lower}, {self.upper}]")

    @property
    def delta_f(self) -> float:
        """Per-cell sensitivity: the most one clamped reading can change."""
        return self.upper - self.lower


DEFAULT_BOUNDS = ClampBounds(*SYNTHETIC_VALUE_RANGE)


@dataclass(frozen=True, eq=False)
class TimeSeriesDataset:
    """Aligned numeric readings: one row per series, one column per timestamp."""

    series_ids: tuple[str, ...]
    timestamps: tuple[int, ...]
    values: np.ndarray
    unit_label: str = "watts"

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError("values must be a 2-D matrix")
        if values.shape != (len(self.series_ids), len(self.timestamps)):
            raise ValueError(
                f"values shape {values.shape} does not match "
                f"{len(self.series_ids)} series x {len(self.timestamps)} timestamps"
            )
        if len(self.series_ids) == 0 or len(self.timestamps) == 0:
            raise EmptyDataset("dataset needs at least one series and one timestamp")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        _check_timestamps(self.timestamps)
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def checksum(self) -> str:
        h = hashlib.sha256()
        h.update("\x1f".join(self.series_ids).encode())
        h.update(np.asarray(self.timestamps, dtype=np.int64).tobytes())
        h.update(self.values.tobytes())
        h.update(self.unit_label.encode())
        return h.hexdigest()


@dataclass(frozen=True)
class Provenance:
    """How a noisy version was produced from its parent."""

    epsilon_used: float
    delta_f: float
    seed: int
    mechanism: str = MECHANISM_LAPLACE

    def __post_init__(self) -> None:
        if not self.epsilon_used > 0:
            raise ValueError("epsilon_used must be positive")
        if not self.delta_f > 0:
            raise ValueError("delta_f must be positive")
        if not 0 <= self.seed < _MAX_SEED:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.mechanism != MECHANISM_LAPLACE:
            raise ValueError(f"unsupported mechanism {self.mechanism!r}")


@dataclass(frozen=True)
class DatasetVersion:
    """Immutable snapshot in the version store."""

    version_id: int
    parent_id: Optional[int]
    payload: TimeSeriesDataset
    provenance: Optional[Provenance] = None

    def __post_init__(self) -> None:
        if self.version_id == 0:
            if self.parent_id is not None or self.provenance is not None:
                raise ValueError("version 0 is the raw clamped upload: no parent, no provenance")
        elif self.provenance is not None and self.parent_id is None:
            raise ValueError("a version with provenance must have a parent")

    @property
    def is_root(self) -> bool:
        return self.provenance is None and self.parent_id is None


class VersionStore:
    """Holds the version forest for one session: a root upload plus forks."""

    def __init__(self) -> None:
        self._versions: dict[int, DatasetVersion] = {}
        self._bounds: Optional[ClampBounds] = None

    @property
    def bounds(self) -> Optional[ClampBounds]:
        return self._bounds

    @property
    def delta_f(self) -> float:
        if self._bounds is None:
            raise UnknownVersion("no dataset ingested yet")
        return self._bounds.delta_f

    def __len__(self) -> int:
        return len(self._versions)

    def get(self, version_id: int) -> DatasetVersion:
        try:
            return self._versions[version_id]
        except KeyError:
            raise UnknownVersion(f"no version {version_id}") from None

    def root(self) -> DatasetVersion:
        return self.get(0)

    def versions(self) -> list[DatasetVersion]:
        return [self._versions[vid] for vid in sorted(self._versions)]

    def ingest_csv(self, raw_bytes: bytes, bounds: ClampBounds, fill_missing: bool = False) -> DatasetVersion:
        """Parse, clamp, and record version 0. One root per store."""
        if 0 in self._versions:
            raise ValueError("store already has a root version")
        dataset = parse_csv(raw_bytes, fill_missing=fill_missing)
        version = DatasetVersion(version_id=0, parent_id=None, payload=clamp(dataset, bounds))
        self._versions[0] = version
        self._bounds = bounds
        return version

    def add_root(self, dataset: TimeSeriesDataset, bounds: ClampBounds) -> DatasetVersion:
        """Record an in-memory dataset as version 0 (clamped)."""
        if 0 in self._versions:
            raise ValueError("store already has a root version")
        version = DatasetVersion(version_id=0, parent_id=None, payload=clamp(dataset, bounds))
        self._versions[0] = version
        self._bounds = bounds
        return version

    def fork(self, parent: DatasetVersion, payload: TimeSeriesDataset, provenance: Provenance) -> DatasetVersion:
        """Fork a new immutable version from ``parent``; the parent is untouched."""
        if parent.version_id not in self._versions:
            raise UnknownVersion(f"parent {parent.version_id} is not in this store")
        if payload.shape != parent.payload.shape:
            raise ShapeMismatch(
                f"payload shape {payload.shape} does not match parent shape {parent.payload.shape}"
            )
        version_id = max(self._versions) + 1
        version = DatasetVersion(
            version_id=version_id,
            parent_id=parent.version_id,
            payload=payload,
            provenance=provenance,
        )
        self._versions[version_id] = version
        return version


def clamp(dataset: TimeSeriesDataset, bounds: ClampBounds) -> TimeSeriesDataset:
    """Clamp every value into [lower, upper]; shape is preserved."""
    values = np.clip(dataset.values, bounds.lower, bounds.upper)
    return TimeSeriesDataset(
        series_ids=dataset.series_ids,
        timestamps=dataset.timestamps,
        values=values,
        unit_label=dataset.unit_label,
    )


def _check_timestamps(timestamps: Iterable[int]) -> None:
    ts = list(timestamps)
    if len(ts) >= 2:
        steps = {b - a for a, b in zip(ts, ts[1:])}
        if any(step <= 0 for step in steps):
            raise NonMonotonicTimestamps("timestamps must be strictly increasing")
        if len(steps) > 1:
            raise NonMonotonicTimestamps(f"timestamp step must be constant, saw steps {sorted(steps)}")


def _parse_timestamp(cell: str, line: int) -> int:
    text = cell.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        dt = datetime.fromisoformat(text)
    except ValueError:
        raise MalformedCsv(f"line {line}: cannot parse timestamp {cell!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def parse_csv(raw_bytes: bytes, fill_missing: bool = False) -> TimeSeriesDataset:
    """Parse the CSV external format into a dataset (no clamping).

    Strict mode rejects files containing empty cells; with ``fill_missing``
    each empty cell is replaced by the mean of its series' present values.
    """
    try:
        text = raw_bytes.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedCsv(f"input is not UTF-8: {exc}") from None

    rows = list(csv.reader(io.StringIO(text)))
    rows = [row for row in rows if row and any(cell.strip() for cell in row)]
    if not rows:
        raise EmptyDataset("no rows in input")

    header = [cell.strip() for cell in rows[0]]
    if not header or header[0] != "timestamp":
        raise MalformedCsv("first header column must be 'timestamp'")
    series_ids = tuple(header[1:])
    if not series_ids:
        raise EmptyDataset("no series columns in input")
    if any(not sid for sid in series_ids):
        raise MalformedCsv("series IDs must be non-empty")
    if len(set(series_ids)) != len(series_ids):
        raise MalformedCsv("series IDs must be unique")

    data_rows = rows[1:]
    if not data_rows:
        raise EmptyDataset("no timestamp rows in input")

    timestamps: list[int] = []
    cells = np.empty((len(data_rows), len(series_ids)), dtype=float)
    missing = np.zeros_like(cells, dtype=bool)
    for i, row in enumerate(data_rows):
        line = i + 2
        if len(row) != len(header):
            raise MalformedCsv(f"line {line}: expected {len(header)} cells, got {len(row)}")
        timestamps.append(_parse_timestamp(row[0], line))
        for j, cell in enumerate(row[1:]):
            text_cell = cell.strip()
            if not text_cell:
                if not fill_missing:
                    raise MalformedCsv(f"line {line}: missing value for series {series_ids[j]!r}")
                missing[i, j] = True
                cells[i, j] = np.nan
                continue
            try:
                value = float(text_cell)
            except ValueError:
                raise MalformedCsv(f"line {line}: non-numeric cell {cell!r}") from None
            if not math.isfinite(value):
                raise MalformedCsv(f"line {line}: non-finite cell {cell!r}")
            cells[i, j] = value

    if fill_missing and missing.any():
        for j in range(len(series_ids)):
            col_missing = missing[:, j]
            if col_missing.all():
                raise MalformedCsv(f"series {series_ids[j]!r} has no values to fill from")
            if col_missing.any():
                cells[col_missing, j] = cells[~col_missing, j].mean()

    _check_timestamps(timestamps)
    return TimeSeriesDataset(
        series_ids=series_ids,
        timestamps=tuple(timestamps),
        values=cells.T,
    )


def to_csv_bytes(dataset: TimeSeriesDataset) -> bytes:
    """Serialize a dataset in the CSV external format (round-trips exactly)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["timestamp", *dataset.series_ids])
    for col, ts in enumerate(dataset.timestamps):
        writer.writerow([ts, *(repr(v) for v in dataset.values[:, col].tolist())])
    return out.getvalue().encode("utf-8")


def generate_synthetic(households: int, days: int, seed: int) -> TimeSeriesDataset:
    """Deterministic residential-load stand-in data.

    Each household gets a base load plus morning and evening peaks with
    seeded per-household variation and noise; values stay within
    [0, 10000] watts at 10-minute resolution (144 columns per day).
    """
    if households < 1:
        raise ValueError("households must be >= 1")
    if days < 1:
        raise ValueError("days must be >= 1")
    if not 0 <= seed < _MAX_SEED:
        raise ValueError("seed must fit in 64 unsigned bits")

    rng = np.random.default_rng(seed)
    columns = 144 * days
    minutes = (np.arange(columns) * 10.0) % 1440.0  # minute of day per column

    base = rng.uniform(80.0, 500.0, size=(households, 1))
    morning_amp = rng.uniform(400.0, 2200.0, size=(households, 1))
    morning_center = rng.uniform(6.2 * 60, 8.8 * 60, size=(households, 1))
    evening_amp = rng.uniform(700.0, 3400.0, size=(households, 1))
    evening_center = rng.uniform(17.5 * 60, 21.0 * 60, size=(households, 1))
    widths_m = rng.uniform(50.0, 110.0, size=(households, 1))
    widths_e = rng.uniform(80.0, 160.0, size=(households, 1))

    profile = (
        base
        + morning_amp * np.exp(-0.5 * ((minutes - morning_center) / widths_m) ** 2)
        + evening_amp * np.exp(-0.5 * ((minutes - evening_center) / widths_e) ** 2)
    )
    noise = rng.normal(0.0, 60.0, size=(households, columns))
    values = np.clip(profile + noise, *SYNTHETIC_VALUE_RANGE)

    series_ids = tuple(f"H{i:04d}" for i in range(1, households + 1))
    timestamps = tuple(
        SYNTHETIC_EPOCH_START + i * SYNTHETIC_STEP_SECONDS for i in range(columns)
    )
    return TimeSeriesDataset(series_ids=series_ids, timestamps=timestamps, values=values)
