from __future__ import annotations

import numpy as np
import pytest

from civicdp.dataset import ClampBounds, VersionStore, generate_synthetic, to_csv_bytes

SMALL_CSV = (
    b"timestamp,H1,H2,H3\n"
    b"0,100.0,200.0,300.0\n"
    b"600,110.0,210.0,310.0\n"
    b"1200,120.0,220.0,320.0\n"
    b"1800,130.0,230.0,330.0\n"
)


@pytest.fixture
def small_csv_bytes() -> bytes:
    return SMALL_CSV


@pytest.fixture
def wide_bounds() -> ClampBounds:
    return ClampBounds(0.0, 10_000.0)


@pytest.fixture(scope="session")
def synthetic_200x144():
    return generate_synthetic(200, 1, seed=42)


@pytest.fixture(scope="session")
def synthetic_csv_path(tmp_path_factory, synthetic_200x144):
    path = tmp_path_factory.mktemp("data") / "synthetic.csv"
    path.write_bytes(to_csv_bytes(synthetic_200x144))
    return path


@pytest.fixture
def small_store(small_csv_bytes, wide_bounds) -> VersionStore:
    store = VersionStore()
    store.ingest_csv(small_csv_bytes, wide_bounds)
    return store


def make_store(values: np.ndarray, lower: float, upper: float) -> VersionStore:
    """Store with a root version built from an in-memory matrix."""
    from civicdp.dataset import TimeSeriesDataset

    rows, cols = values.shape
    dataset = TimeSeriesDataset(
        series_ids=tuple(f"S{i}" for i in range(rows)),
        timestamps=tuple(range(0, cols * 600, 600)),
        values=values,
    )
    store = VersionStore()
    store.add_root(dataset, ClampBounds(lower, upper))
    return store
