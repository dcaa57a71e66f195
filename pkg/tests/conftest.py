import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hullvol.hull import HullSummary  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]


def make_summary(volume, n_total, n_boundary, dim=2):
    """Synthetic summary with given counts (vertex coordinates are placeholders)."""
    return HullSummary(
        dim=dim,
        vertex_indices=np.arange(n_boundary, dtype=np.int64),
        vertices=np.zeros((n_boundary, dim)),
        facet_indices=np.zeros((0, dim), dtype=np.int64),
        normals=np.zeros((0, dim)),
        offsets=np.zeros(0),
        hull_volume=float(volume),
        n_total=n_total,
    )


@pytest.fixture
def square_cloud():
    return [(0, 0), (1, 0), (0, 1), (1, 1), (0.5, 0.5)]


@pytest.fixture
def rng():
    return np.random.default_rng(20190101)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.REPORT:
        terminalreporter.section("acceptance criteria")
        for line in mod.REPORT:
            terminalreporter.write_line(line)
