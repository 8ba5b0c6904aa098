import sys

import numpy as np
import pytest

from hermite_witness.witness import LabeledDataset, QuerySet


def blobs(centers, per_class, spread, seed):
    rng = np.random.default_rng(seed)
    pts = np.vstack([rng.normal(c, spread, size=(per_class, len(c))) for c in centers])
    labels = np.repeat(np.arange(len(centers)), per_class)
    return LabeledDataset(pts, labels, len(centers))


@pytest.fixture
def two_blobs():
    return blobs([(-1.0, 0.0), (1.0, 0.0)], 150, 0.4, 11)


@pytest.fixture
def three_blobs():
    return blobs([(-1.5, 0.0), (1.5, 0.0), (0.0, 1.8)], 120, 0.35, 12)


@pytest.fixture
def line_queries():
    x = np.linspace(-2.5, 2.5, 41)
    return QuerySet.from_points(np.column_stack([x, np.zeros_like(x)]))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
