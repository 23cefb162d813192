import numpy as np
import pytest

from s3fse.data import LabelVector, MultiViewDataset, ViewMatrix, normalize_views
from s3fse.synthetic import SyntheticSpec, synth_generate


def make_views(rng, n, dims, labels=None):
    views = tuple(ViewMatrix(f"v{i}", rng.standard_normal((n, d))) for i, d in enumerate(dims))
    return MultiViewDataset(views, labels)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def toy3(rng):
    """Normalized 3-view toy set, n=18, three classes of six."""
    labels = LabelVector(np.repeat([1, 2, 3], 6), 3)
    return normalize_views(make_views(rng, 18, (4, 3, 5), labels))


@pytest.fixture(scope="session")
def standard_synthetic():
    return synth_generate(SyntheticSpec(n_per_class=40, n_classes=4, view_dims=(30, 20, 25),
                                        redundant_frac=0.4, seed=0))


_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion, then assert it."""

    def record(number, title, ok, detail):
        line = f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[number])
