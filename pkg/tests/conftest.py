from pathlib import Path

import numpy as np
import pytest

from atlasgeo import BuildConfig, build_graph, make_atlas, sample_manifold

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures():
    return FIXTURES


@pytest.fixture(scope="session")
def sphere():
    return make_atlas("sphere")


@pytest.fixture(scope="session")
def flat():
    return make_atlas("flat")


@pytest.fixture(scope="session")
def circle():
    return make_atlas("circle")


@pytest.fixture(scope="session")
def small_graphs():
    """Modest graphs on each analytic atlas, shared by the non-acceptance tests."""
    out = {}
    for name, n, k in (("flat", 300, 8), ("circle", 200, 6), ("sphere", 400, 10)):
        atlas = make_atlas(name)
        data = sample_manifold(name, n, 7)
        out[name] = (atlas, data, build_graph(atlas, data, BuildConfig(N=n, k=k, seed=3)))
    return out


def random_ambient(rng, dim, n):
    return rng.normal(scale=1.5, size=(n, dim))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
