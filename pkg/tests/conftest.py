import numpy as np
import pytest

from fairgraph.graphdata import AttributedGraph


def make_graph(groups, edges=(), d=2, seed=0, splits=None, name="toy"):
    """Graph whose node i is in group ``groups[i]`` (= 2*s + y)."""
    groups = np.asarray(groups)
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(len(groups), d))
    kw = {}
    if splits is not None:
        kw = dict(zip(("train", "val", "test"), splits))
    return AttributedGraph(x, groups & 1, groups >> 1, np.asarray(edges).reshape(-1, 2),
                           name=name, **kw)


def random_graph(n, p, seed=0, d=3):
    rng = np.random.default_rng(seed)
    groups = rng.integers(0, 4, size=n)
    u, v = np.triu_indices(n, 1)
    keep = rng.random(len(u)) < p
    split = rng.integers(0, 3, size=n)
    return make_graph(groups, np.stack([u[keep], v[keep]], 1), d=d, seed=seed,
                      splits=(split == 0, split == 1, split == 2))


@pytest.fixture
def one_per_group():
    return make_graph([0, 1, 2, 3])


@pytest.fixture
def small_graph():
    return random_graph(40, 0.15, seed=3)


_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for an acceptance criterion."""
    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[number])
