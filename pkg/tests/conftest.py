import hypothesis
import numpy as np
import pytest

import causalrefine as cr

hypothesis.settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[hypothesis.HealthCheck.too_slow])
hypothesis.settings.load_profile("default")


@pytest.fixture
def chain2():
    """Two-node chain: internal node i with single cause j."""
    return cr.build_graph(["i", "j"], [("i", "j")])


@pytest.fixture
def polytree22():
    return cr.make_polytree(cr.PolytreeSpec(2, 2))


@pytest.fixture
def edgeless3():
    return cr.build_graph(["a", "b", "c"], [])


def all_dags(n: int):
    """Every labeled DAG on n nodes, by filtering all edge subsets."""
    names = [f"n{i}" for i in range(n)]
    pairs = [(names[a], names[b]) for a in range(n) for b in range(n) if a != b]
    graphs = []
    for mask in range(2 ** len(pairs)):
        edges = [pairs[k] for k in range(len(pairs)) if mask >> k & 1]
        try:
            graphs.append(cr.build_graph(names, edges))
        except cr.CycleDetected:
            continue
    return graphs


def binary_patterns(n: int):
    return [np.array([(mask >> i) & 1 for i in range(n)], dtype=float)
            for mask in range(2 ** n)]
