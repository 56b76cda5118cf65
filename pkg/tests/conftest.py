import random

import pytest
from hypothesis import strategies as st

from dagfdr.graph import STRIP_REDUNDANT, build_graph
from dagfdr.reshape import make_by_global, make_dagger_by, make_identity
from dagfdr.stepup import DepthCandidate

EXAMPLE_EDGES = [
    ("H11", "H21"),
    ("H12", "H21"),
    ("H11", "H22"),
    ("H21", "H31"),
    ("H21", "H32"),
    ("H22", "H32"),
]
# chosen so the per-depth decisions match the worked example (2, 1, 1)
EXAMPLE_P = {"H11": 0.01, "H12": 0.01, "H21": 0.05, "H22": 0.9, "H31": 0.08, "H32": 0.5}


@pytest.fixture
def example_graph():
    return build_graph(EXAMPLE_EDGES)


def node_name(i):
    return f"v{i:03d}"


def random_dag(rng: random.Random, n: int, p_edge: float):
    """Random DAG on ``n`` nodes (edges go from lower to higher index), reduced."""
    order = list(range(n))
    rng.shuffle(order)
    edges = [
        (node_name(order[i]), node_name(order[j]))
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < p_edge
    ]
    return build_graph(edges, STRIP_REDUNDANT, nodes=[node_name(i) for i in range(n)])


@st.composite
def dags(draw, max_nodes=12):
    n = draw(st.integers(1, max_nodes))
    seed = draw(st.integers(0, 2**32 - 1))
    p_edge = draw(st.sampled_from([0.0, 0.15, 0.3, 0.6]))
    return random_dag(random.Random(seed), n, p_edge)


@st.composite
def dags_with_pvalues(draw, max_nodes=12):
    g = draw(dags(max_nodes))
    ps = draw(st.lists(
        st.one_of(st.floats(0.0, 1.0), st.sampled_from([0.0, 0.001, 0.01, 0.05, 1.0])),
        min_size=g.N, max_size=g.N,
    ))
    return g, dict(zip(g.ids, ps))


def random_instance(rng: random.Random, K_max=50):
    K = rng.randint(1, K_max)
    R_prev = rng.choice([0, 0, rng.randint(0, 30)])
    kind = rng.choice(["identity", "by-global", "dagger-by"])
    alpha = rng.choice([0.05, 0.1, 0.2, rng.uniform(0.01, 0.5)])
    d = rng.randint(1, 4)
    n_upto = d + R_prev + K + rng.randint(0, 10)
    cands = []
    for i in range(K):
        m = rng.choice([1.0, rng.uniform(1.0, 20.0), float(rng.randint(1, 10))])
        c = alpha * rng.uniform(0.01, 1.0) / rng.choice([1, 5, 20])
        style = rng.random()
        if style < 0.3:
            p = rng.random() * 0.05
        elif style < 0.4:
            p = rng.choice([0.0, 1.0])
        else:
            p = rng.random()
        testable = rng.random() > 0.1
        if kind == "identity":
            b = make_identity()
        elif kind == "by-global":
            b = make_by_global(rng.randint(1, 200))
        else:
            b = make_dagger_by(m, d, n_upto)
        cands.append(DepthCandidate(f"n{i:02d}", p if testable or rng.random() < 0.5 else None, testable, c, m, b))
    return cands, R_prev
