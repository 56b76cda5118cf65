import math
import random

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dagfdr.combine import (
    CHILDREN,
    FISHER,
    STOUFFER,
    SUB_LEAVES,
    CombineMethod,
    chi2_sf_even,
    fisher,
    fisher_statistic,
    norm_isf,
    norm_sf,
    parse_method,
    propagate_intersection,
    simes,
    stouffer,
)
from dagfdr.errors import BoundaryP, EmptyInput, ExtraP, InvalidP, MissingLeafP, ZeroPValue
from dagfdr.graph import build_graph
from dagfdr.reshape import make_by_global, make_identity

# frozen from a 40-digit mpmath evaluation: quadrature of the chi-square(4)
# density above the statistic, and erfinv/erfc for the normal quantities
FISHER_005_005 = 0.017478661367769955
FISHER_STAT_005_005 = 11.982929094215964
STOUFFER_005_005 = 0.010004626858059018


def test_simes_examples():
    assert simes([0.01, 0.04, 0.1]) == pytest.approx(0.03)
    assert simes([0.37]) == 0.37
    assert simes([0.2] * 5) == pytest.approx(0.2)
    assert simes([0.9, 0.95]) == pytest.approx(0.95)
    assert simes([1.0, 1.0, 1.0]) == 1.0
    with pytest.raises(EmptyInput):
        simes([])
    with pytest.raises(InvalidP):
        simes([0.5, 1.5])


def test_simes_reshaped():
    p = [0.01, 0.04, 0.1, 0.3]
    assert simes(p, make_identity()) == simes(p)
    h = sum(1 / k for k in range(1, 5))
    assert simes(p, make_by_global(4)) == pytest.approx(min(1.0, simes(p) * h))


def test_fisher_examples():
    assert fisher([1.0, 1.0]) == 1.0
    for p in (0.3, 0.05, 1e-8):
        assert fisher([p]) == pytest.approx(p, rel=1e-13)
    assert fisher_statistic([0.05, 0.05]) == pytest.approx(FISHER_STAT_005_005, rel=1e-14)
    assert fisher([0.05, 0.05]) == pytest.approx(FISHER_005_005, abs=1e-6)
    with pytest.raises(ZeroPValue):
        fisher([0.0, 0.5])


def test_stouffer_examples():
    for p in (0.3, 0.05, 1e-6):
        assert stouffer([p]) == pytest.approx(p, rel=1e-10)
    assert stouffer([0.5, 0.5]) == pytest.approx(0.5, abs=1e-15)
    assert stouffer([0.05, 0.05]) == pytest.approx(STOUFFER_005_005, abs=1e-4)
    with pytest.raises(BoundaryP):
        stouffer([1.0])
    with pytest.raises(BoundaryP):
        stouffer([0.0, 0.3])


def _chi2_sf_quad(x, dof):
    k = mp.mpf(dof) / 2
    return mp.quad(lambda t: t ** (k - 1) * mp.e ** (-t / 2) / (2**k * mp.gamma(k)), [x, x + 50, mp.inf])


@pytest.mark.parametrize("dof", [2, 4, 6, 10, 40])
@pytest.mark.parametrize("x", [0.01, 0.5, 3.0, 11.98, 40.0, 120.0])
def test_chi2_sf_against_quadrature(x, dof):
    mp.mp.dps = 30
    assert chi2_sf_even(x, dof) == pytest.approx(float(_chi2_sf_quad(x, dof)), rel=1e-10, abs=1e-300)


@pytest.mark.parametrize("p", [1e-12, 1e-6, 0.01, 0.2, 0.5, 0.77, 0.999])
def test_normal_helpers_against_mpmath(p):
    mp.mp.dps = 30
    z = float(mp.sqrt(2) * mp.erfinv(1 - 2 * mp.mpf(p)))
    assert norm_isf(p) == pytest.approx(z, rel=1e-12, abs=1e-14)
    assert norm_sf(z) == pytest.approx(p, rel=1e-12)


unit = st.floats(1e-9, 1 - 1e-9)


@settings(max_examples=200, deadline=None)
@given(st.lists(unit, min_size=1, max_size=10), st.integers(0, 9), st.floats(0.0, 0.5))
def test_combiners_monotone(p, idx, bump):
    idx %= len(p)
    q = list(p)
    q[idx] = min(q[idx] + bump, 1 - 1e-9)
    for f in (simes, fisher, stouffer):
        assert f(q) >= f(p) - 1e-12


def test_super_uniform_under_global_null():
    rng = np.random.default_rng(20240101)
    draws = 100_000
    for S in (2, 5):
        u = rng.random((draws, S))
        u = np.clip(u, 1e-300, 1 - 1e-16)
        for f in (simes, fisher, stouffer):
            out = np.array([f(row) for row in u.tolist()])
            for t in (0.01, 0.05, 0.1, 0.5):
                ecdf = (out <= t).mean()
                se = math.sqrt(t * (1 - t) / draws)
                assert ecdf <= t + 3 * se, (f.__name__, S, t, ecdf)


def test_propagate_examples(example_graph):
    line = build_graph([("A", "B"), ("B", "C")])
    assert propagate_intersection(line, {"C": 0.2}) == {"A": 0.2, "B": 0.2, "C": 0.2}

    star = build_graph([("R", "x"), ("R", "y"), ("R", "z")])
    out = propagate_intersection(star, {"x": 0.01, "y": 0.04, "z": 0.1})
    assert out["R"] == pytest.approx(0.03)

    a, b = 0.02, 0.3
    m = CombineMethod(basis=SUB_LEAVES)
    out = propagate_intersection(example_graph, {"H31": a, "H32": b}, m)
    both = simes([a, b])
    assert out["H21"] == out["H11"] == out["H12"] == both
    assert out["H22"] == b

    with pytest.raises(MissingLeafP):
        propagate_intersection(line, {})
    with pytest.raises(ExtraP):
        propagate_intersection(line, {"C": 0.2, "A": 0.1})


def test_propagate_bases_on_a_tree():
    rng = random.Random(1)
    edges = [(f"t{rng.randrange(i):02d}", f"t{i:02d}") for i in range(1, 30)]
    g = build_graph(edges)
    leaf_p = {a: rng.random() for a in g.leaves}
    # sub-leaves basis against a direct reachability gather
    out = propagate_intersection(g, leaf_p, CombineMethod(FISHER, SUB_LEAVES))
    for a in g.ids:
        seen, stack = set(), [a]
        while stack:
            x = stack.pop()
            seen.add(x)
            stack.extend(g.children[x])
        vals = [leaf_p[x] for x in sorted(seen & g.leaves)]
        assert out[a] == pytest.approx(fisher(vals), rel=1e-12)
    out = propagate_intersection(g, leaf_p, CombineMethod(STOUFFER, CHILDREN))
    for a in g.ids:
        if g.children[a]:
            assert out[a] == stouffer([out[c] for c in sorted(g.children[a])])


def test_parse_method():
    assert parse_method("fisher").kind == FISHER
    m = parse_method("simes:by", n_leaves=4)
    assert m([0.01, 0.2]) == simes([0.01, 0.2], make_by_global(4))
    with pytest.raises(ValueError):
        parse_method("ruger")
