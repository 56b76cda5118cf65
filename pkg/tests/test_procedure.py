import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dagfdr.baselines import bh, by
from dagfdr.counts import EXACT, compute_effective_counts
from dagfdr.errors import InvalidAlpha, MissingPValue, OracleExtraneous, OracleIncomplete
from dagfdr.graph import build_graph, testable_frontier
from dagfdr.procedure import (
    BY_GLOBAL,
    BY_SUGGESTED,
    RESHAPED,
    DaggerConfig,
    fdp_against_truth,
    run_batch,
    run_sequential,
)
from dagfdr.reshape import make_dagger_by, make_identity
from dagfdr.stepup import DepthCandidate, run_depth_bruteforce

from conftest import EXAMPLE_P, dags_with_pvalues

PLAIN_05 = DaggerConfig(alpha=0.05)


def reference_dagger(g, pvalues, alpha, reshaped=False):
    """Literal top-down loop built from the frontier query and the O(K^2) scan."""
    counts = compute_effective_counts(g, EXACT)
    L = counts.L
    rejected, R_prev, per_depth = set(), 0, []
    for d in range(1, g.D + 1):
        front = testable_frontier(g, rejected, d)
        cands = []
        for a in sorted(g.depth_partition[d - 1]):
            m = float(counts.m[a])
            b = make_dagger_by(m, d, g.n_upto[d - 1]) if reshaped else make_identity()
            cands.append(DepthCandidate(a, pvalues[a], a in front, alpha * float(counts.ell[a]) / L, m, b))
        out = run_depth_bruteforce(cands, R_prev)
        rejected |= out.rejected
        R_prev += out.R_d
        per_depth.append(out.R_d)
    return rejected, tuple(per_depth)


def test_example_golden(example_graph):
    g = example_graph
    res = run_batch(g, compute_effective_counts(g), EXAMPLE_P, PLAIN_05)
    assert res.rejected == {"H11", "H12", "H21", "H31"}
    assert res.R_per_depth == (2, 1, 1)
    assert res.R_total == 4 == len(res.rejected)
    assert "H32" not in res.tested_nodes
    assert res.tested_nodes == {"H11", "H12", "H21", "H22", "H31"}
    a = 0.05
    assert res.audit["H11"].level == pytest.approx(1.25 / 2 * (3.75 + 2 - 1) / 3.75 * a, abs=1e-12)
    assert res.audit["H12"].level == pytest.approx(0.75 / 2 * (2.25 + 2 - 1) / 2.25 * a, abs=1e-12)
    assert res.audit["H21"].level == pytest.approx(1.5 / 2 * (2.5 + 1 + 2 - 1) / 2.5 * a, abs=1e-12)
    assert res.audit["H22"].level == pytest.approx(0.5 / 2 * (1.5 + 1 + 2 - 1) / 1.5 * a, abs=1e-12)
    assert res.audit["H31"].level == pytest.approx(0.5 * (1 + 1 + 3 - 1) * a, abs=1e-12)
    assert res.audit["H32"].level == 0.0 and not res.audit["H32"].tested
    assert res.audit["H31"].m == 1.0 and res.audit["H11"].ell == 1.25


def test_example_p_values_sit_on_the_right_side_of_each_threshold():
    a = 0.05
    p = EXAMPLE_P
    assert p["H11"] <= 1.25 / 2 * (3.75 + 2 - 1) / 3.75 * a
    assert p["H12"] <= 0.75 / 2 * (2.25 + 2 - 1) / 2.25 * a
    assert p["H21"] <= 1.5 / 2 * (2.5 + 1 + 2 - 1) / 2.5 * a
    assert p["H22"] > 0.5 / 2 * (1.5 + 2 + 2 - 1) / 1.5 * a
    assert p["H31"] <= 0.5 * (1 + 1 + 3 - 1) * a


def test_all_ones_rejects_nothing(example_graph):
    g = example_graph
    res = run_batch(g, compute_effective_counts(g), dict.fromkeys(g.ids, 1.0), PLAIN_05)
    assert res.rejected == frozenset()
    assert res.tested_nodes == g.roots


def test_edgeless_is_bh_and_by():
    rng = random.Random(2)
    for _ in range(200):
        N = rng.randint(1, 60)
        g = build_graph([], nodes=[f"n{i:02d}" for i in range(N)])
        c = compute_effective_counts(g)
        p = [rng.random() ** 2 for _ in range(N)]
        pm = dict(zip(g.ids, p))
        plain = run_batch(g, c, pm, DaggerConfig(alpha=0.2))
        assert plain.rejected == {g.ids[i] for i in bh(p, 0.2)}
        resh = run_batch(g, c, pm, DaggerConfig(alpha=0.2, variant=RESHAPED, reshape_spec=BY_SUGGESTED))
        assert resh.rejected == {g.ids[i] for i in by(p, 0.2)}


def test_line_graph_rejects_a_prefix():
    rng = random.Random(4)
    for _ in range(100):
        n = rng.randint(1, 15)
        names = [f"s{i:02d}" for i in range(n)]
        g = build_graph(list(zip(names, names[1:])), nodes=names)
        p = {a: rng.random() * rng.choice([0.05, 1]) for a in names}
        res = run_batch(g, compute_effective_counts(g), p, DaggerConfig(alpha=0.2))
        k = len(res.rejected)
        assert res.rejected == set(names[:k])


def test_missing_p_and_alpha_errors(example_graph):
    g = example_graph
    c = compute_effective_counts(g)
    with pytest.raises(MissingPValue):
        run_batch(g, c, {"H11": 0.01}, PLAIN_05)
    # untestable nodes need no value
    p = {k: v for k, v in EXAMPLE_P.items() if k != "H32"}
    assert run_batch(g, c, p, PLAIN_05).rejected == {"H11", "H12", "H21", "H31"}
    with pytest.raises(InvalidAlpha):
        DaggerConfig(alpha=1.0)
    with pytest.raises(ValueError):
        DaggerConfig(alpha=0.1, variant=RESHAPED)


def test_sequential_replays_batch(example_graph):
    g = example_graph
    c = compute_effective_counts(g)
    calls = []

    def oracle(d, nodes):
        calls.append((d, nodes))
        return {a: EXAMPLE_P[a] for a in nodes}

    res = run_sequential(g, c, oracle, PLAIN_05)
    assert res.same_decisions(run_batch(g, c, EXAMPLE_P, PLAIN_05))
    assert calls == [(1, ["H11", "H12"]), (2, ["H21", "H22"]), (3, ["H31"])]


def test_sequential_all_ones(example_graph):
    g = example_graph
    calls = []

    def oracle(d, nodes):
        calls.append((d, nodes))
        return dict.fromkeys(nodes, 1.0)

    res = run_sequential(g, compute_effective_counts(g), oracle, PLAIN_05)
    assert res.rejected == frozenset()
    assert calls == [(1, ["H11", "H12"]), (2, []), (3, [])]


def test_sequential_contract_violations(example_graph):
    g = example_graph
    c = compute_effective_counts(g)
    with pytest.raises(OracleIncomplete):
        run_sequential(g, c, lambda d, nodes: {}, PLAIN_05)
    with pytest.raises(OracleExtraneous):
        run_sequential(g, c, lambda d, nodes: {**dict.fromkeys(nodes, 0.5), "H32": 0.1}, PLAIN_05)


def test_fdp_against_truth(example_graph):
    g = example_graph
    c = compute_effective_counts(g)
    res = run_batch(g, c, EXAMPLE_P, PLAIN_05)
    assert fdp_against_truth(res, {"H22", "H32"}) == {"fdp": 0.0, "power": 1.0}
    none = run_batch(g, c, dict.fromkeys(g.ids, 1.0), PLAIN_05)
    assert fdp_against_truth(none, set()) == {"fdp": 0.0, "power": 0.0}
    everything = run_batch(g, c, dict.fromkeys(g.ids, 0.0), PLAIN_05)
    assert everything.rejected == set(g.ids)
    assert fdp_against_truth(everything, g.ids) == {"fdp": 1.0, "power": 0.0}


def _strong_heredity(g, rejected):
    return all(g.parents[a] <= rejected for a in rejected)


@settings(max_examples=200, deadline=None)
@given(dags_with_pvalues(), st.sampled_from([0.05, 0.2, 0.5]))
def test_matches_reference_and_invariants(gp, alpha):
    g, p = gp
    c = compute_effective_counts(g)
    for reshaped in (False, True):
        cfg = DaggerConfig(alpha, RESHAPED, BY_SUGGESTED) if reshaped else DaggerConfig(alpha)
        res = run_batch(g, c, p, cfg)
        ref_rej, ref_R = reference_dagger(g, p, alpha, reshaped)
        assert res.rejected == ref_rej and res.R_per_depth == ref_R
        assert _strong_heredity(g, res.rejected)
        assert res.R_total == len(res.rejected)
        # tested set is the union of frontiers given earlier decisions
        tested = set()
        for d in range(1, g.D + 1):
            earlier = {a for a in res.rejected if g.depth[a] < d}
            tested |= testable_frontier(g, earlier, d)
        assert tested == res.tested_nodes


@settings(max_examples=150, deadline=None)
@given(dags_with_pvalues(), st.integers(1, 12))
def test_prefix_consistency(gp, limit):
    g, p = gp
    c = compute_effective_counts(g)
    full = run_batch(g, c, p, DaggerConfig(0.2))
    part = run_batch(g, c, p, DaggerConfig(0.2, depth_limit=limit))
    assert part.per_depth == full.per_depth[:limit]
    assert part.rejected == {a for a in full.rejected if g.depth[a] <= limit}


@settings(max_examples=150, deadline=None)
@given(dags_with_pvalues(), st.integers(0, 2**32 - 1))
def test_untested_values_are_ignored(gp, seed):
    g, p = gp
    c = compute_effective_counts(g)
    res = run_batch(g, c, p, DaggerConfig(0.2))
    rng = random.Random(seed)
    q = {a: (x if a in res.tested_nodes else rng.random()) for a, x in p.items()}
    again = run_batch(g, c, q, DaggerConfig(0.2))
    assert again.same_decisions(res)
    assert all(again.audit[a].level == res.audit[a].level for a in g.ids)


@settings(max_examples=150, deadline=None)
@given(dags_with_pvalues(), st.integers(0, 100), st.floats(0.0, 1.0))
def test_lowering_a_p_value_never_shrinks_rejections(gp, which, factor):
    g, p = gp
    c = compute_effective_counts(g)
    a = g.ids[which % g.N]
    q = dict(p)
    q[a] = p[a] * factor
    for cfg in (DaggerConfig(0.2), DaggerConfig(0.2, RESHAPED, BY_SUGGESTED)):
        assert run_batch(g, c, p, cfg).rejected <= run_batch(g, c, q, cfg).rejected


@settings(max_examples=150, deadline=None)
@given(dags_with_pvalues())
def test_reshaped_subset_of_plain(gp):
    g, p = gp
    c = compute_effective_counts(g)
    plain = run_batch(g, c, p, DaggerConfig(0.2)).rejected
    for spec in (BY_SUGGESTED, BY_GLOBAL):
        assert run_batch(g, c, p, DaggerConfig(0.2, RESHAPED, spec)).rejected <= plain


@settings(max_examples=100, deadline=None)
@given(dags_with_pvalues())
def test_sequential_equals_batch(gp):
    g, p = gp
    c = compute_effective_counts(g)
    asked = []

    def oracle(d, nodes):
        asked.extend(nodes)
        return {a: p[a] for a in nodes}

    seq = run_sequential(g, c, oracle, DaggerConfig(0.2))
    batch = run_batch(g, c, p, DaggerConfig(0.2))
    assert seq.same_decisions(batch)
    assert set(asked) == batch.tested_nodes
    for a in asked:
        assert g.parents[a] <= batch.rejected
