from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dyncomm.config import ConfigError, SimulationConfig
from dyncomm.model import (
    BASAL,
    RESPONSE,
    EdgeSnapshot,
    ModelState,
    Regime,
    StepOutcome,
    apply_increments,
    generate_basal_edges,
    generate_response_edges,
    init_importance,
    iter_steps,
    make_rng,
    response_probabilities,
    response_probability,
    run,
    sample_responses,
    signed_importance_view,
    step,
)


def cfg(**kw):
    base = dict(n_nodes=4, horizon=10, polarization_onset="never")
    base.update(kw)
    return SimulationConfig(**base)


def snap(n, edges, k=1):
    return EdgeSnapshot.merge(k, n, basal=edges)


def oracle_probability(n, edges, l, polarized):
    """Response probability by direct summation over in-edges, exact arithmetic."""
    l = [Fraction(x) for x in l]
    senders = [i for i, j in edges if j == n]
    if not senders:
        return Fraction(0)
    l_max = max(l)
    if polarized:
        num = sum(l[i - 1] if i % 2 == n % 2 else -l[i - 1] for i in senders)
        num = max(num, Fraction(0))
    else:
        num = sum(l[i - 1] for i in senders)
    return num / (1 + l_max * len(senders))


# -- init_importance -----------------------------------------------------------


@pytest.mark.parametrize(
    "kw, expected",
    [
        (dict(n_nodes=4), [1, 2, 3, 4]),
        (dict(n_nodes=2, basal_fanout=1, response_fanout=1), [1, 2]),
        (dict(n_nodes=3, basal_fanout=2, response_fanout=2, importance_scheme="explicit-list", importance_values=(0.5, 0.5, 2.0)), [0.5, 0.5, 2.0]),
    ],
)
def test_init_importance(kw, expected):
    np.testing.assert_array_equal(init_importance(cfg(**kw)), expected)


@pytest.mark.parametrize("values", [(1.0, 2.0), (0.0, 1.0, 2.0), (-1.0, 1.0, 2.0)])
def test_init_importance_rejects_bad_explicit_list(values):
    with pytest.raises(ConfigError, match="importance_values"):
        cfg(n_nodes=3, basal_fanout=2, response_fanout=2, importance_scheme="explicit-list", importance_values=values)


# -- edge generation -----------------------------------------------------------


def test_basal_zero_rate_is_empty():
    rng = make_rng(0)
    for _ in range(20):
        assert len(generate_basal_edges(cfg(n_nodes=10, basal_rate=0.0), rng)) == 0


def test_basal_exhaustive_fanout():
    edges = generate_basal_edges(cfg(basal_rate=1.0, basal_fanout=3), make_rng(1))
    assert {tuple(e) for e in edges.tolist()} == {(i, j) for i in range(1, 5) for j in range(1, 5) if i != j}
    assert len(edges) == 12


def test_basal_structure_over_many_draws():
    config = cfg(n_nodes=40, basal_rate=1.0, basal_fanout=3)
    rng = make_rng(2024)
    hits = np.zeros(40)
    for _ in range(1000):
        edges = generate_basal_edges(config, rng)
        assert np.all(edges[:, 0] != edges[:, 1])
        np.testing.assert_array_equal(np.bincount(edges[:, 0], minlength=41)[1:], np.full(40, 3))
        for src in range(1, 41):
            dst = edges[edges[:, 0] == src, 1]
            assert len(set(dst.tolist())) == 3
        hits += np.bincount(edges[:, 1], minlength=41)[1:]
    # each node receives 3 * 39 / 39 = 3 edges per draw on average
    assert np.allclose(hits / 1000, 3.0, atol=0.25)


def test_response_edges_examples():
    config = cfg(response_fanout=3)
    assert len(generate_response_edges([], config, make_rng(0))) == 0
    edges = generate_response_edges([3], config, make_rng(0))
    assert {tuple(e) for e in edges.tolist()} == {(3, 1), (3, 2), (3, 4)}


def test_response_edges_structure():
    config = cfg(n_nodes=40, response_fanout=3)
    rng = make_rng(5)
    for _ in range(500):
        edges = generate_response_edges({1, 2}, config, rng)
        assert len(edges) == 6
        assert np.all(edges[:, 0] != edges[:, 1])
        for src in (1, 2):
            assert len(set(edges[edges[:, 0] == src, 1].tolist())) == 3


def test_target_choice_is_uniform():
    # every one of the 3 other nodes equally likely as the single target of node 2
    config = cfg(n_nodes=4, response_fanout=1)
    rng = make_rng(11)
    counts = np.zeros(5)
    trials = 30000
    for _ in range(trials):
        counts[generate_response_edges([2], config, rng)[0, 1]] += 1
    assert counts[2] == 0
    se = np.sqrt(trials * (1 / 3) * (2 / 3))
    assert np.all(np.abs(counts[[1, 3, 4]] - trials / 3) < 4 * se)


# -- signed view and probabilities ---------------------------------------------


@pytest.mark.parametrize(
    "l, target, expected",
    [
        ((1, 2, 3, 4), "even", (-1, 2, -3, 4)),
        ((1, 2, 3, 4), "odd", (1, -2, 3, -4)),
        ((5, 5), "even", (-5, 5)),
    ],
)
def test_signed_importance_view(l, target, expected):
    np.testing.assert_array_equal(signed_importance_view(l, target), expected)


@given(st.lists(st.floats(0.01, 1e6), min_size=1, max_size=50))
def test_signed_view_symmetry(l):
    np.testing.assert_array_equal(signed_importance_view(l, "even"), -signed_importance_view(l, "odd"))


@pytest.mark.parametrize(
    "node, senders, regime, expected",
    [
        (3, (1, 4), Regime.HOMOGENEOUS, Fraction(5, 9)),
        (3, (), Regime.HOMOGENEOUS, Fraction(0)),
        (2, (1, 4), Regime.ODD_EVEN, Fraction(1, 3)),
        (2, (1, 3), Regime.ODD_EVEN, Fraction(0)),
    ],
)
def test_response_probability_examples(node, senders, regime, expected):
    edges = [(i, node) for i in senders]
    if not edges:
        edges = [(1, 2)]  # some traffic elsewhere
    s = snap(4, edges)
    l = (1, 2, 3, 4)
    assert oracle_probability(node, edges, l, regime is Regime.ODD_EVEN) == expected
    assert response_probability(node, s, l, regime) == pytest.approx(float(expected), abs=1e-15)


edge_sets = st.integers(2, 8).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.sets(st.tuples(st.integers(1, n), st.integers(1, n)).filter(lambda e: e[0] != e[1])),
        st.lists(st.floats(0.01, 1e5), min_size=n, max_size=n),
    )
)


@given(edge_sets, st.booleans())
@settings(max_examples=200)
def test_probability_matches_exact_oracle(case, polarized):
    n, edges, l = case
    regime = Regime.ODD_EVEN if polarized else Regime.HOMOGENEOUS
    p = response_probabilities(snap(n, edges).adjacency(), np.array(l), regime)
    for node in range(1, n + 1):
        expected = float(oracle_probability(node, edges, l, polarized))
        assert p[node - 1] == pytest.approx(expected, rel=1e-12, abs=1e-15)
        assert 0 <= p[node - 1] < 1


# -- sampling ------------------------------------------------------------------


def test_empty_snapshot_has_no_responders():
    out = sample_responses(EdgeSnapshot.empty(1, 4), (1, 2, 3, 4), Regime.HOMOGENEOUS, make_rng(0))
    assert len(out.responders) == 0 and out.trigger_pairs == set()


def test_cancelled_node_never_responds():
    s = snap(4, [(1, 2), (3, 2)])
    for seed in range(300):
        out = sample_responses(s, (1, 2, 3, 4), Regime.ODD_EVEN, make_rng(seed))
        assert 2 not in out.responders


def test_single_top_sender_frequency():
    # l_N / (1 + l_N) = 4/5
    s = snap(4, [(4, 1)])
    rng = make_rng(99)
    fired = sum(1 in sample_responses(s, (1, 2, 3, 4), Regime.HOMOGENEOUS, rng).responders for _ in range(100_000))
    assert abs(fired / 100_000 - 0.8) < 0.01


def test_trigger_pairs_are_in_edges_of_responders():
    s = snap(5, [(1, 3), (4, 3), (2, 5), (5, 1)])
    out = StepOutcome.from_snapshot(s, [3, 1])
    assert out.trigger_pairs == {(1, 3), (4, 3), (5, 1)}


# -- increments ----------------------------------------------------------------


@pytest.mark.parametrize(
    "l, pairs, expected",
    [
        ((1, 2, 3, 4), [(1, 3), (4, 3)], (2, 2, 3, 5)),
        ((1, 2, 3), [(2, 1), (2, 3)], (1, 4, 3)),
        ((1.5, 2, 7), [], (1.5, 2, 7)),
    ],
)
def test_apply_increments(l, pairs, expected):
    n = len(l)
    s = snap(n, pairs) if pairs else EdgeSnapshot.empty(1, n)
    out = StepOutcome.from_snapshot(s, sorted({j for _, j in pairs}))
    np.testing.assert_array_equal(apply_increments(l, out), expected)


def test_in_group_only_scope_skips_opposite_senders():
    s = snap(4, [(1, 2), (4, 2)])
    out = StepOutcome.from_snapshot(s, [2])
    np.testing.assert_array_equal(apply_increments((1, 2, 3, 4), out, Regime.ODD_EVEN, "in-group-only"), (1, 2, 3, 5))
    np.testing.assert_array_equal(apply_increments((1, 2, 3, 4), out, Regime.HOMOGENEOUS, "in-group-only"), (2, 2, 3, 5))


# -- snapshots -----------------------------------------------------------------


def test_merge_dedups_and_response_wins():
    s = EdgeSnapshot.merge(3, 4, basal=[(1, 2), (2, 3)], response=[(1, 2), (4, 1), (4, 1)])
    assert s.edges == {(1, 2), (2, 3), (4, 1)}
    tags = dict(zip(zip(s.src.tolist(), s.dst.tolist()), s.provenance.tolist()))
    assert tags == {(1, 2): RESPONSE, (2, 3): BASAL, (4, 1): RESPONSE}


def test_merge_rejects_self_loops():
    with pytest.raises(ValueError):
        EdgeSnapshot.merge(1, 3, basal=[(2, 2)])


# -- stepping ------------------------------------------------------------------


def test_quiescent_step():
    config = cfg(basal_rate=0.0)
    state, out, s = step(ModelState(init_importance(config)), config, Regime.HOMOGENEOUS, make_rng(0))
    assert len(s) == 0 and len(out.responders) == 0
    np.testing.assert_array_equal(state.importance, (1, 2, 3, 4))
    assert state.k == 1


def test_two_node_step():
    config = cfg(n_nodes=2, basal_rate=1.0, basal_fanout=1, response_fanout=1)
    rng = make_rng(3)
    fired = np.zeros(2)
    trials = 20000
    for _ in range(trials):
        state, out, s = step(ModelState(np.array([1.0, 2.0])), config, Regime.HOMOGENEOUS, rng)
        assert s.edges == {(1, 2), (2, 1)}
        fired[out.responders - 1] += 1
    assert response_probability(1, s, (1, 2), Regime.HOMOGENEOUS) == pytest.approx(2 / 3)
    assert response_probability(2, s, (1, 2), Regime.HOMOGENEOUS) == pytest.approx(1 / 3)
    se = np.sqrt(np.array([2 / 9, 2 / 9]) / trials)
    assert np.all(np.abs(fired / trials - [2 / 3, 1 / 3]) < 4 * se)


def test_step_beyond_horizon_raises():
    config = cfg(horizon=1)
    with pytest.raises(ValueError):
        step(ModelState(init_importance(config), k=1), config, Regime.HOMOGENEOUS, make_rng(0))


def test_responders_edges_arrive_next_step(small_config):
    previous = None
    for state, out, s in iter_steps(small_config):
        response_edges = {e for e, p in zip(zip(s.src.tolist(), s.dst.tolist()), s.provenance.tolist()) if p == RESPONSE}
        expected_sources = set() if previous is None else set(previous.responders.tolist())
        assert {i for i, _ in response_edges} <= expected_sources
        # each previous responder's full fanout is present (possibly tagged response over basal)
        for r in expected_sources:
            assert sum(1 for i, _ in response_edges if i == r) == small_config.response_fanout
        previous = out


def test_run_deterministic(small_config):
    assert run(small_config) == run(small_config)
    assert run(small_config) != run(small_config.replace(seed=8))


def test_run_empty_horizon():
    config = cfg(horizon=0, polarization_onset=0)
    log = run(config)
    assert len(log) == 0 and log.config == config and len(log.edges) == 0
    np.testing.assert_array_equal(log.final_importance, (1, 2, 3, 4))


def test_never_regime_is_homogeneous(small_config):
    homogeneous = small_config.replace(polarization_onset=small_config.horizon)
    assert run(small_config.replace(polarization_onset="never")).edges.tolist() == run(homogeneous).edges.tolist()


@given(
    st.integers(2, 7),
    st.floats(0, 1),
    st.integers(0, 2**64 - 1),
    st.sampled_from(["all", "in-group-only"]),
)
@settings(max_examples=40, deadline=None)
def test_step_invariants(n, b, seed, scope):
    config = SimulationConfig(n_nodes=n, horizon=30, polarization_onset=15, basal_rate=b,
                              basal_fanout=n - 1, response_fanout=1, seed=seed, increment_scope=scope)
    before = init_importance(config)
    for state, out, s in iter_steps(config):
        assert np.all(s.src != s.dst)
        assert len(s.edges) == len(s)
        degree = s.in_degree()
        assert np.all(degree[out.responders - 1] >= 1)
        assert np.all(state.importance >= before)
        if scope == "all":
            assert state.importance.sum() - before.sum() == len(out.trigger_pairs)
        before = state.importance


# -- brute-force small-instance oracle -----------------------------------------


def exact_two_step_distribution(l):
    """Joint law of (step-1 responders, step-2 responders) for N=3, b=1,
    exhaustive fanout: both snapshots are the complete digraph."""
    n = len(l)
    nodes = range(1, n + 1)
    dist = {}

    def probs(vals):
        return [oracle_probability(v, [(i, j) for i in nodes for j in nodes if i != j], vals, False) for v in nodes]

    p1 = probs(l)
    for fire1 in product((0, 1), repeat=n):
        w1 = np.prod([p if f else 1 - p for p, f in zip(p1, fire1)])
        # every other node's edge to a responder earns +1
        l2 = [Fraction(l[i]) + sum(fire1[j] for j in range(n) if j != i) for i in range(n)]
        p2 = probs(l2)
        for fire2 in product((0, 1), repeat=n):
            w2 = np.prod([p if f else 1 - p for p, f in zip(p2, fire2)])
            dist[(fire1, fire2)] = w1 * w2
    return dist


def test_two_step_distribution_matches_enumeration():
    dist = exact_two_step_distribution((1, 2, 3))
    assert sum(dist.values()) == 1
    config = SimulationConfig(n_nodes=3, horizon=2, polarization_onset="never", basal_rate=1.0,
                              basal_fanout=2, response_fanout=2)
    runs = 20000
    counts = dict.fromkeys(dist, 0)
    for seed in range(runs):
        log = run(config.replace(seed=seed))
        key = tuple(
            tuple(int(v in log.responses[log.responses[:, 0] == k, 1]) for v in (1, 2, 3)) for k in (1, 2)
        )
        counts[key] += 1
    for key, p in dist.items():
        p = float(p)
        se = np.sqrt(p * (1 - p) / runs)
        assert abs(counts[key] / runs - p) <= 4 * se + 1e-12, key
