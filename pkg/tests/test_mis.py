from fractions import Fraction

import pytest

from derandcc import mis
from derandcc.errors import ParameterError
from derandcc.graph import Graph, check_mis, generate
from derandcc.hashfam import SeedAssignment
from derandcc.sim import ModelKind

F = Fraction


def test_update_probability_rule():
    assert mis.update_probability(F(1, 4), F(1, 2)) == F(1, 8)
    assert mis.update_probability(F(1, 4), F(3)) == F(1, 8)
    assert mis.update_probability(F(1, 8), F(1, 4)) == F(1, 4)
    # doubling is capped at 1/4
    assert mis.update_probability(F(1, 4), F(0)) == F(1, 4)
    with pytest.raises(ParameterError, match="underflow"):
        mis.update_probability(F(1, 8), F(1), min_p=F(1, 8))


def test_classify_golden():
    # at the cap with low pressure: type-1
    assert mis.classify_golden(F(1, 4), F(1, 2), F(0)) == "type1"
    # pressured with enough light mass: type-2
    assert mis.classify_golden(F(1, 8), F(1, 2), F(6, 100)) == "type2"
    # fails both conditions
    assert mis.classify_golden(F(1, 8), F(1, 5), F(1, 5)) == "not_golden"
    # satisfying both counts as type-1
    assert mis.classify_golden(F(1, 4), F(1, 2), F(1, 2)) == "type1"
    # type-2 needs a tenth of the pressure from light neighbors
    assert mis.classify_golden(F(1, 8), F(1, 2), F(4, 100)) == "not_golden"


def test_select_W_window():
    # greedy by ascending ID until the mass reaches 1/40
    picked = mis.select_W([(3, F(1, 64)), (1, F(1, 64)), (2, F(1, 128))])
    assert picked == [1, 2, 3]
    # stop as soon as the window is reached
    assert mis.select_W([(5, F(1, 32)), (9, F(1, 4))]) == [5]
    # overshoot past 1/4 falls back to the last-added singleton
    assert mis.select_W([(2, F(1, 64)), (7, F(1, 4))]) == [7]


def test_phase_budget():
    config = mis.MisConfig(c_phase=50)
    assert mis.phase_budget(config, 2) == 50
    assert mis.phase_budget(config, 63) == 299


def test_estimator_unconditioned_value_matches_expectation():
    """Two isolated nodes at the cap: chi is exactly p per node."""
    g = Graph(2, [])
    config = mis.MisConfig()
    state = mis._MisState(g, config)
    live = [0, 1]
    d = state.effective_degrees(live)
    golden, windows = state.classify_all(live, d)
    assert golden == {0: "type1", 1: "type1"}
    params = state.family(live)
    est = mis.PhaseEstimator(state, live, d, golden, windows, params)
    assert est.evaluate(SeedAssignment(params)) == F(1, 4) + F(1, 4)


def test_estimator_edge_pair_expectation():
    """One edge at the cap: chi(v) = p(1 - p) exactly by pairwise independence."""
    g = Graph(2, [(0, 1, 1)])
    config = mis.MisConfig()
    state = mis._MisState(g, config)
    live = [0, 1]
    d = state.effective_degrees(live)
    golden, windows = state.classify_all(live, d)
    params = state.family(live)
    est = mis.PhaseEstimator(state, live, d, golden, windows, params)
    expected = 2 * F(1, 4) * (1 - F(1, 4))
    assert est.evaluate(SeedAssignment(params)) == expected


MIS_GRAPHS = [
    ("clique", 16, None, 0),
    ("gnp", 24, {"p": 0.3}, 1),
    ("gnp", 24, {"p": 0.7}, 2),
    ("grid", 25, None, 0),
    ("random_regular", 16, {"degree": 5}, 3),
]


@pytest.mark.parametrize("kind,n,params,seed", MIS_GRAPHS)
def test_det_mis_clique_valid_and_certified(kind, n, params, seed):
    g = generate(kind, n, params, rng_seed=seed)
    r = mis.det_mis_clique(g)
    assert check_mis(g, r.mis).valid
    assert not r.info["bound_violations"]
    assert r.info["residual_edges_at_handoff"] <= 4 * g.n
    for cert in r.info["certs"]:
        assert cert["certified"]
        assert cert["unconditioned"] >= cert["alpha_bound"]
        assert cert["final_value"] >= cert["unconditioned"]


def test_golden_phase_always_removes_a_node():
    for seed in range(4):
        g = generate("gnp", 20, {"p": 0.5}, rng_seed=seed)
        r = mis.det_mis_clique(g)
        for cert in r.info["certs"]:
            if cert["golden"]:
                assert cert["joined"] + cert["removed"] >= 1


def test_det_mis_deterministic():
    g = generate("gnp", 20, {"p": 0.4}, rng_seed=5)
    a = mis.det_mis_clique(g)
    b = mis.det_mis_clique(g)
    assert a.mis.sorted() == b.mis.sorted()
    assert a.metrics.to_dict() == b.metrics.to_dict()
    assert [c["seed"] for c in a.info["certs"]] == [c["seed"] for c in b.info["certs"]]


def test_broadcast_clique_variant():
    g = generate("gnp", 16, {"p": 0.4}, rng_seed=1)
    r = mis.det_mis_clique(g, model_kind=ModelKind.BROADCAST_CLIQUE)
    assert check_mis(g, r.mis).valid
    with pytest.raises(ParameterError):
        mis.det_mis_clique(g, model_kind=ModelKind.CONGEST)


def test_regular_graph_does_not_stall():
    """Lockstep probability oscillation must still produce golden phases."""
    g = generate("clique", 32)
    r = mis.det_mis_clique(g)
    assert check_mis(g, r.mis).valid
    assert r.info["residual_edges_at_handoff"] == 0
    assert any(c["golden"] for c in r.info["certs"])


def test_bounded_delta_gate():
    dense = generate("gnp", 16, {"p": 0.8}, rng_seed=0)
    with pytest.raises(ParameterError, match="degree gate"):
        mis.det_mis_bounded_delta(dense)


def test_bounded_delta_valid():
    g = generate("grid", 64, {"rows": 8, "cols": 8})
    r = mis.det_mis_bounded_delta(g)
    assert check_mis(g, r.mis).valid
    assert not r.info["bound_violations"]
    assert r.info["block_size"] >= 1


def test_congest_valid_and_disconnected():
    g = generate("grid", 16, {"rows": 4, "cols": 4})
    r = mis.det_mis_congest(g)
    assert check_mis(g, r.mis).valid and not r.info["bound_violations"]
    # two components run in parallel: rounds is a max, not a sum
    h = Graph(8, [(0, 1, 1), (1, 2, 1), (4, 5, 1), (5, 6, 1), (6, 7, 1)])
    rh = mis.det_mis_congest(h)
    assert check_mis(h, rh.mis).valid
    per_comp = [len(c["certs"]) for c in rh.info["components"]]
    assert len(per_comp) == 3  # node 3 is its own component


def test_rand_mis_valid():
    for seed in range(3):
        g = generate("gnp", 24, {"p": 0.5}, rng_seed=seed)
        r = mis.rand_mis_clique(g, rng_seed=seed)
        assert check_mis(g, r.mis).valid


def test_color_via_mis_proper():
    for kind, n, params in [("grid", 16, {"rows": 4, "cols": 4}),
                            ("grid", 9, {"rows": 1, "cols": 9})]:
        g = generate(kind, n, params)
        coloring, res = mis.color_via_mis(g)
        assert set(coloring) == set(range(g.n))
        palette = g.max_degree() + 1
        assert all(0 <= c < palette for c in coloring.values())
        assert all(coloring[u] != coloring[v] for u, v, _ in g.edges)


def test_color_edgeless():
    coloring, _ = mis.color_via_mis(Graph(4, []))
    assert coloring == {0: 0, 1: 0, 2: 0, 3: 0}
