"""Modified-probability MIS: randomized clique variant plus the three
deterministic variants (clique, bounded-degree clique, CONGEST).

Each phase marks nodes with probability p_t(v); a marked node with no
marked neighbor joins the MIS and its neighbors are removed.  The
deterministic variants pick the per-phase marks from a pairwise
independent family, fixing the seed with the method of conditional
expectations against an age-weighted estimator of removed golden nodes.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import derand
from .errors import BoundViolation, ParameterError
from .graph import Graph, NodeSet, greedy_mis
from .hashfam import CoinMatrix, FamilyParams, SeedAssignment, coin_exponent
from .sim import CostModel, ModelKind, Network, fraction_bits, int_bits

P0 = Fraction(1, 4)
HALVE_THRESHOLD = Fraction(1, 2)
P_CAP = Fraction(1, 4)
# A neighbor is light when its effective degree is at most the halving
# threshold; the removal bound for type-2 nodes only needs d(u) <= 1/2.
LIGHT_THRESHOLD = Fraction(1, 2)
TYPE2_THRESHOLD = Fraction(1, 4)
LIGHT_FRACTION = Fraction(1, 10)
W_LOW = Fraction(1, 40)
W_HIGH = Fraction(1, 4)
ALPHA = Fraction(1, 160)
AGE_WEIGHT = Fraction(160, 159)  # 1/(1-alpha)

UNDECIDED, IN_MIS, REMOVED = "undecided", "in_mis", "removed"


@dataclass
class MisConfig:
    c_phase: int = 50  # phases = ceil(c_phase * log2(scale))
    c_edge: int = 4  # residual-edge bound at handoff: c_edge * n
    c_delta: int = 1  # bounded-degree gate: Delta^3 <= c_delta * n
    bandwidth_factor: int = 8
    route_rounds: int = 2
    t_max: int = 26
    d_independence: int = 2


@dataclass
class MisResult:
    mis: NodeSet
    metrics: object
    info: dict = field(default_factory=dict)


def phase_budget(config, scale):
    return max(1, math.ceil(config.c_phase * math.log2(max(2, scale))))


def update_probability(p, d, min_p=None):
    """Probability update rule: halve under pressure, else double up to 1/4."""
    new = p / 2 if d >= HALVE_THRESHOLD else min(2 * p, P_CAP)
    if min_p is not None and new < min_p:
        raise ParameterError(f"marking probability {new} underflows floor {min_p}")
    return new


def classify_golden(p_v, d_v, light_contribution):
    """Golden-node classification for one node.

    light_contribution: total probability mass of light neighbors.
    A node satisfying both definitions counts as type-1.
    """
    if p_v == P_CAP and d_v <= HALVE_THRESHOLD:
        return "type1"
    if d_v > TYPE2_THRESHOLD and light_contribution >= d_v * LIGHT_FRACTION:
        return "type2"
    return "not_golden"


def select_W(light_neighbors):
    """Pick W(v) with total probability in [1/40, 1/4].

    light_neighbors: list of (node_id, p).  Greedy by ascending ID; if the
    sum overshoots 1/4 when first reaching 1/40, the last-added node alone
    (necessarily p = 1/4) is the window.
    """
    chosen = []
    total = Fraction(0)
    for v, p in sorted(light_neighbors):
        chosen.append(v)
        total += p
        if total >= W_LOW:
            if total > W_HIGH:
                chosen, total = [v], p
            break
    if not W_LOW <= total <= W_HIGH:
        raise AssertionError(f"W selection landed outside window: {total}")
    return chosen


class _MisState:
    """Shared per-run bookkeeping for all MIS variants."""

    def __init__(self, g, config):
        self.g = g
        self.config = config
        self.status = [UNDECIDED] * g.n
        self.p = [P0] * g.n
        self.age = [0] * g.n

    def live_nodes(self):
        return [v for v in range(self.g.n) if self.status[v] == UNDECIDED]

    def live_neighbors(self, v):
        return [u for u in self.g.neighbors(v) if self.status[u] == UNDECIDED]

    def effective_degrees(self, live):
        return {v: sum((self.p[u] for u in self.live_neighbors(v)), Fraction(0))
                for v in live}

    def classify_all(self, live, d):
        """Golden classification and W windows; increments ages afterwards."""
        golden = {}
        windows = {}
        for v in live:
            lights = [(u, self.p[u]) for u in self.live_neighbors(v)
                      if d[u] <= LIGHT_THRESHOLD]
            contribution = sum((p for _, p in lights), Fraction(0))
            kind = classify_golden(self.p[v], d[v], contribution)
            if kind == "type2":
                windows[v] = select_W(lights)
            if kind != "not_golden":
                golden[v] = kind
        return golden, windows

    def bump_ages(self, golden):
        for v in golden:
            self.age[v] += 1

    def family(self, live):
        gamma = max(1, math.ceil(math.log2(max(2, self.g.n))))
        beta = max(2, max((coin_denom_exp(self.p[v]) for v in live), default=2))
        return FamilyParams(gamma=gamma, beta=beta, d=self.config.d_independence,
                            t_max=self.config.t_max)

    def apply_marks(self, live, marks):
        """Joins and removals for one phase; returns (joined, removed)."""
        joined = [v for v in live if marks[v]
                  and not any(marks[u] for u in self.live_neighbors(v))]
        removed = set()
        for v in joined:
            self.status[v] = IN_MIS
        for v in joined:
            for u in self.g.neighbors(v):
                if self.status[u] == UNDECIDED:
                    self.status[u] = REMOVED
                    removed.add(u)
        return joined, sorted(removed)

    def update_probabilities(self, d, min_p=None):
        for v, dv in d.items():
            if self.status[v] == UNDECIDED:
                self.p[v] = update_probability(self.p[v], dv, min_p)

    def residual_edges(self):
        return [(u, v) for u, v, _ in self.g.edges
                if self.status[u] == UNDECIDED and self.status[v] == UNDECIDED]

    def mis_set(self):
        return NodeSet({v for v in range(self.g.n) if self.status[v] == IN_MIS},
                       self.g.n)


def coin_denom_exp(p):
    p = Fraction(p)
    return p.denominator.bit_length() - 1


class PhaseEstimator:
    """Age-weighted golden-node removal estimator for one phase.

    evaluate(Y) = sum over golden v of (160/159)^age(v) * chi(v, Y) / 2^free,
    where the chi counts are exact seed counts from the pairwise family.
    """

    def __init__(self, state, live, d, golden, windows, params):
        self.params = params
        self.cm = CoinMatrix(params, {v: state.p[v] for v in live})
        col = self.cm.col
        self.golden = dict(sorted(golden.items()))
        self.windows = windows
        self.weights = {v: AGE_WEIGHT ** state.age[v] for v in self.golden}
        self.nbr_cols = {
            v: np.array([col[u] for u in state.live_neighbors(v)], dtype=np.int64)
            for v in live
        }
        self.col = col
        self._chi_cache = {}

    def chi(self, assignment):
        """Signed chi counts per golden node over the consistent seeds."""
        key = (assignment.prefix, assignment.length)
        if key in self._chi_cache:
            return self._chi_cache[key]
        C = self.cm.slice(assignment)
        ones = {}
        pair = {}

        def m_of(u):
            cu = self.col[u]
            if cu not in ones:
                ones[cu] = int(C[:, cu].sum(dtype=np.int64))
            return ones[cu]

        def pair_sum(u):
            # count of seeds marking u together with each live neighbor, summed
            cu = self.col[u]
            if cu not in pair:
                cols = self.nbr_cols[u]
                if cols.size == 0:
                    pair[cu] = 0
                else:
                    nbr_marks = C[:, cols].sum(axis=1, dtype=np.int64)
                    pair[cu] = int(C[:, cu].astype(np.int64) @ nbr_marks)
            return pair[cu]

        chis = {}
        for v, kind in self.golden.items():
            if kind == "type1":
                chis[v] = m_of(v) - pair_sum(v)
            else:
                wcols = np.array([self.col[u] for u in self.windows[v]], dtype=np.int64)
                w_marks = C[:, wcols].sum(axis=1, dtype=np.int64)
                total = 0
                for u in self.windows[v]:
                    cu = self.col[u]
                    m_u = m_of(u)
                    within = int(C[:, cu].astype(np.int64) @ w_marks) - m_u
                    total += m_u - pair_sum(u) - within
                chis[v] = total
        self._chi_cache[key] = chis
        return chis

    def evaluate(self, assignment):
        chis = self.chi(assignment)
        denom = 1 << assignment.free_bits
        return sum((self.weights[v] * chis[v] for v in chis), Fraction(0)) / denom

    def weights_sum(self):
        return sum(self.weights.values(), Fraction(0))

    def payload_bits(self, assignment0, assignment1):
        """Largest golden-node message: chi for both branches plus the age."""
        chi0 = self.chi(assignment0)
        chi1 = self.chi(assignment1)
        bits = 1
        for v in self.golden:
            age_bits = int_bits(self.weights[v].denominator.bit_length())
            bits = max(bits, int_bits(chi0[v]) + int_bits(chi1[v]) + age_bits)
        return bits


def _min_probability(config, gamma):
    """Smallest representable marking probability before a budget error."""
    max_beta = config.t_max // config.d_independence
    return Fraction(1, 1 << max(2, max_beta))


def _exchange_phase_headers(net, state, live):
    """Charge the ID / p / d exchange that opens every phase."""
    payloads = {}
    gamma = max(1, math.ceil(math.log2(max(2, state.g.n))))
    for v in live:
        outs = {}
        for u in state.live_neighbors(v):
            bits = gamma + int_bits(coin_denom_exp(state.p[v])) + 8
            outs[u] = ((v, state.p[v]), bits)
        if outs:
            payloads[v] = outs
    net.exchange_with_neighbors(payloads)


def _exchange_bits(net, state, live, values, label):
    """Charge a 1-bit exchange along all live edges (marks, join notices)."""
    payloads = {}
    for v in live:
        outs = {u: (values[v], 1) for u in state.live_neighbors(v)}
        if outs:
            payloads[v] = outs
    net.exchange_with_neighbors(payloads)


def _simulate_marks_phase(state, net, live, d, marks, min_p):
    _exchange_bits(net, state, live, marks, "marks")
    joined, removed = state.apply_marks(live, marks)
    join_notice = {v: 1 if state.status[v] == IN_MIS else 0 for v in live}
    _exchange_bits(net, state, live, join_notice, "joins")
    state.update_probabilities(d, min_p)
    return joined, removed


def _leader_collect_finish(state, net, leader=0):
    """Route the residual subgraph to the leader and solve it greedily."""
    residual = state.residual_edges()
    undecided = state.live_nodes()
    gamma = max(1, math.ceil(math.log2(max(2, state.g.n))))
    demands = [(v, leader, (("node", v), gamma)) for v in undecided]
    demands += [(u, leader, ((u, v), 2 * gamma)) for u, v in residual]
    # split into batches respecting the per-destination quota of n payloads
    for i in range(0, len(demands), state.g.n):
        net.lenzen_route(demands[i : i + state.g.n])
    # leader solves the residual subgraph locally, ascending-ID greedy
    blocked = set()
    joined = []
    adj = {v: set() for v in undecided}
    for u, v in residual:
        adj[u].add(v)
        adj[v].add(u)
    for v in sorted(undecided):
        if v not in blocked:
            joined.append(v)
            blocked.add(v)
            blocked.update(adj[v])
    payload_bits = max(1, len(joined) * gamma)
    net.broadcast_from_leader(leader, (tuple(joined), payload_bits))
    for v in undecided:
        state.status[v] = IN_MIS if v in set(joined) else REMOVED
    return len(residual)


def rand_mis_clique(g, rng_seed=0, config=None):
    """Randomized marks (full independence) plus leader-collection finish."""
    config = config or MisConfig()
    model = CostModel(ModelKind.CLIQUE, config.bandwidth_factor, config.route_rounds)
    net = Network(g, model)
    state = _MisState(g, config)
    rng = random.Random(rng_seed)
    budget = phase_budget(config, max(2, g.max_degree()))
    phases = 0
    for _ in range(budget):
        live = state.live_nodes()
        if not live:
            break
        phases += 1
        d = state.effective_degrees(live)
        _exchange_phase_headers(net, state, live)
        marks = {v: int(rng.random() < state.p[v]) for v in live}
        _simulate_marks_phase(state, net, live, d, marks, None)
    residual = _leader_collect_finish(state, net)
    info = {"phases": phases, "residual_edges_at_handoff": residual,
            "phase_budget": budget}
    return MisResult(state.mis_set(), net.metrics, info)


def _derandomized_phase(state, net, live, config, schedule="bitwise", block_size=1,
                        leader=0, evaluator_charges=False):
    """Classify, certify, derandomize the seed, and simulate one phase.

    Returns a certification record for the phase or None when nobody is live.
    """
    d = state.effective_degrees(live)
    _exchange_phase_headers(net, state, live)
    golden, windows = state.classify_all(live, d)
    params = state.family(live)
    est_core = PhaseEstimator(state, live, d, golden, windows, params)
    unconditioned = est_core.evaluate(SeedAssignment(params))
    wsum = est_core.weights_sum()
    cert = {
        "golden": len(golden),
        "unconditioned": unconditioned,
        "alpha_bound": ALPHA * wsum,
        "certified": unconditioned >= ALPHA * wsum,
    }
    state.bump_ages(golden)

    def on_step(step, before, values, chosen, width):
        if width == 1 and not evaluator_charges:
            bits = est_core.payload_bits(before.extend(0), before.extend(1))
            weighted = {v: est_core.weights[v] * est_core.chi(before.extend(0))[v]
                        for v in est_core.golden}
            if weighted:
                net.convergecast_sum(leader, weighted, payload_bits=bits)
            else:
                net.convergecast_sum(leader, {leader: Fraction(0)}, payload_bits=1)
            net.broadcast_from_leader(leader, (chosen, 1))
        else:
            # blockwise: golden nodes fan candidate values out to evaluator
            # nodes, evaluators aggregate to the leader, leader broadcasts
            fanout = {}
            for v in est_core.golden:
                outs = {}
                for c in range(1 << width):
                    chi_c = est_core.chi(before.extend(c, width))[v]
                    outs[c % state.g.n] = ((chi_c, state.age[v]),
                                           int_bits(chi_c) + 8)
                fanout[v] = outs
            if fanout:
                net.exchange_with_neighbors(fanout)
            aggregates = {c % state.g.n: (values[c], fraction_bits(values[c]))
                          for c in range(1 << width)}
            net.exchange_with_neighbors(
                {src: {leader: p} for src, p in aggregates.items()})
            net.broadcast_from_leader(leader, (chosen, width))

    est = derand.Estimator(direction=derand.MAXIMIZE, evaluate=est_core.evaluate)
    run = derand.run_to_completion(est, params, schedule=schedule,
                                   block_size=block_size, on_step=on_step)
    cert["final_value"] = run.final_value
    seed = run.seed.prefix
    marks = {v: est_core.cm.slice(run.seed)[0, est_core.cm.col[v]]
             for v in live}
    marks = {v: int(b) for v, b in marks.items()}
    min_p = _min_probability(config, params.gamma)
    joined, removed = _simulate_marks_phase(state, net, live, d, marks, min_p)
    cert["joined"] = len(joined)
    cert["removed"] = len(removed)
    cert["seed"] = seed
    return cert


def det_mis_clique(g, config=None, model_kind=ModelKind.CLIQUE):
    """Deterministic clique MIS: bitwise seed fixing, leader finish."""
    config = config or MisConfig()
    if model_kind not in (ModelKind.CLIQUE, ModelKind.BROADCAST_CLIQUE):
        raise ParameterError("det_mis_clique requires a clique model")
    model = CostModel(model_kind, config.bandwidth_factor, config.route_rounds)
    net = Network(g, model)
    state = _MisState(g, config)
    budget = phase_budget(config, max(2, g.max_degree()))
    certs = []
    for _ in range(budget):
        live = state.live_nodes()
        if not live:
            break
        certs.append(_derandomized_phase(state, net, live, config))
    residual = _leader_collect_finish(state, net)
    violations = []
    if residual > config.c_edge * g.n:
        violations.append(
            f"residual edges {residual} exceed {config.c_edge}*n = {config.c_edge * g.n}")
    info = {"phases": len(certs), "phase_budget": budget, "certs": certs,
            "residual_edges_at_handoff": residual, "bound_violations": violations}
    return MisResult(state.mis_set(), net.metrics, info)


def det_mis_bounded_delta(g, config=None):
    """Blockwise variant for Delta^3 <= c_delta * n (O(1) rounds per phase)."""
    config = config or MisConfig()
    delta = g.max_degree()
    if delta ** 3 > config.c_delta * g.n:
        raise ParameterError(
            f"degree gate failed: Delta^3 = {delta ** 3} > {config.c_delta}*n "
            f"= {config.c_delta * g.n}; use det_mis_clique")
    model = CostModel(ModelKind.CLIQUE, config.bandwidth_factor, config.route_rounds)
    net = Network(g, model)
    state = _MisState(g, config)
    # 2-neighborhood collection: every node learns its radius-2 topology
    demands = []
    for v in range(g.n):
        pairs = {(min(a, b), max(a, b))
                 for u in [v] + g.neighbors(v) for a, b in
                 ((u, w) for w in g.neighbors(u))}
        gamma = max(1, math.ceil(math.log2(max(2, g.n))))
        demands += [(e[0], v, (e, 2 * gamma)) for e in sorted(pairs)]
    for i in range(0, len(demands), g.n):
        net.lenzen_route(demands[i : i + g.n])
    z = max(1, int(math.log2(max(2, g.n))))
    budget = phase_budget(config, max(2, delta))
    certs = []
    for _ in range(budget):
        live = state.live_nodes()
        if not live:
            break
        certs.append(_derandomized_phase(state, net, live, config,
                                         schedule="blockwise", block_size=z,
                                         evaluator_charges=True))
    residual = _leader_collect_finish(state, net)
    violations = []
    if residual > config.c_edge * g.n:
        violations.append(
            f"residual edges {residual} exceed {config.c_edge}*n = {config.c_edge * g.n}")
    info = {"phases": len(certs), "phase_budget": budget, "certs": certs,
            "residual_edges_at_handoff": residual, "bound_violations": violations,
            "block_size": z}
    return MisResult(state.mis_set(), net.metrics, info)


def det_mis_congest(g, config=None):
    """CONGEST variant: per-component leaders, convergecast per seed bit,
    no leader-collection finish."""
    config = config or MisConfig()
    model = CostModel(ModelKind.CONGEST, config.bandwidth_factor, config.route_rounds)
    budget = phase_budget(config, g.n)
    from .sim import RunMetrics

    merged = RunMetrics()
    all_mis = set()
    comp_infos = []
    violations = []
    for comp in g.components():
        sub, back = _induced(g, comp)
        net = Network(sub, model)
        state = _MisState(sub, config)
        leader = 0  # smallest ID in the component after relabeling
        certs = []
        for _ in range(budget):
            live = state.live_nodes()
            if not live:
                break
            certs.append(_derandomized_phase(state, net, live, config, leader=leader))
        undecided = state.live_nodes()
        if undecided:
            violations.append(
                f"component {comp[0]}: {len(undecided)} nodes undecided after "
                f"{budget} phases")
        for v in state.mis_set().members:
            all_mis.add(back[v])
        merged.merge_parallel(net.metrics)
        comp_infos.append({"component": comp[0], "phases": len(certs),
                           "certs": certs})
    info = {"phase_budget": budget, "components": comp_infos,
            "bound_violations": violations}
    return MisResult(NodeSet(all_mis, g.n), merged, info)


def _induced(g, nodes):
    """Induced subgraph with relabeled IDs; returns (subgraph, back-map)."""
    fwd = {v: i for i, v in enumerate(nodes)}
    back = {i: v for v, i in fwd.items()}
    edges = [(fwd[u], fwd[v], w) for u, v, w in g.edges
             if u in fwd and v in fwd]
    return Graph(len(nodes), edges), back


def color_via_mis(g, config=None):
    """(Delta+1)-coloring via MIS on the clique blow-up graph."""
    config = config or MisConfig()
    delta = g.max_degree()
    c = delta + 1
    edges = []
    for v in range(g.n):
        base = v * c
        edges += [(base + i, base + j, Fraction(1))
                  for i in range(c) for j in range(i + 1, c)]
    for u, v, _ in g.edges:
        edges += [(u * c + j, v * c + j, Fraction(1)) for j in range(c)]
    blowup = Graph(g.n * c, edges)
    if blowup.max_degree() ** 3 <= config.c_delta * blowup.n:
        result = det_mis_bounded_delta(blowup, config)
    else:
        result = det_mis_clique(blowup, config)
    coloring = {}
    for x in result.mis.members:
        v, j = divmod(x, c)
        if v in coloring:
            raise BoundViolation(f"two MIS copies for node {v} in blow-up")
        coloring[v] = j
    if len(coloring) != g.n:
        missing = set(range(g.n)) - set(coloring)
        raise BoundViolation(f"no MIS copy for nodes {sorted(missing)}")
    return coloring, result
