import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from derandcc.errors import ParameterError
from derandcc.graph import (Graph, NodeSet, SpannerEdges, check_mis,
                            check_spanner, dijkstra, dump, generate,
                            greedy_mis, load, shortest_dist)


def triangle():
    return Graph(3, [(0, 1, Fraction(1)), (1, 2, Fraction(2)), (0, 2, Fraction(4))])


def test_edges_canonicalized():
    g = Graph(3, [(2, 0, Fraction(4)), (1, 0, 1), (2, 1, Fraction(2))])
    assert g.edges == [(0, 1, Fraction(1)), (0, 2, Fraction(4)), (1, 2, Fraction(2))]
    assert g.neighbors(1) == [0, 2]
    assert g.max_degree() == 2


@pytest.mark.parametrize("edges,msg", [
    ([(0, 0, 1)], "self-loop"),
    ([(0, 1, 1), (1, 0, 2)], "parallel"),
    ([(0, 5, 1)], "outside"),
    ([(0, 1, 0)], "non-positive"),
    ([(0, 1, -2)], "non-positive"),
])
def test_validation_errors(edges, msg):
    with pytest.raises(ParameterError, match=msg):
        Graph(3, edges)


def test_components_and_diameter():
    g = Graph(5, [(0, 1, 1), (1, 2, 1), (3, 4, 1)])
    assert g.components() == [[0, 1, 2], [3, 4]]
    assert g.diameter() == 2
    assert Graph(3, []).diameter() == 0


def test_bfs_levels_restricted():
    g = Graph(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)])
    levels = g.bfs_levels(0, allowed={0, 1, 2})
    assert levels == {0: 0, 1: 1, 2: 2}


def test_generators_deterministic():
    a = generate("gnp", 20, {"p": 0.4}, rng_seed=7)
    b = generate("gnp", 20, {"p": 0.4}, rng_seed=7)
    assert a.edges == b.edges
    assert generate("clique", 5).m == 10
    grid = generate("grid", 6, {"rows": 2, "cols": 3})
    assert grid.m == 7
    reg = generate("random_regular", 10, {"degree": 3}, rng_seed=1)
    assert all(len(reg.neighbors(v)) == 3 for v in range(10))
    weighted = generate("weighted_gnp", 20, {"p": 0.5}, rng_seed=2)
    assert all(isinstance(w, Fraction) and w > 0 for _, _, w in weighted.edges)


def test_generator_errors():
    with pytest.raises(ParameterError):
        generate("gnp", 5, {})
    with pytest.raises(ParameterError):
        generate("random_regular", 5, {"degree": 3})
    with pytest.raises(ParameterError):
        generate("nope", 5)


def test_load_dump_roundtrip(tmp_path):
    g = generate("weighted_gnp", 12, {"p": 0.5}, rng_seed=3)
    path = tmp_path / "g.txt"
    dump(g, path)
    h = load(path)
    assert h.n == g.n and h.edges == g.edges


def test_shortest_dist_exact():
    g = triangle()
    assert shortest_dist(g, None, 0, 2) == Fraction(3)
    restricted = SpannerEdges({(0, 1)})
    assert shortest_dist(g, restricted, 0, 2) == math.inf
    assert shortest_dist(g, None, 1, 1) == 0


def test_dijkstra_matches_networkx():
    import networkx as nx

    g = generate("weighted_gnp", 24, {"p": 0.3}, rng_seed=9)
    nxg = nx.Graph()
    nxg.add_nodes_from(range(g.n))
    for u, v, w in g.edges:
        nxg.add_edge(u, v, weight=w)
    mine = dijkstra(g, 0)
    theirs = nx.single_source_dijkstra_path_length(nxg, 0)
    assert mine == {v: Fraction(d) for v, d in theirs.items()}


def test_check_mis_verdicts():
    path = Graph(3, [(0, 1, 1), (1, 2, 1)])
    assert check_mis(path, NodeSet({0}, 3)).status == "not_maximal"
    assert check_mis(path, NodeSet({0}, 3)).witness == 2
    assert check_mis(path, NodeSet({0, 1}, 3)).status == "not_independent"
    assert check_mis(path, NodeSet({0, 2}, 3)).valid
    assert check_mis(triangle(), NodeSet({1}, 3)).valid
    # isolated node must be included
    g2 = Graph(2, [])
    assert check_mis(g2, NodeSet({0}, 2)).status == "not_maximal"


def test_check_spanner_verdicts():
    g = triangle()
    full = SpannerEdges({(0, 1), (1, 2), (0, 2)})
    chk = check_spanner(g, full, 1)
    assert chk.valid and chk.max_stretch == 1
    # drop the heavy edge: path 0-1-2 has weight 3 <= 3*4 for k=2, and edges
    # kept in the spanner pin the max stretch at 1
    sub = SpannerEdges({(0, 1), (1, 2)})
    chk2 = check_spanner(g, sub, 2)
    assert chk2.valid and chk2.max_stretch == 1
    # dropping an edge whose detour weighs more than the k=1 bound fails
    g3 = Graph(3, [(0, 1, 1), (1, 2, 2), (0, 2, 2)])
    chk3 = check_spanner(g3, sub, 1)
    assert not chk3.valid and chk3.witness == (0, 2)
    assert chk3.max_stretch == Fraction(3, 2)
    with pytest.raises(ParameterError):
        check_spanner(g, SpannerEdges({(0, 1), (1, 0)}), 0)
    with pytest.raises(ParameterError, match="not in graph"):
        check_spanner(Graph(3, [(0, 1, 1)]), SpannerEdges({(1, 2)}), 2)


def test_greedy_mis_valid():
    for seed in range(5):
        g = generate("gnp", 20, {"p": 0.4}, rng_seed=seed)
        assert check_mis(g, greedy_mis(g)).valid


@st.composite
def random_graphs(draw):
    n = draw(st.integers(2, 12))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs)))
    edges = [(u, v, Fraction(draw(st.integers(1, 9)), draw(st.integers(1, 4))))
             for u, v in chosen]
    return Graph(n, edges)


@settings(max_examples=40, deadline=None)
@given(random_graphs())
def test_dijkstra_symmetry_and_triangle(g):
    dists = {s: dijkstra(g, s) for s in range(g.n)}
    for u in range(g.n):
        for v in range(g.n):
            duv = dists[u].get(v, math.inf)
            assert duv == dists[v].get(u, math.inf)
            for w in range(g.n):
                dw = dists[u].get(w, math.inf)
                step = dists[w].get(v, math.inf)
                if dw is not math.inf and step is not math.inf:
                    assert duv <= dw + step


@settings(max_examples=30, deadline=None)
@given(random_graphs())
def test_full_graph_is_spanner_of_itself(g):
    h = SpannerEdges({(u, v) for u, v, _ in g.edges})
    assert check_spanner(g, h, 1).valid
