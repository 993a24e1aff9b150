"""Weighted undirected graphs, deterministic generators, and verifiers.

Weights are exact rationals so that stretch checks need no floating
tolerance.  Node IDs are always 0..n-1 and edges are stored canonically
with u < v.
"""

from __future__ import annotations

import heapq
import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ParameterError

INF = Fraction(-1)  # sentinel never returned; use math.inf externally


@dataclass
class Graph:
    n: int
    edges: list  # list of (u, v, Fraction) with u < v
    _adj: dict = field(default=None, repr=False, compare=False)
    _diameter: int = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        seen = set()
        canon = []
        for u, v, w in self.edges:
            if u == v:
                raise ParameterError(f"self-loop at node {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ParameterError(f"edge ({u},{v}) outside node range")
            if u > v:
                u, v = v, u
            if (u, v) in seen:
                raise ParameterError(f"parallel edge ({u},{v})")
            w = Fraction(w)
            if w <= 0:
                raise ParameterError(f"non-positive weight on edge ({u},{v})")
            seen.add((u, v))
            canon.append((u, v, w))
        canon.sort()
        self.edges = canon
        self._adj = {u: [] for u in range(self.n)}
        for u, v, w in canon:
            self._adj[u].append((v, w))
            self._adj[v].append((u, w))
        for u in self._adj:
            self._adj[u].sort()

    @property
    def m(self):
        return len(self.edges)

    def neighbors(self, u):
        return [v for v, _ in self._adj[u]]

    def adj(self, u):
        return self._adj[u]

    def max_degree(self):
        if self.n == 0:
            return 0
        return max(len(self._adj[u]) for u in range(self.n))

    def components(self):
        """Connected components as sorted lists of node IDs."""
        seen = set()
        comps = []
        for s in range(self.n):
            if s in seen:
                continue
            comp = [s]
            seen.add(s)
            queue = [s]
            while queue:
                u = queue.pop()
                for v, _ in self._adj[u]:
                    if v not in seen:
                        seen.add(v)
                        comp.append(v)
                        queue.append(v)
            comps.append(sorted(comp))
        return comps

    def bfs_levels(self, root, allowed=None):
        """Hop distance from root; unreachable nodes are absent."""
        dist = {root: 0}
        frontier = [root]
        while frontier:
            nxt = []
            for u in frontier:
                for v, _ in self._adj[u]:
                    if v not in dist and (allowed is None or v in allowed):
                        dist[v] = dist[u] + 1
                        nxt.append(v)
            frontier = nxt
        return dist

    def diameter(self):
        """Max hop eccentricity within a component, maximised over components.

        Cached; 0 for the empty/edgeless graph.
        """
        if self._diameter is None:
            d = 0
            for u in range(self.n):
                levels = self.bfs_levels(u)
                d = max(d, max(levels.values()))
            self._diameter = d
        return self._diameter


@dataclass
class NodeSet:
    members: set
    universe: int

    def __post_init__(self):
        self.members = set(self.members)
        if any(not (0 <= v < self.universe) for v in self.members):
            raise ParameterError("node set member outside universe")

    def sorted(self):
        return sorted(self.members)


@dataclass
class SpannerEdges:
    edges: set  # set of (u, v) with u < v

    def __post_init__(self):
        self.edges = {(min(u, v), max(u, v)) for u, v in self.edges}

    def sorted(self):
        return sorted(self.edges)


# ---------------------------------------------------------------------------
# generators

def generate(kind, n, params=None, rng_seed=0):
    """Deterministic graph generator.

    kinds: gnp(p), grid(rows, cols), clique, random_regular(degree),
    weighted_gnp(p).  Identical arguments always produce identical graphs.
    """
    params = dict(params or {})
    if n < 1:
        raise ParameterError("n must be >= 1")
    rng = random.Random(rng_seed)
    if kind == "clique":
        edges = [(u, v, Fraction(1)) for u, v in itertools.combinations(range(n), 2)]
    elif kind in ("gnp", "weighted_gnp"):
        p = params.get("p")
        if p is None or not 0 <= p <= 1:
            raise ParameterError("gnp requires p in [0,1]")
        edges = []
        for u, v in itertools.combinations(range(n), 2):
            if rng.random() < p:
                if kind == "weighted_gnp":
                    w = Fraction(rng.randint(1, 64), rng.randint(1, 8))
                else:
                    w = Fraction(1)
                edges.append((u, v, w))
    elif kind == "grid":
        rows = params.get("rows")
        cols = params.get("cols")
        if rows is None or cols is None:
            rows = int(math.isqrt(n))
            while rows > 1 and n % rows:
                rows -= 1
            cols = n // rows
        if rows * cols != n:
            raise ParameterError(f"grid {rows}x{cols} does not have {n} nodes")
        edges = []
        for r in range(rows):
            for c in range(cols):
                u = r * cols + c
                if c + 1 < cols:
                    edges.append((u, u + 1, Fraction(1)))
                if r + 1 < rows:
                    edges.append((u, u + cols, Fraction(1)))
    elif kind == "random_regular":
        d = params.get("degree")
        if d is None or d < 0 or d >= n or (n * d) % 2:
            raise ParameterError(f"infeasible random_regular parameters n={n} degree={d}")
        if d == 0:
            edges = []
        else:
            import networkx as nx

            g = nx.random_regular_graph(d, n, seed=rng_seed)
            edges = [(u, v, Fraction(1)) for u, v in g.edges()]
    else:
        raise ParameterError(f"unknown generator kind {kind!r}")
    return Graph(n, edges)


def load(path):
    """Read a graph file: first line "n m", then m lines "u v w"."""
    with open(path) as fh:
        tokens = fh.read().split("\n")
    lines = [ln for ln in tokens if ln.strip() and not ln.startswith("#")]
    n, m = map(int, lines[0].split())
    edges = []
    for ln in lines[1 : 1 + m]:
        parts = ln.split()
        u, v = int(parts[0]), int(parts[1])
        w = Fraction(parts[2]) if len(parts) > 2 else Fraction(1)
        edges.append((u, v, w))
    return Graph(n, edges)


def dump(g, path):
    with open(path, "w") as fh:
        fh.write(f"{g.n} {g.m}\n")
        for u, v, w in g.edges:
            fh.write(f"{u} {v} {w}\n")


# ---------------------------------------------------------------------------
# shortest paths and verifiers

def shortest_dist(g, restrict, u, v):
    """Exact weighted shortest-path distance; math.inf iff disconnected.

    restrict: SpannerEdges limiting the usable edges, or None for all.
    """
    if not (0 <= u < g.n and 0 <= v < g.n):
        raise ParameterError("node id out of range")
    dists = dijkstra(g, u, restrict)
    return dists.get(v, math.inf)


def dijkstra(g, source, restrict=None):
    allowed = restrict.edges if restrict is not None else None
    dist = {source: Fraction(0)}
    done = set()
    heap = [(Fraction(0), source)]
    while heap:
        d, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        for y, w in g.adj(x):
            if allowed is not None and (min(x, y), max(x, y)) not in allowed:
                continue
            nd = d + w
            if y not in dist or nd < dist[y]:
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    return dist


@dataclass
class MisCheck:
    status: str  # valid | not_independent | not_maximal
    witness: object = None

    @property
    def valid(self):
        return self.status == "valid"


def check_mis(g, s):
    members = s.members if isinstance(s, NodeSet) else set(s)
    for u, v, _ in g.edges:
        if u in members and v in members:
            return MisCheck("not_independent", (u, v))
    for v in range(g.n):
        if v in members:
            continue
        if not any(u in members for u in g.neighbors(v)):
            return MisCheck("not_maximal", v)
    return MisCheck("valid")


@dataclass
class SpannerCheck:
    status: str  # valid | violated
    max_stretch: Fraction = None
    witness: object = None

    @property
    def valid(self):
        return self.status == "valid"


def check_spanner(g, h, k):
    """Check dist_h(u,v) <= (2k-1)*w for every edge (u,v,w) of g."""
    if k < 1:
        raise ParameterError("k must be >= 1")
    for u, v in h.edges:
        if not any(a == u and b == v for a, b, _ in g.edges):
            raise ParameterError(f"spanner edge ({u},{v}) not in graph")
    bound = 2 * k - 1
    max_stretch = Fraction(0) if g.m else Fraction(1)
    by_source = {}
    for u, v, w in g.edges:
        if u not in by_source:
            by_source[u] = dijkstra(g, u, h)
        d = by_source[u].get(v, math.inf)
        if d is math.inf or d > bound * w:
            stretch = math.inf if d is math.inf else d / w
            return SpannerCheck("violated", witness=(u, v), max_stretch=stretch)
        max_stretch = max(max_stretch, d / w)
    if g.m:
        max_stretch = max(max_stretch, Fraction(1))
    return SpannerCheck("valid", max_stretch=max_stretch)


def greedy_mis(g, order=None):
    """Reference greedy MIS oracle: take nodes in order, skip dominated ones."""
    order = range(g.n) if order is None else order
    members = set()
    blocked = set()
    for v in order:
        if v not in blocked:
            members.add(v)
            blocked.add(v)
            blocked.update(g.neighbors(v))
    return NodeSet(members, g.n)
