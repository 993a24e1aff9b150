"""Synchronous round simulation with per-model bandwidth accounting.

Every primitive delivers its payloads "simultaneously" and charges rounds
according to the cost model.  Payloads are (value, bits) pairs; a payload
larger than the bandwidth B is charged ceil(bits/B) rounds instead of
being rejected, and the extra rounds are recorded as oversized charges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .errors import ModelViolationError, ParameterError, QuotaError


class ModelKind(Enum):
    LOCAL = "LOCAL"
    CONGEST = "CONGEST"
    CLIQUE = "CLIQUE"
    BROADCAST_CLIQUE = "BROADCAST_CLIQUE"


@dataclass
class CostModel:
    kind: ModelKind
    bandwidth_factor: int = 8  # c_B; B = c_B * ceil(log2 n)
    route_rounds: int = 2  # constant cost of one Lenzen routing invocation

    def bandwidth(self, n):
        return self.bandwidth_factor * max(1, math.ceil(math.log2(max(2, n))))


@dataclass
class RunMetrics:
    rounds: int = 0
    messages: int = 0
    max_message_bits: int = 0
    oversized_charges: int = 0

    def to_dict(self):
        return {
            "rounds": self.rounds,
            "messages": self.messages,
            "max_message_bits": self.max_message_bits,
            "oversized_charges": self.oversized_charges,
        }

    def merge_parallel(self, other):
        """Combine metrics of components executing in parallel."""
        self.rounds = max(self.rounds, other.rounds)
        self.messages += other.messages
        self.max_message_bits = max(self.max_message_bits, other.max_message_bits)
        self.oversized_charges += other.oversized_charges


def int_bits(x):
    """Bits to encode a (possibly negative) integer."""
    return abs(int(x)).bit_length() + 1


def fraction_bits(x):
    x = Fraction(x)
    return int_bits(x.numerator) + int_bits(x.denominator)


def payload_of(value):
    """Wrap a value with its encoded size in bits."""
    if isinstance(value, tuple) and len(value) == 2 and isinstance(value[1], int):
        return value
    if isinstance(value, Fraction):
        return (value, fraction_bits(value))
    if isinstance(value, int):
        return (value, int_bits(value))
    raise ParameterError(f"cannot size payload of type {type(value)}")


class Network:
    """Execution context binding a graph to a cost model and metrics."""

    def __init__(self, g, model):
        self.g = g
        self.model = model
        self.metrics = RunMetrics()
        self.B = model.bandwidth(g.n)
        self._trees = {}

    # -- accounting helpers -------------------------------------------------

    def _charge(self, bits, messages, depth=1):
        """Charge one logical exchange of `messages` payloads whose largest
        payload is `bits` bits, over `depth` synchronous hops."""
        if messages == 0:
            return
        self.metrics.messages += messages
        self.metrics.max_message_bits = max(self.metrics.max_message_bits, bits)
        per_hop = max(1, -(-bits // self.B))
        self.metrics.rounds += per_hop * depth
        if per_hop > 1:
            self.metrics.oversized_charges += (per_hop - 1) * depth

    # -- BFS trees -----------------------------------------------------------

    def bfs_tree(self, leader):
        """Parent map and depth of the BFS tree rooted at leader.

        Parent ties broken toward the smallest ID; built once per leader.
        """
        if leader not in self._trees:
            levels = self.g.bfs_levels(leader)
            parent = {leader: None}
            for v, lv in levels.items():
                if v == leader:
                    continue
                parent[v] = min(u for u in self.g.neighbors(v) if levels.get(u) == lv - 1)
            depth = max(levels.values()) if levels else 0
            self._trees[leader] = (parent, depth)
        return self._trees[leader]

    # -- primitives ----------------------------------------------------------

    def exchange_with_neighbors(self, payloads):
        """payloads: {src: {dst: payload}}.  Returns {dst: {src: value}}.

        CONGEST restricts (src, dst) to graph edges; CLIQUE allows any
        ordered pair; BROADCAST_CLIQUE requires each sender's payloads to be
        identical across recipients.
        """
        kind = self.model.kind
        delivered = {}
        max_bits = 0
        count = 0
        for src, outs in payloads.items():
            if kind is ModelKind.BROADCAST_CLIQUE and outs:
                vals = {payload_of(p) for p in outs.values()}
                if len(vals) > 1:
                    raise ModelViolationError(
                        f"node {src} sends non-identical payloads in broadcast clique")
            for dst, p in outs.items():
                if kind is ModelKind.CONGEST and dst not in self.g.neighbors(src):
                    raise ModelViolationError(
                        f"CONGEST payload from {src} to non-neighbor {dst}")
                value, bits = payload_of(p)
                delivered.setdefault(dst, {})[src] = value
                max_bits = max(max_bits, bits)
                count += 1
        if kind is ModelKind.LOCAL and count:
            self.metrics.messages += count
            self.metrics.rounds += 1
        else:
            self._charge(max_bits, count)
        return delivered

    def convergecast_sum(self, leader, values, payload_bits=None):
        """Aggregate exact rationals to `leader` along its BFS tree.

        Returns the exact sum.  CONGEST charges depth * ceil(bits/B) rounds;
        clique models charge a single direct round.  `payload_bits` may
        override the accounted per-message size (e.g. when the same exchange
        carries several counters).
        """
        if self.model.kind in (ModelKind.CONGEST, ModelKind.LOCAL):
            parent, depth = self.bfs_tree(leader)
            for v in values:
                if v != leader and v not in parent:
                    raise ModelViolationError(
                        f"contributor {v} disconnected from leader {leader}")
        else:
            depth = 1
        total = sum((Fraction(x) for x in values.values()), Fraction(0))
        bits = payload_bits
        if bits is None:
            bits = max((fraction_bits(x) for x in values.values()), default=1)
        n_msgs = sum(1 for v in values if v != leader)
        if self.model.kind is ModelKind.CONGEST:
            self._charge(bits, max(1, n_msgs), depth=max(1, depth))
        elif self.model.kind is ModelKind.LOCAL:
            self.metrics.rounds += max(1, depth)
            self.metrics.messages += n_msgs
        else:
            self._charge(bits, max(1, n_msgs), depth=1)
        return total

    def broadcast_from_leader(self, leader, payload):
        """Deliver payload to every node reachable from leader."""
        value, bits = payload_of(payload)
        n_msgs = max(1, self.g.n - 1)
        if self.model.kind is ModelKind.CONGEST:
            _, depth = self.bfs_tree(leader)
            self._charge(bits, n_msgs, depth=max(1, depth))
        elif self.model.kind is ModelKind.LOCAL:
            _, depth = self.bfs_tree(leader)
            self.metrics.rounds += max(1, depth)
            self.metrics.messages += n_msgs
        else:
            self._charge(bits, n_msgs, depth=1)
        return value

    def lenzen_route(self, demands):
        """Constant-round all-to-all routing oracle (clique only).

        demands: list of (src, dst, payload).  Each node may source and sink
        at most n payloads, each at most B bits; violations raise QuotaError.
        """
        if self.model.kind not in (ModelKind.CLIQUE, ModelKind.BROADCAST_CLIQUE):
            raise ModelViolationError("Lenzen routing requires a clique model")
        if not demands:
            return {}
        sent = {}
        recv = {}
        delivered = {}
        for src, dst, p in demands:
            value, bits = payload_of(p)
            if bits > self.B:
                raise ParameterError(
                    f"Lenzen payload of {bits} bits exceeds bandwidth {self.B}")
            sent[src] = sent.get(src, 0) + 1
            recv[dst] = recv.get(dst, 0) + 1
            if sent[src] > self.g.n:
                raise QuotaError(src, f"node {src} exceeds send quota {self.g.n}")
            if recv[dst] > self.g.n:
                raise QuotaError(dst, f"node {dst} exceeds receive quota {self.g.n}")
            delivered.setdefault(dst, []).append((src, value))
            self.metrics.messages += 1
            self.metrics.max_message_bits = max(self.metrics.max_message_bits, bits)
        self.metrics.rounds += self.model.route_rounds
        return delivered
