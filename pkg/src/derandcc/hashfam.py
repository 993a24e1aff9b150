"""d-wise independent hash families over GF(2^m) and exact seed counting.

A family member is a degree-(d-1) polynomial over GF(2^m) with
m = max(gamma, beta); the seed packs the d coefficients coefficient-major,
low bit first, for a total of t = d*m bits.  Hash output is the low beta
bits of the polynomial evaluated at the (zero-padded) input.  Biased coins
with probability 2^-j are derived by thresholding the hash value.

Conditional counting enumerates the seeds consistent with a fixed prefix
of seed bits; because the prefix fixes the *low* bits, the consistent set
is an arithmetic progression and maps to a strided slice of any per-seed
table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BudgetError, ParameterError

# Lowest-valued irreducible polynomial of each degree, including the x^m
# term.  Fixed table so hash values are reproducible across platforms.
IRREDUCIBLE = {
    1: 0x3, 2: 0x7, 3: 0xB, 4: 0x13, 5: 0x25, 6: 0x43, 7: 0x83, 8: 0x11B,
    9: 0x203, 10: 0x409, 11: 0x805, 12: 0x1009, 13: 0x201B, 14: 0x4021,
    15: 0x8003, 16: 0x1002B, 17: 0x20009, 18: 0x40009, 19: 0x80027,
    20: 0x100009, 21: 0x200005, 22: 0x400003, 23: 0x800021, 24: 0x100001B,
    25: 0x2000009, 26: 0x400001B, 27: 0x8000027, 28: 0x10000003,
    29: 0x20000005, 30: 0x40000003, 31: 0x80000009, 32: 0x10000008D,
}

DEFAULT_T_MAX = 26
# cache a coin table only while (#seeds * #nodes) stays below this many bits
DEFAULT_MATRIX_CAP_BITS = 2 ** 28


def field_mul(a, b, m):
    """Product in GF(2^m) reduced by the built-in polynomial for m."""
    if m not in IRREDUCIBLE:
        raise ParameterError(f"unsupported field bit-length m={m}")
    poly = IRREDUCIBLE[m]
    mask = 1 << m
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & mask:
            a ^= poly
    return r


_LOG_TABLES = {}


def _log_tables(m):
    """Discrete log/antilog tables for vectorised multiplication (m <= 16)."""
    if m not in _LOG_TABLES:
        if m > 16:
            raise ParameterError(f"vectorised field ops support m <= 16, got {m}")
        size = 1 << m
        # the modulus need not be primitive, so hunt for a generator
        for g in range(2, size):
            seen = set()
            x = 1
            for _ in range(size - 1):
                seen.add(x)
                x = field_mul(x, g, m)
            if len(seen) == size - 1:
                break
        else:
            raise ParameterError(f"no multiplicative generator found for m={m}")
        exp = np.zeros(2 * size, dtype=np.int64)
        log = np.zeros(size, dtype=np.int64)
        x = 1
        for i in range(size - 1):
            exp[i] = x
            log[x] = i
            x = field_mul(x, g, m)
        exp[size - 1 : 2 * size - 2] = exp[: size - 1]
        _LOG_TABLES[m] = (exp, log)
    return _LOG_TABLES[m]


def field_mul_vec(a, b_scalar, m):
    """Elementwise GF(2^m) product of array `a` with scalar `b_scalar`."""
    if b_scalar == 0:
        return np.zeros_like(a)
    if m == 1:
        return a * b_scalar
    exp, log = _log_tables(m)
    out = np.zeros_like(a)
    nz = a != 0
    out[nz] = exp[log[a[nz]] + log[b_scalar]]
    return out


@dataclass(frozen=True)
class FamilyParams:
    gamma: int  # input bit-length
    beta: int  # output bit-length
    d: int  # independence parameter
    t_max: int = DEFAULT_T_MAX

    def __post_init__(self):
        if self.gamma < 1 or self.beta < 1 or self.d < 1:
            raise ParameterError("gamma, beta, d must be >= 1")
        if self.beta > self.m:
            raise ParameterError("beta must not exceed the field bit-length")
        if self.m not in IRREDUCIBLE:
            raise ParameterError(f"field bit-length {self.m} unsupported")

    @property
    def m(self):
        return max(self.gamma, self.beta)

    @property
    def t(self):
        return self.d * self.m

    def coefficients(self, seed):
        mask = (1 << self.m) - 1
        return [(seed >> (j * self.m)) & mask for j in range(self.d)]


def eval_hash(params, seed, x):
    """Evaluate the family member selected by `seed` at input `x`."""
    if not 0 <= seed < (1 << params.t):
        raise ParameterError("seed out of range for family")
    if not 0 <= x < (1 << params.gamma):
        raise ParameterError("input out of range for family")
    m = params.m
    coeffs = params.coefficients(seed)
    acc = 0
    for c in reversed(coeffs):
        acc = field_mul(acc, x, m) ^ c
    return acc & ((1 << params.beta) - 1)


def eval_hash_many(params, seeds, x):
    """Vectorised eval_hash over an int64 array of seeds."""
    m = params.m
    mask = (1 << m) - 1
    acc = np.zeros_like(seeds)
    for j in reversed(range(params.d)):
        coeff = (seeds >> (j * m)) & mask
        acc = field_mul_vec(acc, x, m) ^ coeff
    return acc & ((1 << params.beta) - 1)


def coin_exponent(params, p):
    p = Fraction(p)
    if p.numerator != 1 or p.denominator & (p.denominator - 1):
        raise ParameterError(f"probability {p} is not a power of two")
    j = p.denominator.bit_length() - 1
    if not 1 <= j <= params.beta:
        raise ParameterError(f"probability 2^-{j} outside family range beta={params.beta}")
    return j


def coin(params, seed, node_id, p):
    """Biased coin: 1 iff the hash of node_id lands below 2^(beta-j)."""
    j = coin_exponent(params, p)
    return int(eval_hash(params, seed, node_id) < (1 << (params.beta - j)))


@dataclass(frozen=True)
class SeedAssignment:
    """A prefix assignment Y_i = (y_1=b_1, ..., y_i=b_i) of seed bits.

    Bit y_1 is the lowest bit of the seed integer, so the consistent seeds
    are exactly {prefix + f * 2^i : 0 <= f < 2^(t-i)}.
    """

    params: FamilyParams
    prefix: int = 0
    length: int = 0

    def __post_init__(self):
        if not 0 <= self.length <= self.params.t:
            raise ParameterError("assignment length out of range")
        if not 0 <= self.prefix < (1 << self.length if self.length else 1):
            raise ParameterError("prefix wider than assignment length")

    @property
    def complete(self):
        return self.length == self.params.t

    @property
    def free_bits(self):
        return self.params.t - self.length

    def extend(self, bits, width=1):
        if self.length + width > self.params.t:
            raise ParameterError("extension exceeds seed length")
        if not 0 <= bits < (1 << width):
            raise ParameterError("extension value wider than block")
        return SeedAssignment(self.params, self.prefix | (bits << self.length),
                              self.length + width)

    def consistent_seeds(self):
        """Numpy array of all seeds agreeing with this prefix."""
        if self.free_bits > self.params.t_max:
            raise BudgetError(
                f"{self.free_bits} free seed bits exceed budget {self.params.t_max}")
        return (np.arange(1 << self.free_bits, dtype=np.int64) << self.length) | self.prefix

    def to_hex(self):
        return f"{self.prefix:0{max(1, -(-self.length // 4))}x}:{self.length}"


def conditional_count(assignment, predicate):
    """Exact (numerator, denominator) of seeds satisfying `predicate`.

    The denominator is 2^(t-i), the number of seeds consistent with the
    assignment.  Satisfies numerator(Y_i) = numerator(Y_i,0) + numerator(Y_i,1).
    """
    seeds = assignment.consistent_seeds()
    num = sum(1 for s in seeds.tolist() if predicate(s))
    return num, 1 << assignment.free_bits


class CoinMatrix:
    """Per-seed coin bits for a set of (node_id, probability) pairs.

    Row order follows the full seed space 0..2^t-1, so the rows consistent
    with a SeedAssignment form the strided slice [prefix::2^length].  Falls
    back to on-the-fly slice evaluation if the table would exceed the cap.
    """

    def __init__(self, params, node_probs, cap_bits=DEFAULT_MATRIX_CAP_BITS):
        self.params = params
        self.ids = sorted(node_probs)
        self.col = {v: i for i, v in enumerate(self.ids)}
        self.thresholds = {
            v: 1 << (params.beta - coin_exponent(params, p))
            for v, p in node_probs.items()
        }
        n_entries = (1 << params.t) * max(1, len(self.ids))
        self.cached = n_entries <= cap_bits
        if params.t > params.t_max:
            raise BudgetError(
                f"seed length {params.t} exceeds enumeration budget {params.t_max}")
        if self.cached:
            self._table = self._build(np.arange(1 << params.t, dtype=np.int64))
        else:
            self._table = None

    def _build(self, seeds):
        out = np.empty((seeds.shape[0], len(self.ids)), dtype=np.uint8)
        for v in self.ids:
            h = eval_hash_many(self.params, seeds, v)
            out[:, self.col[v]] = h < self.thresholds[v]
        return out

    def slice(self, assignment):
        """Coin bits (S x nodes) for all seeds consistent with `assignment`."""
        if self._table is not None:
            return self._table[assignment.prefix :: 1 << assignment.length]
        return self._build(assignment.consistent_seeds())

    def count_one(self, assignment, v):
        """Numerator of Pr[coin(v)=1 | assignment]."""
        return int(self.slice(assignment)[:, self.col[v]].sum())
