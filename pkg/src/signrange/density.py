"""Sequence-space machinery: metric, index-set densities, coordinate
deletion, and a box-counting dimension estimator for prefix trees.

Sign words live in {-1, +1}^N with the metric d(x, y) = 2^-k, where k is
the first disagreement.  Deleting a sparse index set from the coordinates
is a Holder map, which is what transfers dimension bounds.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .series import DEFAULT_SEED, as_sign_tuple


@dataclass(frozen=True)
class IndexSet:
    """Either an explicit sorted set of positions or the arithmetic
    progression {k*q + offset : k >= 0}."""

    members: Optional[tuple[int, ...]] = None
    q: Optional[int] = None
    offset: int = 0

    def __post_init__(self):
        if (self.members is None) == (self.q is None):
            raise ValueError("exactly one of members / q must be given")
        if self.members is not None:
            if list(self.members) != sorted(set(self.members)):
                raise ValueError("explicit members must be sorted and distinct")
            if self.members and self.members[0] < 0:
                raise ValueError("members must be nonnegative")
        else:
            if self.q < 1 or not 0 <= self.offset < self.q:
                raise ValueError("need q >= 1 and 0 <= offset < q")

    @classmethod
    def explicit(cls, members) -> "IndexSet":
        return cls(members=tuple(sorted(set(int(m) for m in members))))

    @classmethod
    def arithmetic(cls, q: int, offset: int = 0) -> "IndexSet":
        return cls(q=int(q), offset=int(offset))

    def _first_member(self) -> int:
        # positions are 1-based, so the progression starts at offset or,
        # for offset 0, at q itself
        return self.offset if self.offset >= 1 else self.q

    def count_upto(self, k: int) -> int:
        """#(set intersect [0, k])."""
        if k < 0:
            return 0
        if self.members is not None:
            return bisect_right(self.members, k)
        first = self._first_member()
        if k < first:
            return 0
        return (k - first) // self.q + 1

    def contains(self, i: int) -> bool:
        if self.members is not None:
            pos = bisect_right(self.members, i)
            return pos > 0 and self.members[pos - 1] == i
        return i >= self._first_member() and (i - self.offset) % self.q == 0

    def positions_within(self, n: int) -> list[int]:
        """Members in [1, n]."""
        if self.members is not None:
            return [m for m in self.members if 1 <= m <= n]
        return list(range(self._first_member(), n + 1, self.q))


@dataclass(frozen=True)
class DensityReport:
    counts: tuple[tuple[int, float], ...]
    upper: float
    lower: float


def seq_metric(x, y) -> float:
    """2^-k with k the first disagreement (1-based); 0 when equal."""
    xs = as_sign_tuple(x)
    ys = as_sign_tuple(y)
    if len(xs) != len(ys):
        raise ValueError("words must have equal length")
    for k, (a, b) in enumerate(zip(xs, ys), start=1):
        if a != b:
            return 2.0 ** (-k)
    return 0.0


def density(index_set: IndexSet, horizon: int) -> DensityReport:
    """Counting ratios #(set intersect [0, k]) / k at geometric checkpoints
    k = ceil(horizon / 2^i).

    The upper/lower estimates take the extremes over the checkpoints in the
    top half of the range (k >= horizon/2); the smaller checkpoints are
    reported for trend inspection only, since their ratios still carry
    O(q/k) discretisation error.
    """
    if horizon < 10:
        raise ValueError("horizon must be at least 10")
    checkpoints = []
    i = 0
    while True:
        k = -(-horizon // (1 << i))
        if not checkpoints or k != checkpoints[-1]:
            checkpoints.append(k)
        if k == 1:
            break
        i += 1
    counts = tuple((k, index_set.count_upto(k) / k) for k in checkpoints)
    half = -(-horizon // 2)
    head = [ratio for k, ratio in counts if k >= half]
    return DensityReport(counts=counts, upper=max(head), lower=min(head))


def delete_indices(x, index_set: IndexSet) -> tuple[int, ...]:
    """The subword of x on the complement of the index set (1-based
    positions), order preserved."""
    xs = as_sign_tuple(x)
    drop = set(index_set.positions_within(len(xs)))
    return tuple(s for pos, s in enumerate(xs, start=1) if pos not in drop)


@dataclass(frozen=True)
class HolderReport:
    passed: bool
    deterministic: bool
    pivot: int
    worst_ratio: float
    worst_pair_k: Optional[int]


def holder_check(index_set: IndexSet, eps: float, samples: int, length: int,
                 seed: int = DEFAULT_SEED) -> HolderReport:
    """Verify d(h(x), h(y)) <= d(x, y)^(1-eps) for the deletion map h.

    Deleting m_k = #(set intersect [0, k-1]) coordinates before the first
    disagreement k shifts it to position >= k - m_k, so the exact statement
    2^(-k+m_k) <= 2^(-k(1-eps)) reduces to m_k <= eps*k; that is checked for
    every k (the deterministic part) and the metric inequality is then
    sampled on random pairs disagreeing first at a uniform k beyond the
    pivot (the first index after which m_k/k stays below eps).
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if length < 2 or samples < 1:
        raise ValueError("need length >= 2 and samples >= 1")
    upper = density(index_set, horizon=length).upper
    if upper >= eps:
        raise ValueError(f"density estimate {upper:.4g} is not below eps {eps:.4g}")

    m = [index_set.count_upto(k - 1) for k in range(1, length + 1)]
    deterministic = all(m[k - 1] <= eps * k for k in range(1, length + 1))
    pivot = 0
    for k in range(length, 0, -1):
        if m[k - 1] >= eps * k:
            pivot = k
            break

    rng = np.random.default_rng(seed)
    passed = True
    worst = 0.0
    worst_k: Optional[int] = None
    for _ in range(samples):
        k = int(rng.integers(pivot + 1, length + 1))
        x = rng.choice((-1, 1), size=length)
        y = x.copy()
        y[k - 1] = -x[k - 1]
        if k < length:
            y[k:] = rng.choice((-1, 1), size=length - k)
        d_xy = 2.0 ** (-k)
        d_h = seq_metric(delete_indices(x, index_set), delete_indices(y, index_set))
        bound = d_xy ** (1.0 - eps)
        ratio = d_h / bound if bound > 0 else math.inf
        if ratio > worst:
            worst, worst_k = ratio, k
        if d_h > bound:
            passed = False
    return HolderReport(passed=passed, deterministic=deterministic, pivot=pivot,
                        worst_ratio=worst, worst_pair_k=worst_k)


@dataclass(frozen=True)
class BoxDimResult:
    estimate: float
    counts: tuple[int, ...]
    emptied: bool


def box_dim_estimate(membership: Callable[[tuple[int, ...]], bool], depth: int) -> BoxDimResult:
    """Slope of log2(surviving prefixes) against prefix length.

    Grows the {-1,+1} prefix tree level by level, keeping prefixes the
    membership predicate accepts; the estimate is the least-squares slope
    over the last half of the depths, clamped into [0, 1].  If every prefix
    dies the estimate is 0 with the ``emptied`` flag set.
    """
    if depth < 2:
        raise ValueError("depth must be at least 2")
    survivors: list[tuple[int, ...]] = [()]
    counts: list[int] = []
    for _ in range(depth):
        nxt = []
        for prefix in survivors:
            for s in (1, -1):
                cand = prefix + (s,)
                if membership(cand):
                    nxt.append(cand)
        survivors = nxt
        counts.append(len(survivors))
        if not survivors:
            break
    if counts[-1] == 0:
        return BoxDimResult(estimate=0.0, counts=tuple(counts), emptied=True)

    ks = np.arange(1, len(counts) + 1, dtype=np.float64)
    logs = np.log2(np.asarray(counts, dtype=np.float64))
    tail = max(2, math.ceil(len(counts) / 2))
    slope = float(np.polyfit(ks[-tail:], logs[-tail:], 1)[0])
    return BoxDimResult(estimate=min(1.0, max(0.0, slope)),
                        counts=tuple(counts), emptied=False)


def ball_prefix_membership(win, center, radius: float) -> Callable[[tuple[int, ...]], bool]:
    """Feasible-tail pruning for the level set of a target ball: a prefix
    survives while ||S_k - c|| <= radius + remaining mass, a sound
    relaxation of reachability."""
    from .series import as_complex, max_norms

    values = win.values
    norms = max_norms(values)
    suffix = np.concatenate((np.cumsum(norms[::-1])[::-1], [0.0]))
    c = as_complex(center)

    def membership(prefix: tuple[int, ...]) -> bool:
        k = len(prefix)
        if k > values.size:
            return False
        s = complex(np.sum(np.asarray(prefix, dtype=np.float64) * values[:k]))
        slack = radius + suffix[k]
        return max(abs(s.real - c.real), abs(s.imag - c.imag)) <= slack

    return membership
