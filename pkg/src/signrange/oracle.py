"""Exhaustive ground truth at small N.

Enumerates every sign word to recover the exact finite range, the optimal
prefix discrepancy, linear-transform equivariance, and epsilon-net density
certificates.  Everything here is the slow-but-sure side against which the
constructive algorithms are checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from .series import SequenceWindow

MAX_RANGE_TERMS = 26
MAX_DISCREPANCY_TERMS = 22
DEDUP_TOL = 1e-12
SET_EQUALITY_TOL = 1e-9
SINGULARITY_TOL = 1e-9


@dataclass(frozen=True)
class Rect:
    """Closed axis-aligned rectangle [x0, x1] x [y0, y1] (may be degenerate)."""

    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x0 <= self.x1 and self.y0 <= self.y1):
            raise ValueError("rectangle corners out of order")

    @classmethod
    def from_corners(cls, lo: complex, hi: complex) -> "Rect":
        return cls(min(lo.real, hi.real), max(lo.real, hi.real),
                   min(lo.imag, hi.imag), max(lo.imag, hi.imag))

    @classmethod
    def centered_square(cls, half_side: float, center: complex = 0j) -> "Rect":
        return cls(center.real - half_side, center.real + half_side,
                   center.imag - half_side, center.imag + half_side)

    def contains(self, z: complex) -> bool:
        return self.x0 <= z.real <= self.x1 and self.y0 <= z.imag <= self.y1


@dataclass(frozen=True)
class RangeSet:
    """The deduplicated finite range {sum x_n c_n : x in {-1,1}^N}."""

    points: np.ndarray
    source_length: int

    def __len__(self) -> int:
        return int(self.points.size)


@dataclass(frozen=True)
class CoverageReport:
    window: Rect
    epsilon: float
    covered_fraction: float
    worst_gap: float
    cells: int


class DiscrepancyResult(NamedTuple):
    value: float
    signs: tuple[int, ...]


def _signs_for_index(index: int, n: int) -> tuple[int, ...]:
    # bit 0 of the most significant position encodes +1; counting up walks
    # sign words in lexicographic order with +1 before -1
    return tuple(1 - 2 * ((index >> (n - 1 - i)) & 1) for i in range(n))


def _expand_prefix(prefix: complex, values: np.ndarray) -> np.ndarray:
    sums = np.array([prefix], dtype=np.complex128)
    for c in values:
        sums = np.concatenate((sums + c, sums - c))
    return sums


def _dedup_sorted(values: np.ndarray, tol: float = DEDUP_TOL) -> np.ndarray:
    key_re = np.round(values.real / tol)
    key_im = np.round(values.imag / tol)
    # representative per key bucket is the coordinate-smallest member, so the
    # result is independent of enumeration order
    order = np.lexsort((values.imag, values.real, key_im, key_re))
    kr, ki = key_re[order], key_im[order]
    fresh = np.ones(order.size, dtype=bool)
    fresh[1:] = (kr[1:] != kr[:-1]) | (ki[1:] != ki[:-1])
    out = values[order][fresh]
    out.setflags(write=False)
    return out


def exact_range(win: SequenceWindow, jobs: int = 1) -> RangeSet:
    """Enumerate all 2^N signed sums, deduplicated at absolute tolerance 1e-12.

    The enumeration doubles a point set term by term; with ``jobs`` > 1 the
    top three sign choices fan out into eight independent subtrees whose
    results are merged in a fixed order, so the output is identical at any
    parallelism level.
    """
    n = len(win)
    if n > MAX_RANGE_TERMS:
        raise ValueError(f"range enumeration capped at N = {MAX_RANGE_TERMS}, got {n}")
    values = win.values
    if jobs <= 1 or n < 8:
        sums = _expand_prefix(0j, values)
    else:
        head, tail = values[:3], values[3:]
        prefixes = []
        for idx in range(8):
            s = 0j
            for i, x in enumerate(_signs_for_index(idx, 3)):
                s = s + x * head[i]
            prefixes.append(s)
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=min(jobs, 8)) as pool:
            parts = list(pool.map(lambda p: _expand_prefix(p, tail), prefixes))
        sums = np.concatenate(parts)
    return RangeSet(points=_dedup_sorted(sums), source_length=n)


def min_prefix_discrepancy(win: SequenceWindow, chunk_bits: int = 16) -> DiscrepancyResult:
    """Exhaustive minimum over sign words of max_k ||S_k||.

    Ties resolve to the lexicographically smallest word under the
    convention +1 < -1, which is the enumeration order itself.
    """
    n = len(win)
    if n > MAX_DISCREPANCY_TERMS:
        raise ValueError(f"discrepancy search capped at N = {MAX_DISCREPANCY_TERMS}, got {n}")
    re = win.values.real
    im = win.values.imag
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    total = 1 << n
    step = 1 << min(chunk_bits, n)
    best = math.inf
    best_index = 0
    for start in range(0, total, step):
        idx = np.arange(start, min(start + step, total), dtype=np.int64)
        signs = 1.0 - 2.0 * ((idx[:, None] >> shifts[None, :]) & 1)
        sre = np.cumsum(signs * re[None, :], axis=1)
        sim = np.cumsum(signs * im[None, :], axis=1)
        worst = np.max(np.maximum(np.abs(sre), np.abs(sim)), axis=1)
        k = int(np.argmin(worst))
        if worst[k] < best:
            best = float(worst[k])
            best_index = int(idx[k])
    return DiscrepancyResult(best, _signs_for_index(best_index, n))


def _as_point_matrix(points: np.ndarray) -> np.ndarray:
    return np.column_stack((points.real, points.imag))


def set_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Hausdorff distance between two complex point sets in the max-norm."""
    ta, tb = cKDTree(_as_point_matrix(a)), cKDTree(_as_point_matrix(b))
    d_ab = ta.query(_as_point_matrix(b), p=np.inf)[0].max()
    d_ba = tb.query(_as_point_matrix(a), p=np.inf)[0].max()
    return float(max(d_ab, d_ba))


def transform_equivariance_check(win: SequenceWindow, matrix,
                                 tol: float = SET_EQUALITY_TOL, jobs: int = 1) -> bool:
    """Does transforming the exact range match the exact range of the
    term-wise transformed window, as sets?"""
    from .ratios import apply_linear_map

    m = np.asarray(matrix, dtype=np.float64)
    if m.shape != (2, 2):
        raise ValueError("matrix must be 2x2")
    if abs(np.linalg.det(m)) <= SINGULARITY_TOL:
        raise ValueError("matrix is numerically singular")
    base = exact_range(win, jobs=jobs).points
    mapped = _as_point_matrix(base) @ m.T
    mapped_points = mapped[:, 0] + 1j * mapped[:, 1]
    direct = exact_range(apply_linear_map(win, m), jobs=jobs).points
    return set_distance(mapped_points, direct) <= tol


def epsilon_net_coverage(range_set: RangeSet, win_rect: Rect, epsilon: float) -> CoverageReport:
    """Grid the rectangle at pitch <= epsilon and measure how much of it the
    range covers: a cell counts as covered when some range point lies within
    epsilon (max-norm) of its center."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    points = range_set.points
    if points.size == 0:
        raise ValueError("empty range")

    def centers(lo: float, hi: float) -> np.ndarray:
        extent = hi - lo
        cells = max(1, math.ceil(extent / epsilon))
        pitch = extent / cells if cells else 0.0
        return lo + (np.arange(cells) + 0.5) * pitch

    xs = centers(win_rect.x0, win_rect.x1)
    ys = centers(win_rect.y0, win_rect.y1)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    grid = np.column_stack((gx.ravel(), gy.ravel()))
    tree = cKDTree(_as_point_matrix(points))
    dists = tree.query(grid, p=np.inf)[0]
    worst = float(dists.max())
    fraction = float(np.mean(dists <= epsilon))
    return CoverageReport(window=win_rect, epsilon=float(epsilon),
                          covered_fraction=fraction, worst_gap=worst,
                          cells=int(grid.shape[0]))
