"""Ratio extraction and direction analysis for complex term sequences.

A ratio of {c_n = a_n + i b_n} is a cluster value of a_n/b_n carrying
non-negligible mass.  The extractor mirrors a nested dyadic refinement:
work on the coordinate-dominant side, halve the candidate interval, keep
the heavier child.  At a finite horizon the result is a diagnostic, so
every report records the horizon it was computed at.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .series import SequenceWindow, max_norms

INFINITE_RATIO = math.inf


@dataclass(frozen=True)
class RatioReport:
    """One extracted ratio: estimate, retained window positions (0-based),
    their total max-norm mass, and the refinement bookkeeping."""

    ratio: float
    index_mask: frozenset[int]
    mass: float
    dyadic_depth: int
    branch: str          # "b": interval bounds a/b; "a": interval bounds b/a
    interval: tuple[float, float]
    horizon: int


@dataclass(frozen=True)
class DirectionProfile:
    """Directional mass sum |cos(t) a_n + sin(t) b_n| sampled over [0, pi)."""

    samples: tuple[tuple[float, float], ...]
    min_angle: float
    min_mass: float
    horizon: int


def _extract_on_mask(values: np.ndarray, candidates: np.ndarray, depth: int,
                     horizon: int) -> RatioReport:
    a, b = values.real, values.imag
    norms = np.maximum(np.abs(a), np.abs(b))
    nonzero = candidates & ((a != 0.0) | (b != 0.0))

    mass_a = float(np.abs(a[nonzero]).sum())
    mass_b = float(np.abs(b[nonzero]).sum())
    b_branch = mass_b >= mass_a
    if b_branch:
        members = nonzero & (np.abs(a) <= np.abs(b))
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.where(members, a / np.where(members, b, 1.0), np.nan)
    else:
        members = nonzero & (np.abs(b) <= np.abs(a))
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.where(members, b / np.where(members, a, 1.0), np.nan)

    lo, hi = -1.0, 1.0
    retained = members
    for _ in range(depth):
        mid = 0.5 * (lo + hi)
        lower = retained & (u >= lo) & (u <= mid)
        upper = retained & (u >= mid) & (u <= hi)
        lower_mass = float(norms[lower].sum())
        upper_mass = float(norms[upper].sum())
        if upper_mass > lower_mass:
            lo, retained = mid, upper
        else:
            hi, retained = mid, lower  # ties keep the lower child

    midpoint = 0.5 * (lo + hi)
    if b_branch:
        ratio = midpoint
    elif lo == 0.0 or hi == 0.0:
        ratio = INFINITE_RATIO
    else:
        ratio = 1.0 / midpoint
    positions = frozenset(int(i) for i in np.nonzero(retained)[0])
    return RatioReport(ratio=ratio, index_mask=positions,
                       mass=float(norms[retained].sum()), dyadic_depth=depth,
                       branch="b" if b_branch else "a", interval=(lo, hi),
                       horizon=horizon)


def dyadic_ratio_extract(win: SequenceWindow, depth: int) -> RatioReport:
    """Nested dyadic refinement of the coordinate ratio.

    Chooses the a/b or b/a parametrisation by comparing the coordinate
    masses (ties to the imaginary-dominant side), then halves [-1, 1]
    ``depth`` times, keeping the child with the larger retained mass (ties
    to the lower child).  The reported ratio is the midpoint of the final
    interval; when the b/a interval touches zero the ratio is the infinity
    marker.
    """
    if depth < 1:
        raise ValueError("depth must be positive")
    candidates = np.ones(len(win), dtype=bool)
    return _extract_on_mask(win.values, candidates, depth, horizon=len(win))


def _as_t_interval(report: RatioReport) -> tuple[float, float]:
    lo, hi = report.interval
    if report.branch == "b":
        return (lo, hi)
    if lo == 0.0:
        return (1.0 / hi, math.inf)
    if hi == 0.0:
        return (-math.inf, 1.0 / lo)
    return (min(1.0 / lo, 1.0 / hi), max(1.0 / lo, 1.0 / hi))


def _intervals_touch(p: tuple[float, float], q: tuple[float, float]) -> bool:
    unb_p = math.isinf(p[0]) or math.isinf(p[1])
    unb_q = math.isinf(q[0]) or math.isinf(q[1])
    if unb_p and unb_q:
        return True  # both contain the infinite ratio
    return p[0] <= q[1] and q[0] <= p[1]


def detect_ratios(win: SequenceWindow, depth: int, mass_threshold: float) -> list[RatioReport]:
    """Repeated extraction: pull a ratio, remove its retained indices, and
    repeat while the remaining mass stays above the threshold.  Reports come
    back sorted by mass; reports whose ratio intervals overlap are merged
    into the heavier one."""
    if mass_threshold <= 0:
        raise ValueError("mass threshold must be positive")
    norms = max_norms(win.values)
    remaining = np.ones(len(win), dtype=bool)
    reports: list[RatioReport] = []
    while float(norms[remaining].sum()) >= mass_threshold:
        report = _extract_on_mask(win.values, remaining, depth, horizon=len(win))
        if not report.index_mask:
            break
        reports.append(report)
        for i in report.index_mask:
            remaining[i] = False

    reports.sort(key=lambda r: -r.mass)
    merged: list[RatioReport] = []
    for rep in reports:
        for i, kept in enumerate(merged):
            if _intervals_touch(_as_t_interval(kept), _as_t_interval(rep)):
                merged[i] = RatioReport(
                    ratio=kept.ratio, index_mask=kept.index_mask | rep.index_mask,
                    mass=kept.mass + rep.mass, dyadic_depth=min(kept.dyadic_depth, rep.dyadic_depth),
                    branch=kept.branch, interval=kept.interval, horizon=kept.horizon)
                break
        else:
            merged.append(rep)
    merged.sort(key=lambda r: -r.mass)
    return merged


_HALF_SQRT2 = math.sqrt(0.5)
_QUARTER_TURNS = {0: (1.0, 0.0), 1: (_HALF_SQRT2, _HALF_SQRT2),
                  2: (0.0, 1.0), 3: (-_HALF_SQRT2, _HALF_SQRT2)}


def direction_vector(j: int, m: int) -> tuple[float, float]:
    """Unit vector at angle j*pi/m; quarter-turn multiples use exact
    symmetric components so orthogonal cancellations are exact."""
    if (4 * j) % m == 0:
        return _QUARTER_TURNS[(4 * j // m) % 4]
    theta = j * math.pi / m
    return (math.cos(theta), math.sin(theta))


def directional_mass(win: SequenceWindow, direction: tuple[float, float]) -> float:
    alpha, beta = direction
    return float(np.abs(alpha * win.values.real + beta * win.values.imag).sum())


def nonsummability_profile(win: SequenceWindow, m_samples: int) -> DirectionProfile:
    """Sample the directional mass at angles j*pi/m, j = 0..m-1, and report
    the minimising direction.  At a finite horizon a small minimum suggests
    a summable direction; it proves nothing about the infinite sequence, so
    compare minima across horizons."""
    if m_samples < 4:
        raise ValueError("need at least four sample directions")
    samples = []
    for j in range(m_samples):
        theta = j * math.pi / m_samples
        samples.append((theta, directional_mass(win, direction_vector(j, m_samples))))
    min_angle, min_mass = min(samples, key=lambda s: s[1])
    return DirectionProfile(samples=tuple(samples), min_angle=min_angle,
                            min_mass=min_mass, horizon=len(win))


def apply_linear_map(win: SequenceWindow, matrix) -> SequenceWindow:
    """Term-wise (a, b) -> (m11 a + m12 b, m21 a + m22 b); ranges transform
    the same way, which the enumeration oracle can confirm."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.shape != (2, 2):
        raise ValueError("matrix must be 2x2")
    if abs(np.linalg.det(m)) <= 1e-9:
        raise ValueError("matrix is numerically singular")
    pairs = np.column_stack((win.values.real, win.values.imag)) @ m.T
    return SequenceWindow(pairs[:, 0] + 1j * pairs[:, 1], origin_index=win.origin_index)


def regroup(win: SequenceWindow, blocks, signs) -> SequenceWindow:
    """Collapse consecutive index blocks into single terms sum(x_n c_n).

    ``blocks`` must partition positions 1..N in order; the k-th new term is
    the signed sum over the k-th block.  Regrouping a one-ratio sequence
    with cancelling signs is how a second ratio is exhibited.
    """
    from .series import as_sign_tuple

    x = as_sign_tuple(signs, expected_len=len(win))
    flattened: list[int] = []
    for block in blocks:
        flattened.extend(int(i) for i in block)
    if flattened != list(range(1, len(win) + 1)):
        raise ValueError("blocks must partition window positions 1..N in order")
    new_terms = []
    for block in blocks:
        total = 0j
        for pos in block:
            total += x[pos - 1] * win.values[pos - 1]
        new_terms.append(total)
    return SequenceWindow(new_terms, origin_index=1)
