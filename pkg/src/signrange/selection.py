"""Constructive sign selection.

The five-term combiner keeps a signed sum of pairwise-uncombinable terms
within norm 2; the streaming reducer built on it keeps every prefix sum of
a unit-ball sequence within norm 5; blockwise application extends that to
vanishing sequences; greedy steering hits real and complex targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InsufficientMassError
from .series import (Complex2, SequenceWindow, as_complex, max_norm,
                     max_norms, prefix_bound)

CORRECTION_ROUND = 64  # terms consumed per steering round before switching axes


@dataclass(frozen=True)
class SelectionResult:
    """Signs plus the recomputed prefix bound and (when targeting) residual."""

    signs: tuple[int, ...]
    prefix_bound: float
    residual: Optional[Complex2] = None

    @classmethod
    def for_window(cls, win: SequenceWindow, signs,
                   residual: Optional[Complex2] = None) -> "SelectionResult":
        return cls(signs=tuple(int(s) for s in signs),
                   prefix_bound=prefix_bound(win, signs), residual=residual)


def _sgn(v: float) -> float:
    # zero maps to +1; admissible five-term inputs never have a zero real part
    return -1.0 if v < 0 else 1.0


def _pair_sign(z1: complex, z2: complex) -> Optional[int]:
    if max(abs(z1.real + z2.real), abs(z1.imag + z2.imag)) <= 1.0:
        return 1
    if max(abs(z1.real - z2.real), abs(z1.imag - z2.imag)) <= 1.0:
        return -1
    return None


def pairable(c1, c2) -> Optional[int]:
    """A sign s with ||c1 + s*c2|| <= 1, preferring +1, or None.

    None occurs exactly when |a1|+|a2| > 1, |b1|+|b2| > 1 and
    a1*a2*b1*b2 < 0 (for unit-ball inputs).
    """
    z1, z2 = as_complex(c1), as_complex(c2)
    if max_norm(z1) > 1.0 or max_norm(z2) > 1.0:
        raise ValueError("pairable needs unit-ball terms")
    return _pair_sign(z1, z2)


def _combine5_signs(z: Sequence[complex]) -> tuple[int, ...]:
    s = [_sgn(c.real) for c in z]
    u = s[0] * z[0] - s[1] * z[1] - s[2] * z[2] + s[3] * z[3]
    if abs(u.real) <= 1.0:
        x = (s[0], -s[1], -s[2], s[3], 1.0)
    else:
        x = (1.0, s[1], -s[2], -s[3], s[4])
    return tuple(int(v) for v in x)


def combine5(terms) -> tuple[int, ...]:
    """Signs for five unit-ball terms, none consecutively pairable, whose
    signed sum has norm at most 2.

    Form u = c1*sgn(a1) - c2*sgn(a2) - c3*sgn(a3) + c4*sgn(a4).  When
    |Re u| <= 1 the sum u + c5 works; otherwise c1 + v works with
    v = c2*sgn(a2) - c3*sgn(a3) - c4*sgn(a4) + c5*sgn(a5), since
    |Re u| > 1 forces |Re v| <= 1 and both imaginary parts stay within 1.
    """
    z = [as_complex(t) for t in terms]
    if len(z) != 5:
        raise ValueError("combine5 needs exactly five terms")
    for i, c in enumerate(z):
        if max_norm(c) > 1.0:
            raise ValueError(f"term {i + 1} leaves the unit ball")
    for i in range(4):
        if _pair_sign(z[i], z[i + 1]) is not None:
            raise ValueError(f"terms {i + 1} and {i + 2} are pairable; "
                             "the five-term combiner needs uncombinable neighbours")
    return _combine5_signs(z)


class _SuperTerm:
    """A merged group of consecutive original terms with norm <= 1."""

    __slots__ = ("value", "parts")

    def __init__(self, value: complex, parts: list[tuple[int, int]]):
        self.value = value
        self.parts = parts  # (original position, sign)


def _merge(left: _SuperTerm, right: _SuperTerm, sign: int) -> _SuperTerm:
    return _SuperTerm(left.value + sign * right.value,
                      left.parts + [(i, sign * s) for i, s in right.parts])


def _weighted(groups: Sequence[_SuperTerm], coeffs: Sequence[float]) -> _SuperTerm:
    value = 0j
    parts: list[tuple[int, int]] = []
    for g, w in zip(groups, coeffs):
        value += w * g.value
        parts.extend((i, int(w) * s) for i, s in g.parts)
    return _SuperTerm(value, parts)


def _bounded_signs_core(values: np.ndarray) -> np.ndarray:
    """Streaming reduction: keep merging the earliest pairable adjacent pair
    among the first four pairs of the buffer; when five buffered groups are
    pairwise uncombinable and input remains, apply the five-term rule."""
    n = values.size
    signs = np.zeros(n, dtype=np.int64)
    buffer: list[_SuperTerm] = []
    cursor = 0

    def refill():
        nonlocal cursor
        while len(buffer) < 5 and cursor < n:
            buffer.append(_SuperTerm(complex(values[cursor]), [(cursor, 1)]))
            cursor += 1

    refill()
    while True:
        merged = False
        for j in range(min(4, len(buffer) - 1)):
            s = _pair_sign(buffer[j].value, buffer[j + 1].value)
            if s is not None:
                buffer[j:j + 2] = [_merge(buffer[j], buffer[j + 1], s)]
                merged = True
                break
        if merged:
            refill()
            continue
        if len(buffer) == 5 and cursor < n:
            sg = [_sgn(g.value.real) for g in buffer]
            u = sg[0] * buffer[0].value - sg[1] * buffer[1].value \
                - sg[2] * buffer[2].value + sg[3] * buffer[3].value
            if abs(u.real) <= 1.0:
                group = _weighted(buffer[:4], (sg[0], -sg[1], -sg[2], sg[3]))
                buffer[:4] = [group]
            else:
                group = _weighted(buffer[1:5], (sg[1], -sg[2], -sg[3], sg[4]))
                buffer[1:5] = [group]
            refill()
            continue
        break

    for group in buffer:
        for i, s in group.parts:
            signs[i] = s
    return signs


def bounded_signs(win: SequenceWindow) -> SelectionResult:
    """Signs keeping every prefix sum within norm 5 for unit-ball terms.

    Inputs beyond the unit ball are rescaled internally (signs are scale
    invariant); the reported bound is in original units, so the guarantee
    reads max_k ||S_k|| <= 5 * max(1, sup_n ||c_n||).
    """
    sup = win.sup_norm()
    values = win.values if sup <= 1.0 or sup == 0.0 else win.values / sup
    signs = _bounded_signs_core(np.asarray(values, dtype=np.complex128))
    return SelectionResult.for_window(win, signs)


def tail_blocks(win: SequenceWindow) -> list[tuple[int, int]]:
    """Consecutive half-open index blocks with geometrically halving sup-norm:
    block boundaries sit where the suffix sup first drops below
    sup * 2^-k, so block k's terms all have norm <= sup * 2^-(k-1)."""
    norms = max_norms(win.values)
    n = norms.size
    sup = float(norms.max())
    if sup == 0.0:
        return [(0, n)]
    suffix = np.maximum.accumulate(norms[::-1])[::-1]
    blocks: list[tuple[int, int]] = []
    start, k = 0, 1
    while start < n:
        if suffix[start] == 0.0:
            blocks.append((start, n))
            break
        threshold = sup * 2.0 ** (-k)
        k += 1
        j = int(np.searchsorted(-suffix, -threshold, side="left"))
        j = min(j, n)
        if j <= start:
            continue
        blocks.append((start, j))
        start = j
    return blocks


def tail_control(win: SequenceWindow) -> SelectionResult:
    """Blockwise prefix-bounded selection for vanishing sequences.

    Splits the window at the halving boundaries of ``tail_blocks`` and runs
    the prefix-bounded reducer on each block after rescaling by its own
    sup-norm, so each block's internal prefix sums stay within 5x that
    block's sup and the block contributions shrink geometrically.
    """
    signs = np.zeros(len(win), dtype=np.int64)
    for lo, hi in tail_blocks(win):
        block = win.values[lo:hi]
        sup = float(max_norms(block).max())
        scaled = block if sup == 0.0 else block / sup
        signs[lo:hi] = _bounded_signs_core(np.asarray(scaled, dtype=np.complex128))
    return SelectionResult.for_window(win, signs)


def greedy_target_real(terms, target: float) -> SelectionResult:
    """Greedy real-target steering: at every step move the running sum of
    |t_n| toward the target, folding each term's own sign into the output.

    Once the error first drops below the current term's size, it stays below
    the largest subsequent term (the post-crossing envelope).
    """
    mags = [abs(float(t)) for t in terms]
    if not mags:
        raise ValueError("need at least one term")
    a = float(target)
    signs: list[int] = []
    running = 0.0
    worst = 0.0
    for t, mag in zip(terms, mags):
        y = 1.0 if a - running >= 0.0 else -1.0
        running += y * mag
        worst = max(worst, abs(running))
        signs.append(int(y) if float(t) >= 0.0 else -int(y))
    return SelectionResult(signs=tuple(signs), prefix_bound=worst,
                           residual=Complex2(a - running, 0.0))


def greedy_envelope_holds(terms, target: float, signs) -> tuple[bool, Optional[int]]:
    """Check the post-crossing envelope: after the first index n* with
    |target - S_n*| <= |t_n*|, every later error is at most the largest
    intervening term.  Returns (ok, crossing index or None)."""
    t = np.asarray([float(v) for v in terms], dtype=np.float64)
    x = np.asarray([int(s) for s in signs], dtype=np.float64)
    sums = np.cumsum(x * t)
    err = np.abs(float(target) - sums)
    crossed = err <= np.abs(t)
    if not crossed.any():
        return True, None
    n_star = int(np.argmax(crossed))
    if n_star + 1 >= t.size:
        return True, n_star
    tail_max = np.maximum.accumulate(np.abs(t[n_star + 1:]))
    return bool(np.all(err[n_star + 1:] <= tail_max + 1e-12)), n_star


def _ratio_direction(t: float) -> np.ndarray:
    if math.isinf(t):
        return np.array([1.0, 0.0])
    scale = max(abs(t), 1.0)
    return np.array([t / scale, 1.0 / scale])


def two_ratio_alignment(t1: float, t2: float) -> np.ndarray:
    """Matrix sending the ratio-t1 direction to the real axis and the
    ratio-t2 direction to the imaginary axis."""
    u = np.column_stack((_ratio_direction(t1), _ratio_direction(t2)))
    if abs(np.linalg.det(u)) <= 1e-12:
        raise ValueError("ratio directions are not distinct")
    return np.linalg.inv(u)


def single_ratio_alignment(t: float) -> np.ndarray:
    """Matrix sending the ratio-t direction onto the imaginary axis."""
    if math.isinf(t):
        return np.array([[0.0, 1.0], [1.0, 0.0]])
    return np.array([[1.0, -t], [0.0, 1.0]])


def approx_target_complex(win: SequenceWindow, ratios, target, eps: float) -> SelectionResult:
    """Steer the signed sum to within ``eps`` (max-norm) of a complex target.

    With two ratio reports: align their directions with the coordinate axes,
    steer the real coordinate with one index class and the imaginary with
    the other in alternating correction rounds, and sign the unclassified
    leftovers with the blockwise controller first so the steering absorbs
    their drift.  With a single report: its (near-axis) class steers the
    imaginary coordinate and the complement steers the real one.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not ratios:
        raise ValueError("no-ratio: at least one ratio report is required")
    n = len(win)
    target_z = as_complex(target)

    reports = sorted(ratios, key=lambda r: -r.mass)
    in_window = set(range(n))

    if len(reports) >= 2 and reports[0].ratio != reports[1].ratio:
        r1, r2 = reports[0], reports[1]
        matrix = two_ratio_alignment(r1.ratio, r2.ratio)
        class_a = sorted(set(r1.index_mask) & in_window)
        class_b = sorted((set(r2.index_mask) & in_window) - set(class_a))
    else:
        r1 = reports[0]
        matrix = single_ratio_alignment(r1.ratio)
        class_b = sorted(set(r1.index_mask) & in_window)
        class_a = sorted(in_window - set(class_b))
    if not (class_a or class_b):
        raise ValueError("no-ratio: ratio reports carry no in-window indices")

    transformed = np.column_stack((win.values.real, win.values.imag)) @ matrix.T
    w = transformed[:, 0] + 1j * transformed[:, 1]
    tv = matrix @ np.array([target_z.real, target_z.imag])
    goal = complex(tv[0], tv[1])

    signs = np.zeros(n, dtype=np.int64)
    leftovers = sorted(in_window - set(class_a) - set(class_b))
    achieved = 0j
    if leftovers:
        sub = SequenceWindow(win.values[leftovers])
        for i, s in zip(leftovers, tail_control(sub).signs):
            signs[i] = s
        achieved = complex(np.sum(signs[leftovers] * w[leftovers]))

    # fast fail when the target is strictly out of reach; the authoritative
    # check is the final residual against eps
    need_re = abs(goal.real - achieved.real)
    need_im = abs(goal.imag - achieved.imag)
    avail = np.abs(w.real[class_a + class_b]).sum(), np.abs(w.imag[class_a + class_b]).sum()
    slack = 1e-12 * (1.0 + max(avail))
    if need_re > avail[0] + slack or need_im > avail[1] + slack:
        short = max(need_re - avail[0], need_im - avail[1])
        raise InsufficientMassError(
            f"window mass cannot reach the target (shortfall {short:.6g})",
            shortfall=float(short))

    pa = pb = 0
    while pa < len(class_a) or pb < len(class_b):
        for _ in range(min(CORRECTION_ROUND, len(class_a) - pa)):
            i = class_a[pa]
            y = 1.0 if goal.real - achieved.real >= 0.0 else -1.0
            x = y if w[i].real >= 0.0 else -y
            signs[i] = int(x)
            achieved += x * w[i]
            pa += 1
        for _ in range(min(CORRECTION_ROUND, len(class_b) - pb)):
            i = class_b[pb]
            y = 1.0 if goal.imag - achieved.imag >= 0.0 else -1.0
            x = y if w[i].imag >= 0.0 else -y
            signs[i] = int(x)
            achieved += x * w[i]
            pb += 1

    total = complex(np.sum(signs * win.values))
    residual = Complex2(target_z.real - total.real, target_z.imag - total.imag)
    gap = max_norm(residual)
    if gap > eps:
        raise InsufficientMassError(
            f"residual {gap:.6g} exceeds eps {eps:.6g} (shortfall {gap - eps:.6g})",
            shortfall=float(gap - eps))
    return SelectionResult.for_window(win, signs, residual=residual)
