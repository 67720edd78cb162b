"""Level-indexed contraction systems and the two-ratio construction.

A system here is a family of affine maps z -> r z + d_{k,i}, at least one
map per level, uniform contraction r in (0, 1).  Its attractor is the set
of limits of f_{1,s1} o f_{2,s2} o ... applied to 0, i.e. sums
sum_k r^(k-1) d_{k,s_k}.  When a rectangle is covered by every level's
images it lies inside the attractor, which is how a signed-series range is
shown to contain a square.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import BracketViolationError, InsufficientMassError, TargetEscapeError
from .oracle import Rect
from .ratios import apply_linear_map
from .series import SequenceWindow, as_complex, max_norm

MAX_ATTRACTOR_POINTS = 1 << 24

# per-level sum brackets guaranteed by block selection at eta_k = delta^k / 8
BRACKETS = {
    "a1": (105.0 / 64.0, 153.0 / 64.0),
    "b1": (7.0 / 8.0, 9.0 / 8.0),
    "alpha1": (7.0 / 8.0, 9.0 / 8.0),
    "beta1": (161.0 / 64.0, 225.0 / 64.0),
}


@dataclass(frozen=True)
class MoranSystem:
    """Affine maps z -> contraction * z + translation, grouped by level.

    The classical definition asks for at least two maps per level; single-map
    levels are accepted so degenerate examples stay expressible.
    """

    contraction: float
    levels: tuple[tuple[complex, ...], ...]

    def __post_init__(self):
        if not 0.0 < self.contraction < 1.0:
            raise ValueError("contraction must lie in (0, 1)")
        if not self.levels or any(len(lv) < 1 for lv in self.levels):
            raise ValueError("every level needs at least one map")
        for lv in self.levels:
            for d in lv:
                if not (math.isfinite(d.real) and math.isfinite(d.imag)):
                    raise ValueError("translations must be finite")

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def offset_bound(self) -> float:
        """M = sup over all maps of ||f_{k,i}(0)||."""
        return max(max_norm(d) for lv in self.levels for d in lv)

    @property
    def radius_bound(self) -> float:
        """R = 2M/(1-r); any R > M/(1-r) traps the attractor in B(0, R)."""
        return 2.0 * self.offset_bound / (1.0 - self.contraction)


def uniform_system(contraction: float, translations, depth: int) -> MoranSystem:
    """Same map family at every level."""
    level = tuple(as_complex(t) for t in translations)
    return MoranSystem(contraction=contraction, levels=tuple(level for _ in range(depth)))


@dataclass(frozen=True)
class AttractorCloud:
    points: np.ndarray
    depth: int
    error_radius: float
    radius_bound: float


def attractor_points(system: MoranSystem, depth: int, jobs: int = 1) -> AttractorCloud:
    """All depth-limited compositions applied to 0.

    f_{s1..sm}(0) = sum_k r^(k-1) d_{k,s_k}; every attractor point lies
    within r^depth * R of some returned point.  Splitting on the first
    level's digits parallelises without changing the output.
    """
    if depth < 1 or depth > system.depth:
        raise ValueError(f"depth must be in 1..{system.depth}")
    count = 1
    for lv in system.levels[:depth]:
        count *= len(lv)
        if count > MAX_ATTRACTOR_POINTS:
            raise ValueError(f"enumeration capped at {MAX_ATTRACTOR_POINTS} points")
    r = system.contraction

    def expand(start: np.ndarray, level_range) -> np.ndarray:
        pts = start
        scale = r
        for k in level_range:
            offs = scale * np.asarray(system.levels[k], dtype=np.complex128)
            pts = (pts[:, None] + offs[None, :]).ravel()
            scale *= r
        return pts

    first = np.asarray(system.levels[0], dtype=np.complex128)
    if jobs <= 1 or depth == 1 or len(first) == 1:
        pts = expand(first, range(1, depth))
    else:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=min(jobs, len(first))) as pool:
            parts = list(pool.map(
                lambda d: expand(np.array([d], dtype=np.complex128), range(1, depth)),
                first))
        pts = np.concatenate(parts)
    pts.setflags(write=False)
    err = r ** depth * system.radius_bound
    return AttractorCloud(points=pts, depth=depth, error_radius=float(err),
                          radius_bound=float(system.radius_bound))


@dataclass(frozen=True)
class LevelCoverage:
    level: int
    covered: bool
    witness: Optional[complex]


def _image_rect(r: float, d: complex, q: Rect) -> Rect:
    return Rect(r * q.x0 + d.real, r * q.x1 + d.real,
                r * q.y0 + d.imag, r * q.y1 + d.imag)


def _cover_gap(q: Rect, images: list[Rect]) -> Optional[complex]:
    """Exact sweep: a point of q not covered by the image rectangles, or
    None when q is covered.  Affine images of rectangles are rectangles, so
    the decision is exact interval bookkeeping, no sampling."""
    events = {q.x0, q.x1}
    for im in images:
        for x in (im.x0, im.x1):
            if q.x0 < x < q.x1:
                events.add(x)
    xs = sorted(events)
    slabs = [(q.x0, q.x1)] if q.x0 == q.x1 else \
        [(xs[i], xs[i + 1]) for i in range(len(xs) - 1) if xs[i] < xs[i + 1]]
    for sx0, sx1 in slabs:
        active = sorted(((im.y0, im.y1) for im in images
                         if im.x0 <= sx0 and im.x1 >= sx1), key=lambda t: t[0])
        x_mid = 0.5 * (sx0 + sx1)
        covered_to = q.y0
        started = False
        gap_y: Optional[float] = None
        for lo, hi in active:
            if lo > covered_to or (not started and lo > q.y0):
                gap_y = 0.5 * (covered_to + min(lo, q.y1))
                break
            started = True
            covered_to = max(covered_to, hi)
            if covered_to >= q.y1:
                break
        if gap_y is None:
            if not active:
                gap_y = 0.5 * (q.y0 + q.y1)
            elif covered_to < q.y1 or not started:
                gap_y = 0.5 * (covered_to + q.y1)
        if gap_y is not None:
            return complex(x_mid, gap_y)
    return None


def covering_check(system: MoranSystem, q: Rect) -> list[LevelCoverage]:
    """Per level: is q contained in the union of that level's images of q?
    On failure the verdict carries an uncovered witness point."""
    out = []
    r = system.contraction
    for k, level in enumerate(system.levels, start=1):
        images = [_image_rect(r, d, q) for d in level]
        witness = _cover_gap(q, images)
        if witness is not None:
            assert q.contains(witness) and not any(
                im.contains(witness) for im in images)
        out.append(LevelCoverage(level=k, covered=witness is None, witness=witness))
    return out


@dataclass(frozen=True)
class BlockSelection:
    """Disjoint increasing index blocks whose |b| masses track delta^k."""

    blocks: tuple[tuple[int, ...], ...]
    real_sums: tuple[float, ...]   # sum over the block of a_n * sgn(b_n)
    mass_sums: tuple[float, ...]   # sum over the block of |b_n|
    delta: float
    eta: tuple[float, ...]


def geometric_eta(delta: float, count: int, factor: float = 0.125) -> list[float]:
    return [factor * delta ** k for k in range(1, count + 1)]


def select_blocks(win: SequenceWindow, t: float, delta: float,
                  eta: Union[Sequence[float], Callable[[int], float]],
                  count: int) -> BlockSelection:
    """Greedy block accumulation: for each level k, scan forward collecting
    indices with |a_n/b_n - t| + ||c_n|| < eta_k until the |b| mass first
    enters [delta^k - eta_k, delta^k + eta_k]; an index that would overshoot
    the upper edge is skipped.  Blocks are strictly increasing in index, so
    the per-level ratio of sums stays within eta_k of t by construction.
    """
    if not (0.0 < delta < 1.0):
        raise ValueError("delta must lie in (0, 1)")
    if not (math.isfinite(t) and t > 0.0):
        raise ValueError("block selection needs a finite positive ratio")
    if count < 1:
        raise ValueError("count must be positive")
    etas = [float(eta(k)) for k in range(1, count + 1)] if callable(eta) \
        else [float(v) for v in eta[:count]]
    if len(etas) < count or any(v <= 0 for v in etas):
        raise ValueError("eta schedule must supply positive values for every level")

    a = win.values.real
    b = win.values.imag
    norms = np.maximum(np.abs(a), np.abs(b))
    n = len(win)

    blocks: list[tuple[int, ...]] = []
    real_sums: list[float] = []
    mass_sums: list[float] = []
    pos = 0
    for k in range(1, count + 1):
        eta_k = etas[k - 1]
        target = delta ** k
        chosen: list[int] = []
        total = 0.0
        i = pos
        while i < n and total < target - eta_k:
            if b[i] != 0.0 and abs(a[i] / b[i] - t) + norms[i] < eta_k:
                nb = abs(b[i])
                if total + nb <= target + eta_k:
                    chosen.append(i)
                    total += nb
            i += 1
        if total < target - eta_k:
            raise InsufficientMassError(
                f"level {k}: accumulated |b| mass {total:.6g} cannot reach "
                f"{target - eta_k:.6g}", level=k,
                shortfall=float(target - eta_k - total))
        blocks.append(tuple(chosen))
        real_sums.append(float(np.sum(a[chosen] * np.sign(b[chosen]))))
        mass_sums.append(total)
        pos = chosen[-1] + 1
    return BlockSelection(blocks=tuple(blocks), real_sums=tuple(real_sums),
                          mass_sums=tuple(mass_sums), delta=delta, eta=tuple(etas))


def level_translations(a1: float, b1: float, alpha1: float, beta1: float
                       ) -> tuple[complex, complex, complex, complex]:
    """The four level translations {+-[(a1 + i b1) +- (alpha1 + i beta1)]}
    in the order +(sum), +(diff), -(sum), -(diff)."""
    d_sum = complex(a1 + alpha1, b1 + beta1)
    d_diff = complex(a1 - alpha1, b1 - beta1)
    return (d_sum, d_diff, -d_sum, -d_diff)


@dataclass(frozen=True)
class TwoRatioSystem:
    system: MoranSystem
    translations: tuple[tuple[complex, complex, complex, complex], ...]
    selection_a: BlockSelection
    selection_b: BlockSelection
    window_a: SequenceWindow
    window_b: SequenceWindow


def build_two_ratio_system(win_a: SequenceWindow, win_b: SequenceWindow,
                           delta: float, levels: int) -> TwoRatioSystem:
    """Construct the four-map-per-level system from a ratio-2 window (a/b
    near 2) and a ratio-3-swapped window (b/a near 3).

    At eta_k = delta^k/8 the block sums must satisfy, per level,
    105/64 <= a1/delta^k <= 153/64,  7/8 <= b1/delta^k <= 9/8,
    7/8 <= alpha1/delta^k <= 9/8,    161/64 <= beta1/delta^k <= 225/64;
    the level's translations are delta^(1-k) * {+-(a1+i b1 +- (alpha1+i beta1))}.
    """
    eta = geometric_eta(delta, levels)
    sel_a = select_blocks(win_a, 2.0, delta, eta, levels)
    swapped = apply_linear_map(win_b, [[0.0, 1.0], [1.0, 0.0]])
    sel_b = select_blocks(swapped, 3.0, delta, eta, levels)

    level_maps = []
    d_levels = []
    scale = 1.0  # delta^(1-k)
    for k in range(1, levels + 1):
        dk = delta ** k
        a1 = sel_a.real_sums[k - 1]
        b1 = sel_a.mass_sums[k - 1]
        alpha1 = sel_b.mass_sums[k - 1]
        beta1 = sel_b.real_sums[k - 1]
        for name, value in (("a1", a1), ("b1", b1), ("alpha1", alpha1), ("beta1", beta1)):
            lo, hi = BRACKETS[name]
            if not lo * dk <= value <= hi * dk:
                raise BracketViolationError(
                    f"level {k}: {name} = {value:.6g} outside "
                    f"[{lo * dk:.6g}, {hi * dk:.6g}]", level=k, inequality=name)
        dk_maps = level_translations(a1, b1, alpha1, beta1)
        d_levels.append(dk_maps)
        level_maps.append(tuple(scale * d for d in dk_maps))
        scale /= delta
    system = MoranSystem(contraction=delta, levels=tuple(level_maps))
    return TwoRatioSystem(system=system, translations=tuple(d_levels),
                          selection_a=sel_a, selection_b=sel_b,
                          window_a=win_a, window_b=win_b)


@dataclass(frozen=True)
class Address:
    digits: tuple[int, ...]


def compose_at_zero(system: MoranSystem, address: Address) -> complex:
    """f_{s1..sm}(0) for the given digits."""
    total = 0j
    scale = 1.0
    for k, digit in enumerate(address.digits):
        total += scale * system.levels[k][digit - 1]
        scale *= system.contraction
    return total


def address_for_target(system: MoranSystem, target, depth: int, region: Rect) -> Address:
    """Greedy coding of a target point: at each level take the first map
    whose image rectangle contains the current pullback, then pull the
    target back through it.  Valid whenever the region passes the covering
    check down to ``depth``; then ||f_sigma(0) - target|| <= r^depth * R."""
    if depth < 1 or depth > system.depth:
        raise ValueError(f"depth must be in 1..{system.depth}")
    z = as_complex(target)
    if not region.contains(z):
        raise ValueError("target lies outside the region")
    r = system.contraction
    digits = []
    current = z
    for k in range(depth):
        chosen = None
        for i, d in enumerate(system.levels[k]):
            if _image_rect(r, d, region).contains(current):
                chosen = i
                break
        if chosen is None:
            raise TargetEscapeError(
                f"no level-{k + 1} image contains the pullback "
                f"{current:.6g}; covering must have failed", level=k + 1)
        digits.append(chosen + 1)
        d = system.levels[k][chosen]
        current = complex((current.real - d.real) / r, (current.imag - d.imag) / r)
    return Address(digits=tuple(digits))


def address_signs(build: TwoRatioSystem, address: Address) -> tuple[dict[int, int], dict[int, int]]:
    """Expand an address into signs on the two source windows.

    Level k's chosen translation eps*(A_k + s*B_k) realises as signs
    eps*sgn(b_n) on the ratio-2 block and eps*s*sgn(alpha_n) on the
    ratio-3 block (alpha is that window's real part), since
    A_k = sum sgn(b_n)(a_n + i b_n) and B_k = sum sgn(alpha_n)(alpha_n + i beta_n).
    """
    # D_k enumeration order: +(sum), +(diff), -(sum), -(diff)
    digit_coeffs = {1: (1, 1), 2: (1, -1), 3: (-1, 1), 4: (-1, -1)}
    b_of_a = build.window_a.values.imag
    alpha_of_b = build.window_b.values.real
    sign_a: dict[int, int] = {}
    sign_b: dict[int, int] = {}
    for k, digit in enumerate(address.digits):
        eps, inner = digit_coeffs[digit]
        for pos in build.selection_a.blocks[k]:
            sign_a[pos] = eps * (1 if b_of_a[pos] >= 0 else -1)
        for pos in build.selection_b.blocks[k]:
            sign_b[pos] = eps * inner * (1 if alpha_of_b[pos] >= 0 else -1)
    return sign_a, sign_b


def nested_ball_ok(system: MoranSystem) -> bool:
    """Every image of B(0, R) stays inside B(0, R) for R = 2M/(1-r)."""
    r = system.contraction
    radius = system.radius_bound
    return all(max_norm(d) + r * radius <= radius
               for lv in system.levels for d in lv)
