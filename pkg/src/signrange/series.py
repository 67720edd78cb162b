"""Core value types, sequence families, and partial-sum evaluation.

Everything here works with complex terms c_n = a_n + i*b_n under the
max-norm ||c|| = max(|a|, |b|).  The interesting sets are the signed sums
sum(x_n * c_n) over sign words x in {-1, +1}^N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

DEFAULT_SEED = 1009

Complexish = Union["Complex2", complex, float, int]


@dataclass(frozen=True)
class Complex2:
    """A complex value stored as a real pair; both components must be finite."""

    re: float
    im: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "re", float(self.re))
        object.__setattr__(self, "im", float(self.im))
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise ValueError(f"components must be finite, got {self.re}+{self.im}i")

    @classmethod
    def from_complex(cls, z: complex) -> "Complex2":
        return cls(z.real, z.imag)

    def as_complex(self) -> complex:
        return complex(self.re, self.im)

    def __add__(self, other: "Complex2") -> "Complex2":
        return Complex2(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "Complex2") -> "Complex2":
        return Complex2(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "Complex2":
        return Complex2(-self.re, -self.im)

    def scaled(self, s: float) -> "Complex2":
        return Complex2(s * self.re, s * self.im)


def as_complex(value: Complexish) -> complex:
    """Coerce a Complex2, complex, or real number to a Python complex."""
    if isinstance(value, Complex2):
        return value.as_complex()
    return complex(value)


def max_norm(c: Complexish) -> float:
    """Max-norm ||a+ib|| = max(|a|, |b|)."""
    z = as_complex(c)
    return max(abs(z.real), abs(z.imag))


def max_norms(values: np.ndarray) -> np.ndarray:
    """Vectorised max-norm of a complex array."""
    return np.maximum(np.abs(values.real), np.abs(values.imag))


class SequenceWindow:
    """A finite prefix c_1..c_N of a sequence, stored as a complex array.

    ``origin_index`` records where the prefix starts in the parent sequence
    (1 for a plain prefix).  ``spec`` optionally records the generating
    family, which block-structure checks need.
    """

    def __init__(self, terms, origin_index: int = 1, spec: Optional["SequenceSpec"] = None):
        values = np.asarray([as_complex(t) for t in terms], dtype=np.complex128)
        if values.size == 0:
            raise ValueError("window must contain at least one term")
        if not np.all(np.isfinite(values)):
            raise ValueError("window terms must be finite")
        if origin_index < 1:
            raise ValueError("origin index must be >= 1")
        values.setflags(write=False)
        self.values = values
        self.origin_index = int(origin_index)
        self.spec = spec

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def terms(self) -> list[Complex2]:
        return [Complex2(z.real, z.imag) for z in self.values]

    def sup_norm(self) -> float:
        return float(max_norms(self.values).max())

    def mass(self) -> float:
        """Sum of term max-norms over the window."""
        return float(max_norms(self.values).sum())


def window(terms, origin_index: int = 1, spec: Optional["SequenceSpec"] = None) -> SequenceWindow:
    return SequenceWindow(terms, origin_index=origin_index, spec=spec)


# Family names accepted in sequence files.
FAMILY_EXPLICIT = "explicit"
FAMILY_LINEAR_RATIO = "linear-ratio"
FAMILY_ALT_LOG = "harmonic-log-alt"
FAMILY_DYADIC_TOWER = "dyadic-tower"

_SCALE_RULES = ("harmonic", "sqrt", "log")


@dataclass(frozen=True)
class SequenceSpec:
    """Generator description for a term sequence {c_n}.

    Families:
      explicit          terms are listed outright
      linear-ratio      c_n = (t + i) * s_n, so a_n/b_n == t at every index
                        (t = inf gives the pure-real direction (1, 0))
      harmonic-log-alt  c_n = (-1)^n / (n ln(n+1)) + i/n
      dyadic-tower      c_j = 2^-m_k + i 2^-(m_k+n_k) on the k-th block of
                        2^(m_k+n_k) consecutive indices
    """

    family: str
    terms: tuple[Complex2, ...] = ()
    ratio: float = 0.0
    scale: str = "harmonic"
    amplitude: float = 1.0
    m_schedule: tuple[int, ...] = ()
    n_schedule: tuple[int, ...] = ()
    limit: Optional[int] = None

    def __post_init__(self):
        if self.family == FAMILY_EXPLICIT:
            if not self.terms:
                raise ValueError("explicit family needs a nonempty term list")
        elif self.family == FAMILY_LINEAR_RATIO:
            if self.scale not in _SCALE_RULES:
                raise ValueError(f"unknown scale rule {self.scale!r}")
            if math.isnan(self.ratio):
                raise ValueError("ratio must be a real number or inf")
        elif self.family == FAMILY_ALT_LOG:
            pass
        elif self.family == FAMILY_DYADIC_TOWER:
            m, n = self.m_schedule, self.n_schedule
            if len(m) < 2 or len(n) < 2 or len(m) != len(n):
                raise ValueError("dyadic-tower needs m/n schedules of equal length >= 2")
            if m[0] != 0 or n[0] != 0:
                raise ValueError("dyadic-tower schedules must start at m0 = n0 = 0")
            if any(m[k + 1] <= m[k] for k in range(len(m) - 1)):
                raise ValueError("m schedule must be strictly increasing")
            if any(n[k + 1] < n[k] + m[k] + 3 for k in range(len(n) - 1)):
                raise ValueError("n schedule must satisfy n_{k+1} >= n_k + m_k + 3")
        else:
            raise ValueError(f"unknown family {self.family!r}")
        if self.limit is not None and self.limit < 1:
            raise ValueError("length limit must be positive")

    # -- construction helpers ------------------------------------------

    @classmethod
    def explicit(cls, terms, limit: Optional[int] = None) -> "SequenceSpec":
        converted = tuple(Complex2.from_complex(as_complex(t)) for t in terms)
        return cls(family=FAMILY_EXPLICIT, terms=converted, limit=limit)

    @classmethod
    def linear_ratio(cls, ratio: float, scale: str = "harmonic",
                     amplitude: float = 1.0, limit: Optional[int] = None) -> "SequenceSpec":
        return cls(family=FAMILY_LINEAR_RATIO, ratio=float(ratio), scale=scale,
                   amplitude=float(amplitude), limit=limit)

    @classmethod
    def alternating_log(cls, limit: Optional[int] = None) -> "SequenceSpec":
        return cls(family=FAMILY_ALT_LOG, limit=limit)

    @classmethod
    def dyadic_tower(cls, m_schedule: Sequence[int], n_schedule: Sequence[int],
                     limit: Optional[int] = None) -> "SequenceSpec":
        return cls(family=FAMILY_DYADIC_TOWER,
                   m_schedule=tuple(int(v) for v in m_schedule),
                   n_schedule=tuple(int(v) for v in n_schedule), limit=limit)

    @classmethod
    def minimal_tower(cls, blocks: int) -> "SequenceSpec":
        """Dyadic tower with the tightest admissible schedules m_k = k."""
        m = [0]
        n = [0]
        for _ in range(blocks):
            n.append(n[-1] + m[-1] + 3)
            m.append(m[-1] + 1)
        return cls.dyadic_tower(m, n)

    # -- evaluation ----------------------------------------------------

    def block_boundaries(self) -> list[int]:
        """Cumulative index just past each dyadic-tower block (block k ends
        at boundary[k] - 1; boundary[0] = 1 is the first index)."""
        if self.family != FAMILY_DYADIC_TOWER:
            raise ValueError("block boundaries only exist for dyadic-tower specs")
        bounds = [1]
        for k in range(1, len(self.m_schedule)):
            bounds.append(bounds[-1] + 2 ** (self.m_schedule[k] + self.n_schedule[k]))
        return bounds

    def max_index(self) -> Optional[int]:
        """Largest valid index, or None when unbounded."""
        if self.family == FAMILY_EXPLICIT:
            hard = len(self.terms)
        elif self.family == FAMILY_DYADIC_TOWER:
            hard = self.block_boundaries()[-1] - 1
        else:
            hard = None
        if self.limit is None:
            return hard
        if hard is None:
            return self.limit
        return min(hard, self.limit)

    def term(self, n: int) -> Complex2:
        """The n-th term (1-based)."""
        if n < 1:
            raise IndexError("term index must be >= 1")
        bound = self.max_index()
        if bound is not None and n > bound:
            raise IndexError(f"index {n} beyond limit {bound}")
        if self.family == FAMILY_EXPLICIT:
            return self.terms[n - 1]
        if self.family == FAMILY_LINEAR_RATIO:
            s = self.amplitude * _scale_value(self.scale, n)
            if math.isinf(self.ratio):
                return Complex2(s, 0.0)
            return Complex2(self.ratio * s, s)
        if self.family == FAMILY_ALT_LOG:
            return Complex2((-1.0) ** n / (n * math.log(n + 1)), 1.0 / n)
        # dyadic tower: locate the block containing index n
        bounds = self.block_boundaries()
        for k in range(1, len(bounds)):
            if bounds[k - 1] <= n < bounds[k]:
                a = 2.0 ** (-self.m_schedule[k])
                b = 2.0 ** (-(self.m_schedule[k] + self.n_schedule[k]))
                return Complex2(a, b)
        raise IndexError(f"index {n} beyond the scheduled blocks")

    def window(self, count: int, start: int = 1) -> SequenceWindow:
        """Materialise terms start..start+count-1 as a window."""
        if count < 1:
            raise ValueError("window length must be positive")
        values = [self.term(start + i).as_complex() for i in range(count)]
        return SequenceWindow(values, origin_index=start, spec=self)


def _scale_value(rule: str, n: int) -> float:
    if rule == "harmonic":
        return 1.0 / n
    if rule == "sqrt":
        return 1.0 / math.sqrt(n)
    if rule == "log":
        return 1.0 / (n * math.log(n + 1))
    raise ValueError(f"unknown scale rule {rule!r}")


# -- sign vectors ------------------------------------------------------


def as_sign_tuple(signs, expected_len: Optional[int] = None) -> tuple[int, ...]:
    """Validate a sign word: every entry exactly -1 or +1."""
    out = tuple(int(s) for s in signs)
    if any(s not in (-1, 1) for s in out):
        raise ValueError("signs must be -1 or +1")
    if expected_len is not None and len(out) != expected_len:
        raise ValueError(f"expected {expected_len} signs, got {len(out)}")
    return out


def partial_sums(win: SequenceWindow, signs) -> np.ndarray:
    """Prefix sums S_k = sum_{n<=k} x_n c_n, k = 1..N, as a complex array."""
    x = as_sign_tuple(signs, expected_len=len(win))
    return np.cumsum(np.asarray(x, dtype=np.float64) * win.values)


def prefix_bound(win: SequenceWindow, signs) -> float:
    """max_k ||S_k|| over the prefix sums for the given sign word."""
    return float(max_norms(partial_sums(win, signs)).max())


def rademacher_signs(x, n_terms: int) -> tuple[int, ...]:
    """Signs R(2^(n-1) x) for n = 1..n_terms: +1 while frac < 1/2, else -1.

    Equivalently the n-th binary digit of x (digit 1 -> -1).  Evaluated in
    exact rational arithmetic so deep digits stay correct.
    """
    if n_terms < 1:
        raise ValueError("need at least one sign")
    y = Fraction(x)
    if not 0 <= y < 1:
        raise ValueError("x must lie in [0, 1)")
    out = []
    for _ in range(n_terms):
        out.append(1 if y < Fraction(1, 2) else -1)
        y = (2 * y) % 1
    return tuple(out)


# -- the quarter-width dyadic lattice ----------------------------------


class QuarterLatticeResult(NamedTuple):
    member: bool
    witness: Optional[int]


def in_dyadic_quarter_lattice(y) -> QuarterLatticeResult:
    """Whether dist(2^n y, Z) <= 1/4 for some n >= 1, decided exactly.

    The doubled remainders 2^n p mod q are eventually periodic, so scanning
    until a remainder repeats covers the preperiod plus one full period.
    Returns the smallest witnessing exponent when membership holds.
    """
    y = Fraction(y)
    q = y.denominator
    seen = set()
    r = y.numerator % q
    n = 0
    while True:
        n += 1
        r = (2 * r) % q
        if 4 * min(r, q - r) <= q:
            return QuarterLatticeResult(True, n)
        if r in seen:
            return QuarterLatticeResult(False, None)
        seen.add(r)


class TowerLatticeResult(NamedTuple):
    member: bool
    witness: Optional[int]
    block_totals: tuple[int, ...]
    pivot: int


def tower_imag_in_lattice(win: SequenceWindow, signs) -> TowerLatticeResult:
    """Certify that a block-aligned tower window's signed imaginary part
    lands in the quarter-width dyadic lattice.

    The imaginary part equals sum_k l_k 2^-(m_k+n_k) with integer block
    totals l_k.  Pick the smallest pivot K0 with |l_k| 2^-m_k <= 1 beyond
    it; then 2^(m_K0+n_K0) times the value is an integer plus a tail of
    magnitude at most 2^-(n_{K0+1} - n_K0 - m_K0 - 1) <= 1/4, which is the
    witnessed membership.  All arithmetic is exact.
    """
    spec = win.spec
    if spec is None or spec.family != FAMILY_DYADIC_TOWER:
        raise ValueError("window must come from a dyadic-tower spec")
    if win.origin_index != 1:
        raise ValueError("window must start at index 1")
    bounds = spec.block_boundaries()
    n_total = len(win)
    if (n_total + 1) not in bounds:
        raise ValueError("window must end exactly at a block boundary")
    x = as_sign_tuple(signs, expected_len=n_total)

    k_max = bounds.index(n_total + 1)
    totals = []
    for k in range(1, k_max + 1):
        lo, hi = bounds[k - 1], bounds[k]
        totals.append(sum(x[lo - 1:hi - 1]))

    m, n = spec.m_schedule, spec.n_schedule
    imag = sum(Fraction(l, 2 ** (m[k + 1] + n[k + 1])) for k, l in enumerate(totals))

    # smallest pivot >= 1 with |l_k| <= 2^m_k for every later block
    pivot = k_max
    for k0 in range(1, k_max + 1):
        if all(abs(totals[k - 1]) <= 2 ** m[k] for k in range(k0 + 1, k_max + 1)):
            pivot = k0
            break

    exponent = m[pivot] + n[pivot]
    scaled = imag * 2 ** exponent
    frac = scaled - round(scaled)
    member = 4 * abs(frac) <= 1
    if member and pivot < k_max:
        # the proof's tail bound must dominate the observed fractional part
        tail_bound = Fraction(1, 2 ** (n[pivot + 1] - n[pivot] - m[pivot] - 1))
        assert abs(frac) <= min(tail_bound, Fraction(1, 4))
    return TowerLatticeResult(member, exponent if member else None, tuple(totals), pivot)


def pair_always_exceeds_unit(c1: Complexish, c2: Complexish) -> bool:
    """Algebraic form of ||c1 +- c2|| > 1 for both signs (unit-ball terms):
    |a1|+|a2| > 1, |b1|+|b2| > 1, and a1 a2 b1 b2 < 0."""
    z1, z2 = as_complex(c1), as_complex(c2)
    return (abs(z1.real) + abs(z2.real) > 1.0
            and abs(z1.imag) + abs(z2.imag) > 1.0
            and z1.real * z2.real * z1.imag * z2.imag < 0.0)
