import math
from fractions import Fraction

import numpy as np
import pytest

from signrange import (Complex2, SequenceSpec, SequenceWindow, as_sign_tuple,
                       in_dyadic_quarter_lattice, max_norm,
                       pair_always_exceeds_unit, partial_sums, prefix_bound,
                       rademacher_signs, tower_imag_in_lattice, window)


class TestFamilies:
    def test_alternating_log_first_term(self):
        c1 = SequenceSpec.alternating_log().term(1)
        assert c1.re == pytest.approx(-1.0 / math.log(2.0), abs=0, rel=1e-15)
        assert c1.im == 1.0

    def test_alternating_log_formula(self):
        spec = SequenceSpec.alternating_log()
        for n in (2, 3, 17, 100):
            c = spec.term(n)
            assert c.re == (-1.0) ** n / (n * math.log(n + 1))
            assert c.im == 1.0 / n

    def test_tower_first_block(self):
        spec = SequenceSpec.dyadic_tower([0, 1], [0, 3])
        c = spec.term(1)
        assert (c.re, c.im) == (0.5, 0.0625)

    def test_tower_block_layout(self):
        spec = SequenceSpec.minimal_tower(3)
        bounds = spec.block_boundaries()
        # block k holds 2^(m_k + n_k) indices, so its |b| values sum to 1
        for k in range(1, len(bounds) - 1):
            size = bounds[k] - bounds[k - 1]
            b = spec.term(bounds[k - 1]).im
            assert size * b == pytest.approx(1.0, abs=1e-12)
        with pytest.raises(IndexError):
            spec.term(bounds[-1])

    def test_tower_schedule_validation(self):
        with pytest.raises(ValueError):
            SequenceSpec.dyadic_tower([0, 1], [0, 2])   # gap too small
        with pytest.raises(ValueError):
            SequenceSpec.dyadic_tower([0, 0], [0, 3])   # m not increasing
        with pytest.raises(ValueError):
            SequenceSpec.dyadic_tower([1, 2], [0, 4])   # m0 != 0

    def test_explicit_lookup_and_bounds(self):
        spec = SequenceSpec.explicit([1 + 2j])
        assert (spec.term(1).re, spec.term(1).im) == (1.0, 2.0)
        with pytest.raises(IndexError):
            spec.term(2)

    def test_linear_ratio_directions(self):
        spec = SequenceSpec.linear_ratio(2.0)
        c = spec.term(5)
        assert c.re / c.im == pytest.approx(2.0)
        inf_spec = SequenceSpec.linear_ratio(math.inf)
        assert inf_spec.term(3).im == 0.0


class TestValues:
    def test_max_norm_cases(self):
        assert max_norm(3 - 4j) == 4.0
        assert max_norm(0) == 0.0
        assert max_norm(-2 + 2j) == 2.0

    def test_complex2_requires_finite(self):
        with pytest.raises(ValueError):
            Complex2(math.nan, 0.0)
        with pytest.raises(ValueError):
            Complex2(0.0, math.inf)

    def test_window_validation(self):
        with pytest.raises(ValueError):
            SequenceWindow([])
        with pytest.raises(ValueError):
            SequenceWindow([1.0], origin_index=0)


class TestPartialSums:
    def test_two_term(self):
        sums = partial_sums(window([1, 1j]), [1, -1])
        assert np.allclose(sums, [1, 1 - 1j])

    def test_single_flip(self):
        c = 0.3 - 0.7j
        assert partial_sums(window([c]), [-1])[0] == -c

    def test_geometric_prefix(self):
        sums = partial_sums(window([0.5, 0.25, 0.125]), [1, 1, 1])
        assert np.allclose(sums, [0.5, 0.75, 0.875])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            partial_sums(window([1, 2]), [1])

    def test_sign_linearity(self):
        rng = np.random.default_rng(3)
        w = window(rng.uniform(-1, 1, 40) + 1j * rng.uniform(-1, 1, 40))
        signs = rng.choice((-1, 1), size=40)
        flipped = -signs
        assert np.array_equal(partial_sums(w, signs), -partial_sums(w, flipped))
        assert prefix_bound(w, signs) == prefix_bound(w, flipped)

    def test_sign_validation(self):
        with pytest.raises(ValueError):
            as_sign_tuple([1, 0, -1])


class TestRademacher:
    def test_all_zero_digits(self):
        assert rademacher_signs(0, 3) == (1, 1, 1)

    def test_half(self):
        assert rademacher_signs(Fraction(1, 2), 3) == (-1, 1, 1)

    def test_three_quarters(self):
        assert rademacher_signs(Fraction(3, 4), 2) == (-1, -1)

    def test_domain(self):
        with pytest.raises(ValueError):
            rademacher_signs(1, 2)
        with pytest.raises(ValueError):
            rademacher_signs(-0.25, 2)

    def test_matches_binary_digits(self):
        # independent digit oracle: digit n of x is floor(2^n x) mod 2
        rng = np.random.default_rng(11)
        for _ in range(50):
            x = Fraction(int(rng.integers(0, 997)), 997)
            signs = rademacher_signs(x, 24)
            digits = [(x * 2 ** n - (x * 2 ** n) % 1) % 2 for n in range(1, 25)]
            assert signs == tuple(1 if d == 0 else -1 for d in digits)


class TestQuarterLattice:
    def test_one_third_never_lands(self):
        res = in_dyadic_quarter_lattice(Fraction(1, 3))
        assert res.member is False and res.witness is None

    def test_zero(self):
        assert in_dyadic_quarter_lattice(0) == (True, 1)

    def test_thirteen_fiftieths(self):
        # independent oracle: scan n = 1..10 exactly
        y = Fraction(13, 50)
        first = next(n for n in range(1, 11)
                     if min((2 ** n * y) % 1, 1 - (2 ** n * y) % 1) <= Fraction(1, 4))
        assert first == 2
        assert in_dyadic_quarter_lattice(y) == (True, 2)

    def test_halving_monotone(self):
        rng = np.random.default_rng(5)
        for _ in range(60):
            y = Fraction(int(rng.integers(-500, 500)), int(rng.integers(1, 400)))
            res = in_dyadic_quarter_lattice(y)
            if res.member:
                half = in_dyadic_quarter_lattice(y / 2)
                assert half.member and half.witness <= res.witness + 1

    def test_agrees_with_direct_scan(self):
        rng = np.random.default_rng(17)
        for _ in range(40):
            y = Fraction(int(rng.integers(0, 200)), int(rng.integers(1, 64)))
            res = in_dyadic_quarter_lattice(y)
            direct = any(min((2 ** n * y) % 1, 1 - (2 ** n * y) % 1) <= Fraction(1, 4)
                         for n in range(1, 40))
            assert res.member == direct


class TestTowerLattice:
    def make_window(self, blocks=2):
        spec = SequenceSpec.minimal_tower(blocks)
        n = spec.block_boundaries()[-1] - 1
        return spec.window(n), spec

    def exact_imag(self, spec, signs):
        bounds = spec.block_boundaries()
        total = Fraction(0)
        for k in range(1, len(bounds)):
            l_k = sum(signs[bounds[k - 1] - 1:bounds[k] - 1])
            total += Fraction(l_k, 2 ** (spec.m_schedule[k] + spec.n_schedule[k]))
        return total

    def test_all_plus_first_blocks(self):
        win, spec = self.make_window()
        res = tower_imag_in_lattice(win, [1] * len(win))
        assert res.member

    def test_cancelling_block(self):
        win, spec = self.make_window()
        signs = [1, -1] * (len(win) // 2)
        res = tower_imag_in_lattice(win, signs)
        assert res.member
        assert all(l == 0 for l in res.block_totals)

    def test_random_draws_agree_with_lattice_scan(self):
        win, spec = self.make_window()
        rng = np.random.default_rng(23)
        for _ in range(200):
            signs = rng.choice((-1, 1), size=len(win))
            res = tower_imag_in_lattice(win, signs)
            scan = in_dyadic_quarter_lattice(self.exact_imag(spec, list(signs)))
            assert res.member and scan.member

    def test_block_alignment_required(self):
        win, spec = self.make_window()
        off = SequenceWindow(win.values[:-1], spec=spec)
        with pytest.raises(ValueError):
            tower_imag_in_lattice(off, [1] * (len(win) - 1))
        plain = SequenceWindow(win.values)
        with pytest.raises(ValueError):
            tower_imag_in_lattice(plain, [1] * len(win))


class TestPairingFact:
    def direct(self, c1, c2):
        return max_norm(c1 + c2) > 1.0 and max_norm(c1 - c2) > 1.0

    def test_random_sampling(self):
        rng = np.random.default_rng(29)
        for _ in range(3000):
            c1 = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
            c2 = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
            assert self.direct(c1, c2) == pair_always_exceeds_unit(c1, c2)

    def test_boundary_grid(self):
        grid = [s * 0.25 * k for k in range(0, 5) for s in (1, -1)]
        vals = sorted(set(grid))
        for a1 in vals:
            for b1 in vals:
                for a2 in vals:
                    for b2 in vals:
                        c1, c2 = complex(a1, b1), complex(a2, b2)
                        assert self.direct(c1, c2) == pair_always_exceeds_unit(c1, c2)
