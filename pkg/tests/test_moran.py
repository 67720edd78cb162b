import math

import numpy as np
import pytest
from scipy.spatial import cKDTree

from signrange import (BracketViolationError, InsufficientMassError, MoranSystem,
                       Rect, SequenceSpec, TargetEscapeError, address_for_target,
                       address_signs, attractor_points, build_two_ratio_system,
                       compose_at_zero, covering_check, geometric_eta,
                       level_translations, max_norm, nested_ball_ok,
                       select_blocks, uniform_system, window)

QUADRANTS = [2.5 + 2.5j, 2.5 - 2.5j, -2.5 + 2.5j, -2.5 - 2.5j]
SQUARE = Rect(-5, 5, -5, 5)

# contraction large enough for the four-map covering (needs >= 320/353)
GOOD_DELTA = 15.0 / 16.0


def build_good(levels=8, count=1 << 17, delta=GOOD_DELTA):
    win_a = SequenceSpec.linear_ratio(2.0).window(count)
    win_b = SequenceSpec.linear_ratio(1.0 / 3.0, amplitude=3.0).window(count)
    return build_two_ratio_system(win_a, win_b, delta, levels)


class TestMoranSystem:
    def test_validation(self):
        with pytest.raises(ValueError):
            MoranSystem(contraction=1.0, levels=((0j,),))
        with pytest.raises(ValueError):
            MoranSystem(contraction=0.5, levels=())
        with pytest.raises(ValueError):
            MoranSystem(contraction=0.5, levels=((),))

    def test_offset_bound(self):
        system = uniform_system(0.5, [1 + 2j, -3j], depth=4)
        assert system.offset_bound == 3.0
        assert system.radius_bound == 12.0

    def test_nested_ball(self):
        assert nested_ball_ok(uniform_system(0.5, QUADRANTS, depth=3))


class TestAttractor:
    def test_single_map_fixed_point(self):
        system = uniform_system(0.5, [0.0], depth=20)
        cloud = attractor_points(system, 12)
        assert np.array_equal(cloud.points, [0j])
        assert cloud.error_radius == 0.5 ** 12 * system.radius_bound

    def test_binary_system_dyadics(self):
        system = uniform_system(0.5, [0.0, 0.5], depth=12)
        cloud = attractor_points(system, 10)
        expected = np.arange(1024) / 1024.0
        assert np.allclose(np.sort(cloud.points.real), expected)
        assert np.allclose(cloud.points.imag, 0.0)

    def test_refinement_consistency(self):
        system = uniform_system(0.5, QUADRANTS, depth=8)
        coarse = attractor_points(system, 5)
        fine = attractor_points(system, 6)
        tree = cKDTree(np.column_stack((coarse.points.real, coarse.points.imag)))
        d = tree.query(np.column_stack((fine.points.real, fine.points.imag)),
                       p=np.inf)[0]
        assert d.max() <= 0.5 ** 5 * system.radius_bound + 1e-12

    def test_parallel_identical(self):
        system = uniform_system(0.5, QUADRANTS, depth=8)
        a = attractor_points(system, 8, jobs=1).points
        b = attractor_points(system, 8, jobs=4).points
        assert np.array_equal(a, b)

    def test_enumeration_guard(self):
        system = uniform_system(0.5, QUADRANTS, depth=14)
        with pytest.raises(ValueError):
            attractor_points(system, 13)  # 4^13 > 2^24


class TestCoveringCheck:
    def test_binary_interval(self):
        system = uniform_system(0.5, [0.0, 0.5], depth=3)
        verdicts = covering_check(system, Rect(0, 1, 0, 0))
        assert all(v.covered for v in verdicts)

    def test_shrinking_single_map(self):
        system = uniform_system(0.5, [0.0], depth=1)
        verdicts = covering_check(system, Rect(0, 1, 0, 1))
        assert not verdicts[0].covered
        w = verdicts[0].witness
        assert w is not None and (w.real > 0.5 or w.imag > 0.5)

    def test_quadrant_tiling(self):
        system = uniform_system(0.5, QUADRANTS, depth=6)
        assert all(v.covered for v in covering_check(system, SQUARE))

    def test_tiling_breaks_when_offset_shrinks(self):
        shrunk = [0.9 * d for d in QUADRANTS]
        system = uniform_system(0.5, shrunk, depth=1)
        assert not covering_check(system, SQUARE)[0].covered


class TestSelectBlocks:
    def test_exact_ratio_brackets(self):
        win = SequenceSpec.linear_ratio(2.0).window(1 << 15)
        delta, count = 0.5, 8
        eta = geometric_eta(delta, count)
        sel = select_blocks(win, 2.0, delta, eta, count)
        for k in range(1, count + 1):
            target = delta ** k
            assert abs(sel.mass_sums[k - 1] - target) <= eta[k - 1]
            ratio = sel.real_sums[k - 1] / sel.mass_sums[k - 1]
            assert abs(ratio - 2.0) < eta[k - 1]
        # increasing disjoint blocks
        for b1, b2 in zip(sel.blocks, sel.blocks[1:]):
            assert max(b1) < min(b2)

    def test_packet_exact_sum(self):
        # packets of m equal values b_n = delta^k/m land exactly on delta^k
        delta = 0.5
        eta = [delta / 8]
        m = 32
        win = window([(2 + 1j) * (delta / m) for _ in range(m + 8)])
        sel = select_blocks(win, 2.0, delta, eta, 1)
        # greedy stops at the first entry into the bracket
        assert sel.mass_sums[0] >= delta - eta[0]
        assert sel.mass_sums[0] <= delta + eta[0]

    def test_insufficient_mass(self):
        win = window([(2 + 1j) * 0.4] * 50)  # all terms too large for eta
        with pytest.raises(InsufficientMassError) as err:
            select_blocks(win, 2.0, 0.5, geometric_eta(0.5, 3), 3)
        assert err.value.level == 1
        assert err.value.shortfall > 0

    def test_parameter_validation(self):
        win = window([(2 + 1j) * 0.01] * 10)
        with pytest.raises(ValueError):
            select_blocks(win, 2.0, 1.5, [0.1], 1)
        with pytest.raises(ValueError):
            select_blocks(win, math.inf, 0.5, [0.1], 1)
        with pytest.raises(ValueError):
            select_blocks(win, 2.0, 0.5, [0.0], 1)


class TestTwoRatioBuild:
    def test_brackets_and_structure(self):
        build = build_good(levels=8)
        delta = build.system.contraction
        for k in range(1, 9):
            dk = delta ** k
            a1 = build.selection_a.real_sums[k - 1]
            b1 = build.selection_a.mass_sums[k - 1]
            alpha1 = build.selection_b.mass_sums[k - 1]
            beta1 = build.selection_b.real_sums[k - 1]
            assert 105 / 64 * dk <= a1 <= 153 / 64 * dk
            assert 7 / 8 * dk <= b1 <= 9 / 8 * dk
            assert 7 / 8 * dk <= alpha1 <= 9 / 8 * dk
            assert 161 / 64 * dk <= beta1 <= 225 / 64 * dk
            # the containments behind the covering argument
            assert 0.0 <= a1 + alpha1 <= 5 * dk and 0.0 <= b1 + beta1 <= 5 * dk
            assert 0.0 <= a1 - alpha1 <= 5 * dk and -5 * dk <= b1 - beta1 <= 0.0
            # negation-symmetric translation set
            d = build.translations[k - 1]
            assert d[2] == -d[0] and d[3] == -d[1]

    def test_covering_holds_at_large_contraction(self):
        build = build_good(levels=8)
        assert all(v.covered for v in covering_check(build.system, SQUARE))
        assert nested_ball_ok(build.system)

    def test_covering_fails_at_half(self):
        build = build_good(levels=4, delta=0.5, count=1 << 15)
        verdicts = covering_check(build.system, SQUARE)
        assert not any(v.covered for v in verdicts)

    def test_level_translation_formula(self):
        d = level_translations(1.0, 0.5, 0.5, 1.5)
        assert d == (1.5 + 2j, 0.5 - 1j, -1.5 - 2j, -0.5 + 1j)

    def test_bracket_violation_reported(self):
        # ratio-4 window pretending to be ratio-2 input: selection fails the
        # gamma sets, so mass never accumulates
        win_a = SequenceSpec.linear_ratio(4.0).window(1 << 12)
        win_b = SequenceSpec.linear_ratio(1 / 3, amplitude=3.0).window(1 << 12)
        with pytest.raises((BracketViolationError, InsufficientMassError)):
            build_two_ratio_system(win_a, win_b, 0.5, 4)


class TestAddress:
    def test_binary_third(self):
        system = uniform_system(0.5, [0.0, 0.5], depth=12)
        region = Rect(0, 1, 0, 0)
        addr = address_for_target(system, 1.0 / 3.0, 10, region)
        assert addr.digits == (1, 2) * 5
        value = compose_at_zero(system, addr)
        assert abs(value - 1.0 / 3.0) <= 0.5 ** 10 * system.radius_bound

    def test_round_trip(self):
        system = uniform_system(0.5, QUADRANTS, depth=10)
        rng = np.random.default_rng(71)
        for _ in range(20):
            digits = tuple(int(d) for d in rng.integers(1, 5, size=8))
            from signrange import Address
            target = compose_at_zero(system, Address(digits))
            addr = address_for_target(system, target, 8, SQUARE)
            assert compose_at_zero(system, addr) == pytest.approx(target, abs=1e-9)

    def test_escape_reported(self):
        system = uniform_system(0.5, [0.0], depth=4)
        with pytest.raises(TargetEscapeError):
            address_for_target(system, 0.9 + 0.9j, 3, Rect(0, 1, 0, 1))

    def test_target_outside_region(self):
        system = uniform_system(0.5, [0.0, 0.5], depth=4)
        with pytest.raises(ValueError):
            address_for_target(system, 2.0, 3, Rect(0, 1, 0, 0))

    def test_paper_style_system_codes_targets(self):
        build = build_good(levels=8)
        system = build.system
        for target in (0j, 3 - 2j, -4.5 + 4.5j):
            addr = address_for_target(system, target, 8, SQUARE)
            err = max_norm(compose_at_zero(system, addr) - complex(target))
            assert err <= system.contraction ** 8 * max(system.radius_bound, 5.0)

    def test_address_signs_reproduce_translation_sums(self):
        build = build_good(levels=6)
        from signrange import Address
        rng = np.random.default_rng(73)
        for _ in range(5):
            digits = tuple(int(d) for d in rng.integers(1, 5, size=6))
            addr = Address(digits)
            sign_a, sign_b = address_signs(build, addr)
            total = 0j
            for pos, s in sign_a.items():
                total += s * build.window_a.values[pos]
            for pos, s in sign_b.items():
                total += s * build.window_b.values[pos]
            expected = sum(build.translations[k][d - 1]
                           for k, d in enumerate(digits))
            assert abs(total - expected) <= 1e-12


class TestQuadrantFillDemo:
    def test_attractor_fills_square_within_certificate(self):
        # end-to-end: exact covering at every level implies the depth-d cloud
        # is a (r^d R)-net of the square
        system = uniform_system(0.5, QUADRANTS, depth=10)
        assert all(v.covered for v in covering_check(system, SQUARE))
        cloud = attractor_points(system, 10)
        xs = np.linspace(-5, 5, 101)
        grid = np.column_stack([g.ravel() for g in np.meshgrid(xs, xs)])
        tree = cKDTree(np.column_stack((cloud.points.real, cloud.points.imag)))
        dists = tree.query(grid, p=np.inf)[0]
        assert dists.max() <= cloud.error_radius + 0.1
