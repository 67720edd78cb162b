import math

import numpy as np
import pytest

from signrange import (SequenceSpec, SequenceWindow, apply_linear_map,
                       detect_ratios, direction_vector, directional_mass,
                       dyadic_ratio_extract, nonsummability_profile,
                       partial_sums, regroup, window)
from conftest import interleave


class TestDyadicExtract:
    def test_constant_ratio_exact(self):
        w = SequenceSpec.linear_ratio(0.5, amplitude=2.0).window(100)  # (1+2i)/n
        report = dyadic_ratio_extract(w, 10)
        # nested halving lands on the boundary value from below
        assert report.ratio == 0.5 - 2.0 ** -10
        assert abs(report.ratio - 0.5) <= 2.0 ** -10
        assert len(report.index_mask) == 100
        assert report.branch == "b"
        assert report.horizon == 100

    def test_interval_contains_true_ratio_at_every_depth(self):
        w = SequenceSpec.linear_ratio(0.5, amplitude=2.0).window(64)
        for depth in range(1, 13):
            lo, hi = dyadic_ratio_extract(w, depth).interval
            assert lo <= 0.5 <= hi

    def test_retained_mass_nonincreasing_in_depth(self, alt_log_1k):
        masses = [dyadic_ratio_extract(alt_log_1k, d).mass for d in range(1, 11)]
        assert all(m1 >= m2 for m1, m2 in zip(masses, masses[1:]))

    def test_interleaved_one_two(self):
        w = interleave(lambda k: (1 + 1j) / k, lambda k: (2 + 1j) / k, pairs=200)
        report = dyadic_ratio_extract(w, 8)
        assert report.branch == "a"
        # reciprocal parametrisation scales the tolerance by t^2
        assert abs(report.ratio - 2.0) <= 4.0 * 2.0 ** -8

    def test_alternating_log_is_a_finite_horizon_diagnostic(self):
        # the infinite sequence has ratio 0, but the mass a finite window can
        # see is truncated at ratio scale ~1/ln(N); the descent is
        # deterministic, so the values are frozen, decreasing with horizon
        r3 = dyadic_ratio_extract(SequenceSpec.alternating_log().window(10 ** 3), 12)
        r4 = dyadic_ratio_extract(SequenceSpec.alternating_log().window(10 ** 4), 12)
        assert r3.ratio == pytest.approx(0.156982421875, abs=1e-12)
        assert r4.ratio == pytest.approx(0.125732421875, abs=1e-12)
        assert r4.ratio < r3.ratio

    def test_pure_real_terms_report_infinite_ratio(self):
        w = window([1.0 / k for k in range(1, 50)])
        report = dyadic_ratio_extract(w, 8)
        assert math.isinf(report.ratio)
        assert report.branch == "a"

    def test_depth_validation(self):
        with pytest.raises(ValueError):
            dyadic_ratio_extract(window([1.0]), 0)


class TestDetectRatios:
    def test_two_families(self):
        w = interleave(lambda k: (1 + 1j) / k, lambda k: (3 + 1j) / k, pairs=5000)
        reports = detect_ratios(w, depth=10, mass_threshold=1.0)
        assert len(reports) == 2
        assert reports[0].mass > reports[1].mass
        assert abs(reports[0].ratio - 3.0) <= 0.05
        assert abs(reports[1].ratio - 1.0) <= 0.05
        masks = [r.index_mask for r in reports]
        assert not (masks[0] & masks[1])

    def test_constant_ratio_single_report(self):
        w = SequenceSpec.linear_ratio(2.0).window(400)
        reports = detect_ratios(w, depth=8, mass_threshold=1.0)
        assert len(reports) == 1
        assert len(reports[0].index_mask) == 400

    def test_zero_window_empty(self):
        assert detect_ratios(window([0.0, 0.0]), 8, 1.0) == []

    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            detect_ratios(window([1.0]), 8, 0.0)


class TestProfile:
    def test_one_ratio_direction_cancels_exactly(self):
        w = SequenceSpec.linear_ratio(1.0).window(500)  # (1+i)/n
        profile = nonsummability_profile(w, 4)
        assert profile.min_mass == 0.0
        assert profile.min_angle == pytest.approx(3 * math.pi / 4)
        wide = nonsummability_profile(w, 16)
        assert wide.min_mass == 0.0

    def test_zero_window(self):
        profile = nonsummability_profile(window([0.0, 0.0]), 8)
        assert profile.min_mass == 0.0

    def test_horizon_recorded(self, alt_log_1k):
        assert nonsummability_profile(alt_log_1k, 8).horizon == 1000

    def test_half_turn_symmetry_exact(self, alt_log_1k):
        for j in range(8):
            alpha, beta = direction_vector(j, 8)
            assert directional_mass(alt_log_1k, (alpha, beta)) == \
                directional_mass(alt_log_1k, (-alpha, -beta))

    def test_adjacent_sample_continuity(self, alt_log_1k):
        m = 32
        profile = nonsummability_profile(alt_log_1k, m)
        masses = [s[1] for s in profile.samples]
        # |projection difference| <= |c|_2 * dtheta <= sqrt(2)*maxnorm*dtheta
        lip = math.sqrt(2.0) * alt_log_1k.mass() * math.pi / m
        for m1, m2 in zip(masses, masses[1:]):
            assert abs(m1 - m2) <= lip + 1e-9

    def test_sample_count_validation(self):
        with pytest.raises(ValueError):
            nonsummability_profile(window([1.0]), 3)


class TestLinearMap:
    def test_identity(self, alt_log_1k):
        out = apply_linear_map(alt_log_1k, [[1, 0], [0, 1]])
        assert np.array_equal(out.values, alt_log_1k.values)

    def test_swap(self):
        w = SequenceSpec.linear_ratio(0.5, amplitude=2.0).window(10)  # (1+2i)/n
        out = apply_linear_map(w, [[0, 1], [1, 0]])
        expected = [(2 + 1j) / k for k in range(1, 11)]
        assert np.allclose(out.values, expected)

    def test_composition(self, alt_log_1k):
        rng = np.random.default_rng(61)
        m1 = rng.uniform(-1.5, 1.5, (2, 2)) + np.eye(2)
        m2 = rng.uniform(-1.5, 1.5, (2, 2)) + np.eye(2)
        once = apply_linear_map(apply_linear_map(alt_log_1k, m1), m2)
        both = apply_linear_map(alt_log_1k, m2 @ m1)
        assert np.allclose(once.values, both.values, atol=1e-12)

    def test_aligned_two_ratio_window_reports_axes(self):
        from signrange import two_ratio_alignment
        w = interleave(lambda k: (1 + 1j) / k, lambda k: (3 + 1j) / k, pairs=2000)
        m = two_ratio_alignment(1.0, 3.0)
        aligned = apply_linear_map(w, m)
        reports = detect_ratios(aligned, depth=10, mass_threshold=1.0)
        ratios = sorted(r.ratio for r in reports)
        assert math.isinf(ratios[-1])
        assert abs(ratios[0]) <= 0.01

    def test_singular_rejected(self, alt_log_1k):
        with pytest.raises(ValueError):
            apply_linear_map(alt_log_1k, [[1, 2], [2, 4]])


class TestRegroup:
    def test_identity_regrouping(self, alt_log_1k):
        blocks = [(i,) for i in range(1, len(alt_log_1k) + 1)]
        out = regroup(alt_log_1k, blocks, [1] * len(alt_log_1k))
        assert np.array_equal(out.values, alt_log_1k.values)

    def test_constant_cancellation(self):
        w = window([0.5 + 0.5j] * 10)
        blocks = [(2 * i + 1, 2 * i + 2) for i in range(5)]
        out = regroup(w, blocks, [1, -1] * 5)
        assert np.allclose(out.values, 0.0)

    def test_alternating_log_pair_regrouping_matches_closed_form(self):
        # positions 4k+1, 4k+2 of the alternating-log family, regrouped in
        # pairs with signs (-1, +1), give alpha_k + i beta_k with
        # alpha_k = 1/((4k+1) ln(4k+2)) + 1/((4k+2) ln(4k+3)) and
        # beta_k = -1/((4k+1)(4k+2)); the term ratio |alpha/beta| blows up
        full = SequenceSpec.alternating_log().window(4002)
        positions = [p for p in range(1, 4003) if p % 4 in (1, 2)]
        sub = SequenceWindow(full.values[[p - 1 for p in positions]])
        pairs = len(sub) // 2
        blocks = [(2 * i + 1, 2 * i + 2) for i in range(pairs)]
        grouped = regroup(sub, blocks, [-1, 1] * pairs)
        for k in (0, 1, 10, 100):
            n = 4 * k + 1
            alpha = 1.0 / (n * math.log(n + 1)) + 1.0 / ((n + 1) * math.log(n + 2))
            beta = -1.0 / (n * (n + 1))
            z = grouped.values[k]
            assert z.real == pytest.approx(alpha, rel=1e-12)
            assert z.imag == pytest.approx(beta, rel=1e-12)
        ratios = np.abs(grouped.values.real / grouped.values.imag)
        assert ratios[-1] > 100 * ratios[0]
        assert np.all(np.diff(ratios) > 0)

    def test_boundary_sampling_property(self):
        rng = np.random.default_rng(67)
        w = window(rng.uniform(-1, 1, 12) + 1j * rng.uniform(-1, 1, 12))
        blocks = [(1, 2, 3), (4, 5), (6, 7, 8, 9), (10, 11, 12)]
        signs = list(rng.choice((-1, 1), 12))
        grouped = regroup(w, blocks, signs)
        grouped_sums = partial_sums(grouped, [1] * len(blocks))
        original_sums = partial_sums(w, signs)
        boundaries = np.cumsum([len(b) for b in blocks]) - 1
        assert np.allclose(grouped_sums, original_sums[boundaries], atol=1e-12)

    def test_partition_validation(self):
        w = window([1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            regroup(w, [(1, 2)], [1, 1, 1])
        with pytest.raises(ValueError):
            regroup(w, [(1, 3), (2,)], [1, 1, 1])
