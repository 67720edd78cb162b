"""Toolkit for the range of signed complex series.

Pick signs for sum(+-c_n): keep prefixes bounded, hit real or complex
targets, extract coordinate ratios, build covering function systems, and
cross-check everything against exhaustive enumeration at small N.
"""

from .density import (BoxDimResult, DensityReport, HolderReport, IndexSet,
                      ball_prefix_membership, box_dim_estimate, delete_indices,
                      density, holder_check, seq_metric)
from .errors import BracketViolationError, InsufficientMassError, TargetEscapeError
from .moran import (Address, AttractorCloud, BlockSelection, LevelCoverage,
                    MoranSystem, TwoRatioSystem, address_for_target,
                    address_signs, attractor_points, build_two_ratio_system,
                    compose_at_zero, covering_check, geometric_eta,
                    level_translations, nested_ball_ok, select_blocks,
                    uniform_system)
from .oracle import (CoverageReport, DiscrepancyResult, RangeSet, Rect,
                     epsilon_net_coverage, exact_range, min_prefix_discrepancy,
                     set_distance, transform_equivariance_check)
from .ratios import (DirectionProfile, RatioReport, apply_linear_map,
                     detect_ratios, direction_vector, directional_mass,
                     dyadic_ratio_extract, nonsummability_profile, regroup)
from .selection import (SelectionResult, approx_target_complex, bounded_signs,
                        combine5, greedy_envelope_holds, greedy_target_real,
                        pairable, single_ratio_alignment, tail_blocks,
                        tail_control, two_ratio_alignment)
from .series import (DEFAULT_SEED, Complex2, QuarterLatticeResult, SequenceSpec,
                     SequenceWindow, TowerLatticeResult, as_complex,
                     as_sign_tuple, in_dyadic_quarter_lattice, max_norm,
                     max_norms, pair_always_exceeds_unit, partial_sums,
                     prefix_bound, rademacher_signs, tower_imag_in_lattice,
                     window)

__version__ = "0.1.0"
