"""Command-line front end.

Every subcommand reads structured-text inputs, writes its primary artifact
at --out, and drops CSV / portable-graymap / PNG companions next to it.
Identical configuration and seed give byte-identical artifacts at any
parallelism level.

Exit codes: 0 success, 2 validation or precondition error, 3 a guarantee
check failed (a finding worth inspecting, not a crash).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import fileio
from .density import (IndexSet, ball_prefix_membership, box_dim_estimate,
                      density, holder_check)
from .errors import BracketViolationError, InsufficientMassError, TargetEscapeError
from .figures import save_curve_figure, save_points_figure, save_profile_figure
from .moran import (attractor_points, build_two_ratio_system, covering_check,
                    nested_ball_ok)
from .oracle import (Rect, exact_range, min_prefix_discrepancy,
                     transform_equivariance_check)
from .ratios import detect_ratios, nonsummability_profile
from .selection import (approx_target_complex, bounded_signs,
                        greedy_target_real, tail_control)
from .series import DEFAULT_SEED, SequenceSpec, max_norm

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_FINDING = 3

BOUND_SLACK = 1e-9  # float allowance on real-arithmetic guarantees


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("SIGNRANGE_JOBS", "1")))
    except ValueError:
        return 1


def _config(args: argparse.Namespace) -> dict:
    skip = {"handler"}
    out = {}
    for key, value in sorted(vars(args).items()):
        if key in skip or value is None:
            continue
        out[key] = str(value) if isinstance(value, Path) else value
    return out


def _sibling(path, suffix: str) -> Path:
    p = Path(path)
    return p.with_name(p.stem + suffix)


def _load_window(args, count_attr: str = "count"):
    spec = fileio.load_sequence_spec(args.infile)
    count = getattr(args, count_attr, None)
    if count is None:
        count = spec.max_index()
        if count is None:
            raise ValueError("sequence is unbounded; pass an explicit --count")
    return spec.window(int(count))


def _parse_rect(text: str) -> Rect:
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 4:
        raise ValueError("rectangle must be x0,x1,y0,y1")
    return Rect(*parts)


def _parse_matrix(text: str) -> list[list[float]]:
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 4:
        raise ValueError("matrix must be m11,m12,m21,m22")
    return [[parts[0], parts[1]], [parts[2], parts[3]]]


def _synthetic_windows(ratio_a: float, ratio_b: float, count: int):
    """Harmonic-scale windows sitting exactly on the requested directions:
    terms (ratio_a + i)/n and (1 + i*ratio_b)/n."""
    win_a = SequenceSpec.linear_ratio(ratio_a).window(count)
    win_b = SequenceSpec.linear_ratio(1.0 / ratio_b, amplitude=ratio_b).window(count)
    return win_a, win_b


# -- subcommand handlers -------------------------------------------------


def cmd_seq_gen(args) -> int:
    cfg = _config(args)
    if args.family in ("explicit",):
        raise ValueError("seq gen needs a parametric family; explicit files are inputs")
    if args.family == "linear-ratio":
        spec = SequenceSpec.linear_ratio(math.inf if args.ratio == "inf" else float(args.ratio),
                                         scale=args.scale, amplitude=args.amplitude,
                                         limit=args.count)
    elif args.family == "harmonic-log-alt":
        spec = SequenceSpec.alternating_log(limit=args.count)
    elif args.family == "dyadic-tower":
        spec = SequenceSpec.minimal_tower(args.blocks) if args.m is None else \
            SequenceSpec.dyadic_tower([int(v) for v in args.m.split(",")],
                                      [int(v) for v in args.n.split(",")])
    else:
        raise ValueError(f"unknown family {args.family!r}")
    count = args.count
    if count is None:
        count = spec.max_index()
        if count is None:
            raise ValueError("pass --count for unbounded families")
    count = min(count, spec.max_index() or count)
    if args.spec_only:
        fileio.save_sequence_spec(args.out, spec, cfg)
    else:
        fileio.save_window_as_explicit(args.out, spec.window(count), cfg)
    print(f"wrote {args.out} ({count} terms, family {args.family})")
    return EXIT_OK


def cmd_signs_bound(args) -> int:
    cfg = _config(args)
    win = _load_window(args)
    result = tail_control(win) if args.method == "blocks" else bounded_signs(win)
    fileio.save_selection(args.out, result, cfg)
    sup = win.sup_norm()
    guarantee = 5.0 * max(1.0, sup) if args.method == "stream" else 5.0 * sup
    achieved = result.prefix_bound if args.method == "stream" else \
        max_norm(complex(np.sum(np.asarray(result.signs, dtype=float) * win.values)))
    print(f"prefix bound {result.prefix_bound:.6g}; guarantee {guarantee:.6g}")
    if achieved > guarantee + BOUND_SLACK:
        print("signrange: finding: selection exceeded its guarantee", file=sys.stderr)
        return EXIT_FINDING
    return EXIT_OK


def cmd_signs_target(args) -> int:
    cfg = _config(args)
    win = _load_window(args)
    if args.mode == "greedy-real":
        target = float(fileio.parse_complex_literal(args.target).real)
        result = greedy_target_real(win.values.real, target)
    else:
        target = fileio.parse_complex_literal(args.target)
        ratios = detect_ratios(win, depth=args.depth, mass_threshold=args.threshold)
        result = approx_target_complex(win, ratios, target, args.eps)
    fileio.save_selection(args.out, result, cfg)
    res = result.residual
    print(f"residual {res.re!r}+{res.im!r}i; prefix bound {result.prefix_bound:.6g}")
    return EXIT_OK


def cmd_ratio_report(args) -> int:
    cfg = _config(args)
    win = _load_window(args)
    reports = detect_ratios(win, depth=args.depth, mass_threshold=args.threshold)
    profile = nonsummability_profile(win, args.profile_samples)
    payload = {
        "horizon": len(win),
        "ratios": [{
            "ratio": "inf" if math.isinf(r.ratio) else r.ratio,
            "mass": r.mass, "depth": r.dyadic_depth, "branch": r.branch,
            "interval": list(r.interval), "retained": len(r.index_mask),
        } for r in reports],
        "profile": {"minAngle": profile.min_angle, "minMass": profile.min_mass},
    }
    fileio.save_json(args.out, payload, cfg)
    thetas = [s[0] for s in profile.samples]
    masses = [s[1] for s in profile.samples]
    fileio.save_csv(_sibling(args.out, "_profile.csv"), "theta,mass",
                    zip(thetas, masses), cfg)
    if not args.no_figures:
        save_profile_figure(_sibling(args.out, "_profile.png"), thetas, masses,
                            f"directional mass at horizon {len(win)}")
    names = ", ".join("inf" if math.isinf(r.ratio) else f"{r.ratio:.6g}"
                      for r in reports[:6])
    more = f" (+{len(reports) - 6} more)" if len(reports) > 6 else ""
    print(f"{len(reports)} ratio(s): {names}{more}; "
          f"min directional mass {profile.min_mass:.6g}")
    return EXIT_OK


def _build_synthetic_system(args):
    win_a, win_b = _synthetic_windows(args.ratio_a, args.ratio_b, args.synthetic_count)
    return build_two_ratio_system(win_a, win_b, args.delta, args.levels)


def cmd_moran_build(args) -> int:
    cfg = _config(args)
    if args.in_a and args.in_b:
        spec_a = fileio.load_sequence_spec(args.in_a)
        spec_b = fileio.load_sequence_spec(args.in_b)
        count_a, count_b = spec_a.max_index(), spec_b.max_index()
        if count_a is None or count_b is None:
            raise ValueError("input sequences must be bounded")
        build = build_two_ratio_system(spec_a.window(count_a), spec_b.window(count_b),
                                       args.delta, args.levels)
    else:
        build = _build_synthetic_system(args)
    fileio.save_moran_system(args.out, build.system, cfg)
    print(f"wrote {args.out} ({args.levels} levels, contraction {args.delta})")
    return EXIT_OK


def cmd_moran_check(args) -> int:
    cfg = _config(args)
    if args.infile:
        system = fileio.load_moran_system(args.infile)
        brackets = "n/a"
    else:
        build = _build_synthetic_system(args)
        system = build.system
        brackets = "pass"
    q = _parse_rect(args.window)
    verdicts = covering_check(system, q)
    covered = [v.covered for v in verdicts]
    payload = {
        "contraction": system.contraction,
        "levels": system.depth,
        "brackets": brackets,
        "covering": covered,
        "witnesses": [None if v.witness is None else [v.witness.real, v.witness.imag]
                      for v in verdicts],
        "nestedBall": nested_ball_ok(system),
    }
    fileio.save_json(args.out, payload, cfg)
    n_true = sum(covered)
    print(f"covering: {'true' if all(covered) else 'false'} x{n_true}/{len(covered)}; "
          f"brackets: {brackets}")
    return EXIT_OK if all(covered) else EXIT_FINDING


def cmd_moran_render(args) -> int:
    cfg = _config(args)
    system = fileio.load_moran_system(args.infile)
    cloud = attractor_points(system, args.depth, jobs=args.jobs)
    order = np.lexsort((cloud.points.imag, cloud.points.real))
    pts = cloud.points[order]
    fileio.save_points_csv(args.out, pts, cfg)
    lo, hi = float(pts.real.min()), float(pts.real.max())
    lo_i, hi_i = float(pts.imag.min()), float(pts.imag.max())
    if hi == lo:
        hi = lo + 1.0
    if hi_i == lo_i:
        hi_i = lo_i + 1.0
    grid = fileio.raster_grid(pts, (lo, hi), (lo_i, hi_i), bins=args.bins)
    fileio.write_pgm(_sibling(args.out, ".pgm"), grid, cfg)
    if not args.no_figures:
        save_points_figure(_sibling(args.out, ".png"), pts,
                           f"attractor, depth {args.depth} "
                           f"(error radius {cloud.error_radius:.3g})")
    print(f"{len(pts)} points, error radius {cloud.error_radius:.6g}")
    return EXIT_OK


def cmd_oracle_range(args) -> int:
    cfg = _config(args)
    win = _load_window(args, count_attr="n")
    rset = exact_range(win, jobs=args.jobs)
    fileio.save_points_csv(args.out, rset.points, cfg)
    if not args.no_figures:
        save_points_figure(_sibling(args.out, ".png"), rset.points,
                           f"exact range, N = {rset.source_length}")
    print(f"{len(rset)} distinct sums from {rset.source_length} terms")
    return EXIT_OK


def cmd_oracle_disc(args) -> int:
    cfg = _config(args)
    win = _load_window(args, count_attr="n")
    value, signs = min_prefix_discrepancy(win)
    fileio.save_json(args.out, {"value": value, "signs": list(signs)}, cfg)
    print(f"minimum prefix bound {value!r}")
    return EXIT_OK


def cmd_oracle_equiv(args) -> int:
    cfg = _config(args)
    win = _load_window(args, count_attr="n")
    matrix = _parse_matrix(args.matrix)
    ok = transform_equivariance_check(win, matrix, jobs=args.jobs)
    fileio.save_json(args.out, {"equivariant": ok, "matrix": matrix}, cfg)
    print(f"equivariance: {'true' if ok else 'false'}")
    return EXIT_OK if ok else EXIT_FINDING


def cmd_range_raster(args) -> int:
    cfg = _config(args)
    win = _load_window(args, count_attr="n")
    rset = exact_range(win, jobs=args.jobs)
    rect = _parse_rect(args.window)
    grid = fileio.raster_grid(rset.points, (rect.x0, rect.x1), (rect.y0, rect.y1),
                              bins=args.bins)
    fileio.write_pgm(args.out, grid, cfg)
    fileio.save_points_csv(_sibling(args.out, ".csv"), rset.points, cfg)
    if not args.no_figures:
        save_points_figure(_sibling(args.out, ".png"), rset.points,
                           f"range raster, N = {rset.source_length}",
                           extent=(rect.x0, rect.x1, rect.y0, rect.y1))
    print(f"rasterised {len(rset)} points onto {args.bins}x{args.bins}")
    return EXIT_OK


def cmd_density(args) -> int:
    cfg = _config(args)
    index_set = IndexSet.arithmetic(args.q, args.offset)
    report = density(index_set, args.horizon)
    fileio.save_json(args.out, {"upper": report.upper, "lower": report.lower,
                                "checkpoints": [[k, r] for k, r in report.counts]}, cfg)
    ks = [k for k, _ in report.counts]
    rs = [r for _, r in report.counts]
    fileio.save_csv(_sibling(args.out, ".csv"), "k,ratio", zip(ks, rs), cfg)
    if not args.no_figures:
        save_curve_figure(_sibling(args.out, ".png"), ks, rs,
                          f"counting ratio, q={args.q}", "k", "#(set in [0,k])/k")
    print(f"upper {report.upper!r}, lower {report.lower!r}")
    return EXIT_OK


def cmd_holder(args) -> int:
    cfg = _config(args)
    index_set = IndexSet.arithmetic(args.q, args.offset)
    report = holder_check(index_set, args.eps, args.samples, args.length, seed=args.seed)
    fileio.save_json(args.out, {
        "passed": report.passed, "deterministic": report.deterministic,
        "pivot": report.pivot, "worstRatio": report.worst_ratio,
        "worstPairK": report.worst_pair_k}, cfg)
    print(f"holder check: {'pass' if report.passed and report.deterministic else 'FAIL'} "
          f"(worst ratio {report.worst_ratio:.6g})")
    return EXIT_OK if report.passed and report.deterministic else EXIT_FINDING


def cmd_boxdim(args) -> int:
    cfg = _config(args)
    if args.mode == "free":
        membership = lambda prefix: True
    elif args.mode == "parity":
        membership = lambda prefix: all(s == 1 for i, s in enumerate(prefix, start=1)
                                        if i % 2 == 0)
    else:
        win = _load_window(args, count_attr="count")
        center = fileio.parse_complex_literal(args.center)
        membership = ball_prefix_membership(win, center, args.radius)
    result = box_dim_estimate(membership, args.depth)
    fileio.save_json(args.out, {"estimate": result.estimate,
                                "emptied": result.emptied,
                                "counts": list(result.counts)}, cfg)
    ks = list(range(1, len(result.counts) + 1))
    fileio.save_csv(_sibling(args.out, ".csv"), "k,count",
                    zip(ks, result.counts), cfg)
    if not args.no_figures:
        save_curve_figure(_sibling(args.out, ".png"), ks,
                          [max(c, 1) for c in result.counts],
                          f"surviving prefixes (slope {result.estimate:.3f})",
                          "k", "count", logy=True)
    print(f"box-dimension estimate {result.estimate:.6g}")
    return EXIT_OK


# -- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="signrange",
        description="Sign selection and range analysis for signed complex series")
    parser.add_argument("--version", action="version",
                        version=f"signrange {fileio.tool_version()}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, jobs=False, figures=False, seed=False):
        if jobs:
            p.add_argument("--jobs", type=int, default=_default_jobs(),
                           help="worker cap for enumeration fan-out")
        if figures:
            p.add_argument("--no-figures", action="store_true",
                           help="skip the PNG companion")
        if seed:
            p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--out", required=True, type=Path)

    seq = sub.add_parser("seq", help="sequence file tools").add_subparsers(
        dest="subcommand", required=True)
    gen = seq.add_parser("gen", help="emit a sequence file from a family")
    gen.add_argument("--family", required=True,
                     choices=["linear-ratio", "harmonic-log-alt", "dyadic-tower"])
    gen.add_argument("--count", type=int)
    gen.add_argument("--ratio", default="0", help="linear-ratio direction (or 'inf')")
    gen.add_argument("--scale", default="harmonic", choices=["harmonic", "sqrt", "log"])
    gen.add_argument("--amplitude", type=float, default=1.0)
    gen.add_argument("--blocks", type=int, default=4, help="dyadic-tower block count")
    gen.add_argument("--m", help="explicit m schedule, comma separated")
    gen.add_argument("--n", help="explicit n schedule, comma separated")
    gen.add_argument("--spec-only", action="store_true",
                     help="write the family record instead of materialised terms")
    common(gen)
    gen.set_defaults(handler=cmd_seq_gen)

    signs = sub.add_parser("signs", help="sign selection").add_subparsers(
        dest="subcommand", required=True)
    bound = signs.add_parser("bound", help="prefix-bounded selection")
    bound.add_argument("--in", dest="infile", required=True, type=Path)
    bound.add_argument("--count", type=int)
    bound.add_argument("--method", choices=["stream", "blocks"], default="stream")
    common(bound)
    bound.set_defaults(handler=cmd_signs_bound)

    target = signs.add_parser("target", help="steer toward a target value")
    target.add_argument("--in", dest="infile", required=True, type=Path)
    target.add_argument("--count", type=int)
    target.add_argument("--target", required=True, help="complex literal a+bi")
    target.add_argument("--eps", type=float, default=1e-2)
    target.add_argument("--mode", choices=["complex", "greedy-real"], default="complex")
    target.add_argument("--depth", type=int, default=12, help="ratio detection depth")
    target.add_argument("--threshold", type=float, default=1.0,
                        help="ratio detection mass threshold")
    common(target)
    target.set_defaults(handler=cmd_signs_target)

    ratio = sub.add_parser("ratio", help="ratio analysis").add_subparsers(
        dest="subcommand", required=True)
    rep = ratio.add_parser("report", help="extract ratios and profile directions")
    rep.add_argument("--in", dest="infile", required=True, type=Path)
    rep.add_argument("--count", type=int)
    rep.add_argument("--depth", type=int, default=12)
    rep.add_argument("--threshold", type=float, default=1.0)
    rep.add_argument("--profile-samples", type=int, default=16)
    common(rep, figures=True)
    rep.set_defaults(handler=cmd_ratio_report)

    moran = sub.add_parser("moran", help="function systems").add_subparsers(
        dest="subcommand", required=True)

    def moran_common(p):
        p.add_argument("--delta", type=float, default=0.9375)
        p.add_argument("--levels", type=int, default=8)
        p.add_argument("--ratioA", "--ratio-a", dest="ratio_a", type=float, default=2.0)
        p.add_argument("--ratioB", "--ratio-b", dest="ratio_b", type=float, default=3.0)
        p.add_argument("--synthetic-count", type=int, default=1 << 17)

    build = moran.add_parser("build", help="construct a two-ratio system")
    build.add_argument("--in-a", type=Path, help="ratio-2 sequence file")
    build.add_argument("--in-b", type=Path, help="ratio-3 sequence file")
    moran_common(build)
    common(build)
    build.set_defaults(handler=cmd_moran_build)

    check = moran.add_parser("check", help="verify brackets and rectangle covering")
    check.add_argument("--in", dest="infile", type=Path,
                       help="system file (otherwise a synthetic build)")
    check.add_argument("--window", default="-5,5,-5,5")
    moran_common(check)
    common(check)
    check.set_defaults(handler=cmd_moran_check)

    render = moran.add_parser("render", help="enumerate and raster the attractor")
    render.add_argument("--in", dest="infile", required=True, type=Path)
    render.add_argument("--depth", type=int, required=True)
    render.add_argument("--bins", type=int, default=256)
    common(render, jobs=True, figures=True)
    render.set_defaults(handler=cmd_moran_render)

    oracle = sub.add_parser("oracle", help="exhaustive enumeration").add_subparsers(
        dest="subcommand", required=True)
    orange = oracle.add_parser("range", help="exact finite range as CSV")
    orange.add_argument("--in", dest="infile", required=True, type=Path)
    orange.add_argument("--n", type=int)
    common(orange, jobs=True, figures=True)
    orange.set_defaults(handler=cmd_oracle_range)

    odisc = oracle.add_parser("disc", help="exhaustive minimum prefix bound")
    odisc.add_argument("--in", dest="infile", required=True, type=Path)
    odisc.add_argument("--n", type=int)
    common(odisc)
    odisc.set_defaults(handler=cmd_oracle_disc)

    oequiv = oracle.add_parser("equiv", help="linear-map equivariance check")
    oequiv.add_argument("--in", dest="infile", required=True, type=Path)
    oequiv.add_argument("--n", type=int)
    oequiv.add_argument("--matrix", required=True, help="m11,m12,m21,m22")
    common(oequiv, jobs=True)
    oequiv.set_defaults(handler=cmd_oracle_equiv)

    rng = sub.add_parser("range", help="range artifacts").add_subparsers(
        dest="subcommand", required=True)
    raster = rng.add_parser("raster", help="grid image of the exact range")
    raster.add_argument("--in", dest="infile", required=True, type=Path)
    raster.add_argument("--n", type=int)
    raster.add_argument("--window", default="-2,2,-2,2")
    raster.add_argument("--bins", type=int, default=256)
    common(raster, jobs=True, figures=True)
    raster.set_defaults(handler=cmd_range_raster)

    dens = sub.add_parser("density", help="index-set counting densities")
    dens.add_argument("--q", type=int, required=True)
    dens.add_argument("--offset", type=int, default=0)
    dens.add_argument("--horizon", type=int, default=1_000_000)
    common(dens, figures=True)
    dens.set_defaults(handler=cmd_density)

    hold = sub.add_parser("holder", help="deletion-map Holder inequality")
    hold.add_argument("--q", type=int, required=True)
    hold.add_argument("--offset", type=int, default=0)
    hold.add_argument("--eps", type=float, required=True)
    hold.add_argument("--samples", type=int, default=10_000)
    hold.add_argument("--length", type=int, default=1_000)
    common(hold, seed=True)
    hold.set_defaults(handler=cmd_holder)

    box = sub.add_parser("boxdim", help="box-counting dimension of a prefix tree")
    box.add_argument("--mode", choices=["free", "parity", "ball"], default="ball")
    box.add_argument("--in", dest="infile", type=Path)
    box.add_argument("--count", type=int)
    box.add_argument("--center", default="0")
    box.add_argument("--radius", type=float, default=0.5)
    box.add_argument("--depth", type=int, default=16)
    common(box, figures=True)
    box.set_defaults(handler=cmd_boxdim)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except BracketViolationError as exc:
        print(f"signrange: finding: {exc}", file=sys.stderr)
        return EXIT_FINDING
    except (InsufficientMassError, TargetEscapeError, ValueError,
            OSError, KeyError) as exc:
        print(f"signrange: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
