"""Artifact formats: JSON records, delimited CSV with comment headers, and
P2 graymap rasters.  Every artifact embeds the tool version and the run
configuration, and identical configurations produce identical bytes."""

from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .moran import MoranSystem
from .series import (FAMILY_ALT_LOG, FAMILY_DYADIC_TOWER, FAMILY_EXPLICIT,
                     FAMILY_LINEAR_RATIO, SequenceSpec, SequenceWindow)

TOOL_NAME = "signrange"


def tool_version() -> str:
    try:
        from importlib.metadata import version
        return version(TOOL_NAME)
    except Exception:
        return "0.1.0"


def build_meta(config: Optional[Mapping] = None) -> dict:
    return {"tool": TOOL_NAME, "version": tool_version(),
            "config": dict(config or {})}


def canonical_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False)


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Mapping):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def save_json(path, payload: Mapping, config: Optional[Mapping] = None) -> None:
    body = {"_meta": build_meta(config)}
    body.update(payload)
    Path(path).write_text(canonical_json(_jsonable(body)) + "\n")


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())


def parse_number(value) -> float:
    """Decimal number or exact-rational record {"num": p, "den": q}."""
    if isinstance(value, Mapping):
        return float(Fraction(int(value["num"]), int(value["den"])))
    if isinstance(value, str) and value in ("inf", "-inf"):
        return math.inf if value == "inf" else -math.inf
    return float(value)


def parse_rational(value) -> Fraction:
    if isinstance(value, Mapping):
        return Fraction(int(value["num"]), int(value["den"]))
    return Fraction(value)


# -- sequence and sign files -------------------------------------------


def sequence_spec_to_dict(spec: SequenceSpec) -> dict:
    if spec.family == FAMILY_EXPLICIT:
        return {"family": FAMILY_EXPLICIT,
                "terms": [[t.re, t.im] for t in spec.terms],
                "limit": spec.limit}
    params: dict = {}
    if spec.family == FAMILY_LINEAR_RATIO:
        params = {"t": "inf" if math.isinf(spec.ratio) else spec.ratio,
                  "scale": spec.scale, "amplitude": spec.amplitude}
    elif spec.family == FAMILY_DYADIC_TOWER:
        params = {"m": list(spec.m_schedule), "n": list(spec.n_schedule)}
    return {"family": spec.family, "params": params, "limit": spec.limit}


def sequence_spec_from_dict(record: Mapping) -> SequenceSpec:
    family = record["family"]
    limit = record.get("limit")
    limit = int(limit) if limit is not None else None
    if family == FAMILY_EXPLICIT:
        terms = [complex(parse_number(p[0]), parse_number(p[1]))
                 for p in record["terms"]]
        return SequenceSpec.explicit(terms, limit=limit)
    params = record.get("params", {})
    if family == FAMILY_LINEAR_RATIO:
        return SequenceSpec.linear_ratio(parse_number(params["t"]),
                                         scale=params.get("scale", "harmonic"),
                                         amplitude=parse_number(params.get("amplitude", 1.0)),
                                         limit=limit)
    if family == FAMILY_ALT_LOG:
        return SequenceSpec.alternating_log(limit=limit)
    if family == FAMILY_DYADIC_TOWER:
        return SequenceSpec.dyadic_tower(params["m"], params["n"], limit=limit)
    raise ValueError(f"unknown family {family!r}")


def load_sequence_spec(path) -> SequenceSpec:
    return sequence_spec_from_dict(load_json(path))


def save_sequence_spec(path, spec: SequenceSpec, config: Optional[Mapping] = None) -> None:
    save_json(path, sequence_spec_to_dict(spec), config)


def save_window_as_explicit(path, win: SequenceWindow,
                            config: Optional[Mapping] = None) -> None:
    record = {"family": FAMILY_EXPLICIT,
              "terms": [[z.real, z.imag] for z in win.values],
              "limit": None}
    save_json(path, record, config)


def load_signs(path) -> tuple[int, ...]:
    return tuple(int(s) for s in load_json(path)["signs"])


def save_selection(path, result, config: Optional[Mapping] = None) -> None:
    payload = {"signs": list(result.signs), "prefixBound": result.prefix_bound}
    if result.residual is not None:
        payload["residual"] = [result.residual.re, result.residual.im]
    save_json(path, payload, config)


# -- moran systems ------------------------------------------------------


def moran_system_to_dict(system: MoranSystem) -> dict:
    return {"r": system.contraction,
            "levels": [[[d.real, d.imag] for d in level] for level in system.levels]}


def moran_system_from_dict(record: Mapping) -> MoranSystem:
    levels = tuple(tuple(complex(parse_number(d[0]), parse_number(d[1])) for d in level)
                   for level in record["levels"])
    return MoranSystem(contraction=parse_number(record["r"]), levels=levels)


def save_moran_system(path, system: MoranSystem, config: Optional[Mapping] = None) -> None:
    save_json(path, moran_system_to_dict(system), config)


def load_moran_system(path) -> MoranSystem:
    return moran_system_from_dict(load_json(path))


def coverage_report_to_dict(report) -> dict:
    w = report.window
    return {"window": [w.x0, w.x1, w.y0, w.y1], "epsilon": report.epsilon,
            "coveredFraction": report.covered_fraction,
            "worstGap": report.worst_gap, "cells": report.cells}


# -- delimited and raster artifacts --------------------------------------


def _header_lines(config: Optional[Mapping]) -> list[str]:
    meta = build_meta(config)
    return [f"# {TOOL_NAME} {meta['version']}",
            f"# config {json.dumps(_jsonable(meta['config']), sort_keys=True)}"]


def save_csv(path, header: str, rows: Iterable[Sequence], config: Optional[Mapping] = None) -> None:
    lines = _header_lines(config)
    lines.append(header)
    for row in rows:
        lines.append(",".join(repr(float(v)) if isinstance(v, (float, np.floating))
                              else str(int(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def save_points_csv(path, points: np.ndarray, config: Optional[Mapping] = None) -> None:
    save_csv(path, "re,im",
             ((float(z.real), float(z.imag)) for z in points), config)


def raster_grid(points: np.ndarray, x_range: tuple[float, float],
                y_range: tuple[float, float], bins: int) -> np.ndarray:
    """Count points per cell; row 0 is the top of the y range."""
    hist, _, _ = np.histogram2d(points.real, points.imag, bins=bins,
                                range=(x_range, y_range))
    return hist.T[::-1]


def write_pgm(path, grid: np.ndarray, config: Optional[Mapping] = None) -> None:
    """Plain (P2) graymap with counts scaled to 0..255."""
    g = np.asarray(grid, dtype=np.float64)
    peak = g.max()
    scaled = np.zeros_like(g, dtype=np.int64) if peak <= 0 \
        else np.round(255.0 * g / peak).astype(np.int64)
    lines = ["P2"]
    lines.extend(_header_lines(config))
    lines.append(f"{g.shape[1]} {g.shape[0]}")
    lines.append("255")
    for row in scaled:
        lines.append(" ".join(str(int(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def parse_complex_literal(text: str) -> complex:
    """Parse 'a+bi' with decimal components ('1.5-0.25i', '2', '-i', '0.5i')."""
    cleaned = text.strip().replace(" ", "").replace("I", "i").replace("i", "j")
    try:
        return complex(cleaned)
    except ValueError as exc:
        raise ValueError(f"cannot parse complex literal {text!r}") from exc
