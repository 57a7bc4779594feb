"""Parameter sweeps over (alpha, beta) for the generalized LZ model."""

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import bisect

from superlz.analytics import comparisons, lz_probability
from superlz.diagnostics import logger
from superlz.errors import BoundaryNotFoundError, InvalidArgumentError, SuperLZError
from superlz.models import GenLZModel, GenLZParams
from superlz.progress import SweepProgress
from superlz.propagator import PropagationConfig, propagate_autoconverge

CSV_HEADER = ("alpha", "beta", "p_numeric", "p_lz", "p_dk", "p_sl",
              "converged", "norm_drift", "wall_time_s")
COMPARISON_TAGS = ("lz", "dk", "sl")
MAX_GRID_POINTS = 250_000


def parse_range(text):
    """Parse ``a:b:n`` (n evenly spaced values) or a single number."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return (float(parts[0]),)
        if len(parts) != 3:
            raise ValueError
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise InvalidArgumentError(f"expected a range 'start:stop:count', got {text!r}") from None
    if n < 1:
        raise InvalidArgumentError(f"range count must be >= 1, got {n}")
    return tuple(float(v) for v in np.linspace(lo, hi, n))


@dataclass(frozen=True)
class SweepGrid:
    alpha_axis: tuple
    beta_axis: tuple
    delta0: float
    cfg: PropagationConfig = field(default_factory=PropagationConfig)
    comparisons: tuple = COMPARISON_TAGS
    max_points: int = MAX_GRID_POINTS

    def __post_init__(self):
        for name in ("alpha_axis", "beta_axis"):
            axis = tuple(float(v) for v in getattr(self, name))
            if not axis:
                raise InvalidArgumentError(f"{name} is empty")
            if any(not math.isfinite(v) for v in axis):
                raise InvalidArgumentError(f"{name} has non-finite values")
            if any(b <= a for a, b in zip(axis, axis[1:])):
                raise InvalidArgumentError(f"{name} must be strictly increasing")
            object.__setattr__(self, name, axis)
        if self.alpha_axis[0] < 0.0:
            raise InvalidArgumentError("alpha values must be >= 0")
        if not (self.delta0 > 0.0 and math.isfinite(self.delta0)):
            raise InvalidArgumentError(f"delta0 must be > 0, got {self.delta0!r}")
        unknown = set(self.comparisons) - set(COMPARISON_TAGS)
        if unknown:
            raise InvalidArgumentError(f"unknown comparison formulas: {', '.join(sorted(unknown))}")
        if self.size > self.max_points:
            raise InvalidArgumentError(f"grid has {self.size} points, maximum is {self.max_points}")

    @property
    def size(self):
        return len(self.alpha_axis) * len(self.beta_axis)

    def points(self):
        """(alpha, beta) pairs in row-major order, alpha outermost."""
        return [(a, b) for a in self.alpha_axis for b in self.beta_axis]

    def to_dict(self):
        return {
            "alpha_axis": list(self.alpha_axis),
            "beta_axis": list(self.beta_axis),
            "delta0": self.delta0,
            "cfg": self.cfg.to_dict(),
            "comparisons": list(self.comparisons),
            "max_points": self.max_points,
        }

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data["cfg"] = PropagationConfig.from_dict(data.get("cfg", {}))
        data["alpha_axis"] = tuple(data["alpha_axis"])
        data["beta_axis"] = tuple(data["beta_axis"])
        data["comparisons"] = tuple(data.get("comparisons", COMPARISON_TAGS))
        return cls(**data)


@dataclass(frozen=True)
class SweepRecord:
    alpha: float
    beta: float
    p_numeric: float | None
    p_lz: float | None
    p_dk: float | None
    p_sl: float | None
    converged: bool
    norm_drift: float | None
    wall_time: float
    error: str | None = None


def _sweep_point(alpha, beta, delta0, cfg, tags):
    """Compute one grid point; failures are recorded, not raised."""
    started = time.perf_counter()
    params = GenLZParams(delta0, alpha, beta)
    formulas = comparisons(params, COMPARISON_TAGS)
    p_numeric = norm_drift = None
    converged = False
    error = None
    try:
        result = propagate_autoconverge(GenLZModel(params), cfg)
        p_numeric, norm_drift, converged = result.p, result.norm_drift, result.converged
    except SuperLZError as e:
        error = str(e)
        partial = getattr(e, "partial", None)
        if partial is not None:
            p_numeric, norm_drift = partial.p, partial.norm_drift
    return SweepRecord(
        alpha=alpha,
        beta=beta,
        p_numeric=p_numeric,
        p_lz=formulas.get("lz") if "lz" in tags else None,
        p_dk=formulas.get("dk") if "dk" in tags else None,
        p_sl=formulas.get("sl") if "sl" in tags else None,
        converged=converged,
        norm_drift=norm_drift,
        wall_time=time.perf_counter() - started,
        error=error,
    )


def _ignore(event, data):
    pass


def run_sweep(grid, workers=1, callback=None):
    """Evaluate every grid point; records come back in row-major order.

    Args:
        grid: SweepGrid.
        workers: process count; 1 runs in the calling process.
        callback: optional ``callback(event, data)`` progress sink.
    """
    points = grid.points()
    progress = SweepProgress(len(points), callback or _ignore)
    logger.log(f"Sweep: {len(grid.alpha_axis)}x{len(grid.beta_axis)} points, delta0={grid.delta0}, "
               f"workers={workers}")
    started = time.time()
    records = [None] * len(points)

    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = {
                executor.submit(_sweep_point, a, b, grid.delta0, grid.cfg, grid.comparisons): i
                for i, (a, b) in enumerate(points)
            }
            for future in as_completed(futures):
                record = future.result()
                records[futures[future]] = record
                progress.advance(record.converged)
    else:
        for i, (a, b) in enumerate(points):
            records[i] = _sweep_point(a, b, grid.delta0, grid.cfg, grid.comparisons)
            progress.advance(records[i].converged)

    progress.finish()
    failed = [r for r in records if not r.converged]
    for r in failed:
        logger.warn(f"point alpha={r.alpha!r} beta={r.beta!r} failed: {r.error}")
    logger.log(f"Sweep finished in {time.time() - started:.1f}s, {len(failed)} failed")
    return records


def _fmt(value):
    if value is None:
        return ""
    return f"{value:.16e}"


def write_csv(records, path, timings=False):
    """Write the sweep table. ``wall_time_s`` stays empty unless ``timings``."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow([
                _fmt(r.alpha), _fmt(r.beta), _fmt(r.p_numeric), _fmt(r.p_lz),
                _fmt(r.p_dk), _fmt(r.p_sl), "true" if r.converged else "false",
                _fmt(r.norm_drift), _fmt(r.wall_time) if timings else "",
            ])
    return path


def summarize(records, grid, timings=False):
    failures = [
        {"alpha": r.alpha, "beta": r.beta, "error": r.error}
        for r in records if not r.converged
    ]
    summary = {
        "grid": grid.to_dict(),
        "totals": {
            "points": len(records),
            "converged": len(records) - len(failures),
            "failed": len(failures),
        },
        "failures": failures,
    }
    if timings:
        summary["total_wall_time_s"] = sum(r.wall_time for r in records)
    return summary


def write_summary_json(records, grid, path, timings=False, extra=None):
    path = Path(path)
    summary = summarize(records, grid, timings)
    if extra:
        summary.update(extra)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def _p_numeric(delta0, alpha, beta, cfg):
    return propagate_autoconverge(GenLZModel(GenLZParams(delta0, alpha, beta)), cfg).p


def superadiabatic_boundary(alpha, delta0, cfg=None, samples=12, rtol=1e-3):
    """Upper edge beta* > alpha of the region where P < P_LZ.

    Scans (alpha, 4 alpha] for the first point with P >= P_LZ and bisects
    the bracket to relative width ``rtol``.

    Raises:
        BoundaryNotFoundError: P stays below P_LZ on the whole scan.
    """
    if not alpha > 0.0:
        raise InvalidArgumentError(f"alpha must be > 0, got {alpha!r}")
    cfg = cfg or PropagationConfig()
    p_lz = lz_probability(delta0, alpha, cfg.hbar)

    def excess(beta):
        return _p_numeric(delta0, alpha, beta, cfg) - p_lz

    lo = alpha
    for beta in np.linspace(alpha, 4.0 * alpha, samples + 1)[1:]:
        beta = float(beta)
        value = excess(beta)
        logger.debug(f"boundary scan beta={beta:.6g} P-P_LZ={value:.3e}")
        if value >= 0.0:
            if value == 0.0:
                return beta
            return bisect(excess, lo, beta, rtol=rtol, xtol=1e-12 * alpha)
        lo = beta
    raise BoundaryNotFoundError(f"P stays below P_LZ for beta in ({alpha}, {4 * alpha}]")


def symmetry_defect(delta0, alpha, beta, cfg=None):
    """|P(alpha, beta) - P(beta, alpha)| for alpha, beta >= 0."""
    if beta < 0.0:
        raise InvalidArgumentError("the interchange needs beta >= 0")
    cfg = cfg or PropagationConfig()
    return abs(_p_numeric(delta0, alpha, beta, cfg) - _p_numeric(delta0, beta, alpha, cfg))


def boundary_scaling_check(alpha, delta0, cfg=None, scale=2.0):
    """(beta*, beta* of the scaled problem divided by scale^2)."""
    first = superadiabatic_boundary(alpha, delta0, cfg)
    second = superadiabatic_boundary(scale * scale * alpha, scale * delta0, cfg)
    return first, second / (scale * scale)

