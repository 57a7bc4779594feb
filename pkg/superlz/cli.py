"""Command-line entry point: ``superlz <command> [options]``."""

import argparse
import csv
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

from superlz import __version__
from superlz.analytics import adiabaticity_parameter, comparisons
from superlz.config import default_workers, resolve
from superlz.diagnostics import logger, run_startup_diagnostics
from superlz.errors import EXIT_IO, EXIT_NUMERICAL, EXIT_OK, InvalidArgumentError, SuperLZError
from superlz.models import (
    DKModel,
    GenLZModel,
    GenLZParams,
    SLModel,
    StandardLZModel,
    sudden_limit_probability,
    theta_extremes,
)
from superlz.progress import TqdmReporter
from superlz.propagator import METHODS, propagate, propagate_autoconverge
from superlz.shuttle import (
    INTERPOLATIONS,
    SCHEDULE_KINDS,
    load_landscape,
    load_schedule,
    make_schedule,
    save_landscape,
    save_result_json,
    save_schedule,
    shuttle_simulate,
    synth_landscape,
)
from superlz.sweeps import (
    SweepGrid,
    parse_range,
    run_sweep,
    superadiabatic_boundary,
    write_csv,
    write_summary_json,
)

MODEL_CHOICES = ("generalized-lz", "standard-lz", "demkov-kunike", "superlinear")
TRAJECTORY_HEADER = ("t", "re_a0", "im_a0", "re_a1", "im_a1", "p_adiabatic")


def _add_propagation_flags(parser):
    group = parser.add_argument_group("propagation")
    group.add_argument("--t0", type=float, help="half-window (default: automatic)")
    group.add_argument("--rel-tol", type=float, dest="rel_tol")
    group.add_argument("--abs-tol", type=float, dest="abs_tol")
    group.add_argument("--conv-tol", type=float, dest="conv_tol")
    group.add_argument("--max-steps", type=int, dest="max_steps")
    group.add_argument("--max-doublings", type=int, dest="max_doublings")
    group.add_argument("--method", choices=METHODS)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="superlz",
        description="Generalized Landau-Zener dynamics and valley transitions during shuttling.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", type=Path, help="JSON config file (flags override it)")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="echo debug messages")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="echo errors only")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    sim = sub.add_parser("simulate", help="propagate one drive model and report P")
    sim.add_argument("--model", choices=MODEL_CHOICES)
    sim.add_argument("--delta0", type=float)
    sim.add_argument("--alpha", type=float)
    sim.add_argument("--beta", type=float)
    sim.add_argument("--a", type=float, help="DK amplitude")
    sim.add_argument("--b", type=float, help="DK rate")
    sim.add_argument("--reverse", action="store_true", default=None,
                     help="integrate from the window end backwards")
    sim.add_argument("--json", type=Path, help="write result and resolved config")
    sim.add_argument("--trajectory", type=Path, help="write the trajectory CSV")
    _add_propagation_flags(sim)

    sweep = sub.add_parser("sweep", help="grid of P(alpha, beta) with formula comparisons")
    sweep.add_argument("--alpha-range", dest="alpha_range", help="start:stop:count")
    sweep.add_argument("--beta-range", dest="beta_range", help="start:stop:count")
    sweep.add_argument("--delta0", type=float)
    sweep.add_argument("--out", type=Path, help="output directory")
    sweep.add_argument("--workers", type=int, help="processes (default: $SUPERLZ_WORKERS)")
    sweep.add_argument("--compare", help="comma-separated subset of lz,dk,sl")
    sweep.add_argument("--timings", action="store_true", default=None,
                       help="fill wall_time_s (outputs are then not reproducible)")
    sweep.add_argument("--boundary-alpha", type=float, dest="boundary_alpha",
                       help="also locate the superadiabatic boundary at this alpha")
    _add_propagation_flags(sweep)

    land = sub.add_parser("landscape", help="landscape utilities")
    land_sub = land.add_subparsers(dest="action", metavar="action")
    land_sub.required = True
    gen = land_sub.add_parser("gen", help="generate a seeded synthetic landscape")
    gen.add_argument("--seed", type=int)
    gen.add_argument("--n-modes", type=int, dest="n_modes")
    gen.add_argument("--corr-length", type=float, dest="corr_length", help="nm")
    gen.add_argument("--mean-coupling", type=float, dest="mean_coupling", help="ueV")
    gen.add_argument("--extent", type=float, help="nm")
    gen.add_argument("--n-samples", type=int, dest="n_samples")
    gen.add_argument("--out", type=Path)

    shuttle = sub.add_parser("shuttle", help="shuttling simulations")
    shuttle_sub = shuttle.add_subparsers(dest="action", metavar="action")
    shuttle_sub.required = True
    for name, help_text in (("sim", "simulate a traversal"), ("schedule", "write a velocity schedule")):
        p = shuttle_sub.add_parser(name, help=help_text)
        p.add_argument("--landscape", type=Path, help="landscape CSV")
        p.add_argument("--interpolation", choices=INTERPOLATIONS)
        p.add_argument("--schedule", choices=SCHEDULE_KINDS)
        p.add_argument("--avg-velocity", type=float, dest="avg_velocity", help="m/s")
        p.add_argument("--v-min", type=float, dest="v_min", help="m/s")
        p.add_argument("--v-max", type=float, dest="v_max", help="m/s")
        p.add_argument("--gap-exponent", type=float, dest="gap_exponent")
        if name == "sim":
            p.add_argument("--schedule-file", type=Path, dest="schedule_file",
                           help="schedule CSV instead of --schedule")
            p.add_argument("--prominence", type=float)
            p.add_argument("--frame", choices=("rotated", "raw"))
            p.add_argument("--json", type=Path)
            _add_propagation_flags(p)
        else:
            p.add_argument("--out", type=Path)

    sub.add_parser("doctor", help="check the numerical stack")
    return parser


PROPAGATION_KEYS = ("t0", "rel_tol", "abs_tol", "conv_tol", "max_steps", "max_doublings", "method")


def _job_name(args):
    if args.command in ("landscape", "shuttle"):
        return f"{args.command}-{args.action}"
    return args.command


def _resolve_job(args):
    command = _job_name(args)
    flags = vars(args)
    overrides = {k: (str(v) if isinstance(v, Path) else v) for k, v in flags.items()
                 if k not in PROPAGATION_KEYS and k not in ("command", "action", "config", "verbose", "quiet")}
    propagation = {k: flags.get(k) for k in PROPAGATION_KEYS}
    return resolve(command, args.config, overrides, propagation)


def _require(job, *keys):
    missing = [k for k in keys if job.get(k) is None]
    if missing:
        flags = ", ".join("--" + k.replace("_", "-") for k in missing)
        raise InvalidArgumentError(f"{job.command} needs {flags}")


def _write_json(path, document):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(document, f, indent=2, sort_keys=True)
        f.write("\n")


def _build_model(job):
    kind = job.get("model")
    if kind == "generalized-lz":
        _require(job, "delta0", "alpha", "beta")
        return GenLZModel(GenLZParams(job.get("delta0"), job.get("alpha"), job.get("beta")))
    if kind == "standard-lz":
        _require(job, "delta0", "alpha")
        return StandardLZModel(job.get("delta0"), job.get("alpha"))
    if kind == "demkov-kunike":
        _require(job, "delta0", "a", "b")
        return DKModel(job.get("a"), job.get("b"), job.get("delta0"))
    if kind == "superlinear":
        _require(job, "delta0", "alpha", "beta")
        return SLModel(GenLZParams(job.get("delta0"), job.get("alpha"), job.get("beta")))
    raise InvalidArgumentError(f"unknown model {kind!r}")


def cmd_simulate(job):
    model = _build_model(job)
    result = propagate_autoconverge(model, job.propagation, reverse=bool(job.get("reverse")))
    print(f"P = {result.p:.12g}")
    print(f"amplitudes a = {result.amplitude_a:.6g}, b = {result.amplitude_b:.6g}")
    print(f"t0 = {result.t0_used:.6g}, steps = {result.steps}, norm drift = {result.norm_drift:.3e}")

    document = {"model": model.describe(), "result": result.to_dict(), "config": job.to_dict()}
    if isinstance(model, GenLZModel):
        params = model.params
        formulas = comparisons(params)
        for tag, value in formulas.items():
            print(f"P_{tag} = {value:.12g}" if value is not None else f"P_{tag} = n/a")
        adiabaticity = adiabaticity_parameter(params)
        print(f"delta0^2/|alpha-beta| = {adiabaticity:.6g}")
        document["formulas"] = formulas
        document["adiabaticity_parameter"] = adiabaticity if math.isfinite(adiabaticity) else None
        document["theta_extremes"] = list(theta_extremes(params))
        document["sudden_limit_probability"] = sudden_limit_probability(params)

    if job.get("json"):
        _write_json(job.get("json"), document)
        logger.log(f"Wrote {job.get('json')}")

    if job.get("trajectory"):
        cfg = replace(job.propagation, t0=result.t0_used)
        traced = propagate(model, cfg, reverse=bool(job.get("reverse")), record=True)
        with open(job.get("trajectory"), "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(TRAJECTORY_HEADER)
            for t, a0, a1, upper in traced.trajectory:
                writer.writerow([f"{v:.16e}" for v in (t, a0.real, a0.imag, a1.real, a1.imag, upper)])
        logger.log(f"Wrote {job.get('trajectory')} ({len(traced.trajectory)} rows)")
    return EXIT_OK


def cmd_sweep(job, quiet=False):
    compare = tuple(t.strip() for t in job.get("compare").split(",") if t.strip())
    grid = SweepGrid(
        alpha_axis=parse_range(job.get("alpha_range")),
        beta_axis=parse_range(job.get("beta_range")),
        delta0=job.get("delta0"),
        cfg=job.propagation,
        comparisons=compare,
    )
    workers = job.get("workers") or default_workers()
    out_dir = Path(job.get("out"))
    out_dir.mkdir(parents=True, exist_ok=True)

    reporter = TqdmReporter(grid.size, disable=quiet)
    records = run_sweep(grid, workers=workers, callback=reporter)
    timings = bool(job.get("timings"))
    csv_path = write_csv(records, out_dir / "sweep.csv", timings=timings)

    extra = {"config": job.to_dict()}
    if job.get("boundary_alpha") is not None:
        beta_star = superadiabatic_boundary(job.get("boundary_alpha"), grid.delta0, grid.cfg)
        extra["superadiabatic_boundary"] = {"alpha": job.get("boundary_alpha"), "beta": beta_star}
        print(f"beta* = {beta_star:.8g} at alpha = {job.get('boundary_alpha')}")
    summary_path = write_summary_json(records, grid, out_dir / "summary.json", timings, extra)

    failed = sum(1 for r in records if not r.converged)
    print(f"{len(records)} points, {failed} failed")
    print(f"Wrote {csv_path} and {summary_path}")
    return EXIT_OK


def cmd_landscape_gen(job):
    land = synth_landscape(
        seed=job.get("seed"),
        n_modes=job.get("n_modes"),
        corr_length=job.get("corr_length"),
        mean_coupling=job.get("mean_coupling"),
        extent=job.get("extent"),
        n_samples=job.get("n_samples"),
    )
    path = save_landscape(land, job.get("out"))
    print(f"Wrote {path} ({len(land.positions)} samples)")
    return EXIT_OK


def _schedule_for(job, land):
    caps = None
    if job.get("v_min") is not None or job.get("v_max") is not None:
        avg = job.get("avg_velocity")
        caps = (job.get("v_min") or avg / 1e3, job.get("v_max") or avg * 1e3)
    return make_schedule(land, job.get("schedule"), job.get("avg_velocity"), caps,
                         gap_exponent=job.get("gap_exponent"))


def cmd_shuttle(job):
    _require(job, "landscape")
    land = load_landscape(job.get("landscape"), job.get("interpolation"))

    if job.command == "shuttle-schedule":
        schedule = _schedule_for(job, land)
        path = save_schedule(schedule, job.get("out"))
        print(f"Wrote {path} ({schedule.kind}, duration {schedule.duration:.6g} ns)")
        return EXIT_OK

    if job.get("schedule_file"):
        schedule = load_schedule(job.get("schedule_file"))
    else:
        schedule = _schedule_for(job, land)
    result = shuttle_simulate(land, schedule, job.propagation, frame=job.get("frame"),
                              prominence=job.get("prominence"))
    print(f"schedule = {result.schedule_kind}, avg velocity = {result.avg_velocity:.6g} m/s")
    print(f"P_excite = {result.p_excite:.12g}, fidelity = {result.fidelity:.12g}")
    print(f"duration = {result.duration:.6g} ns, anticrossings = {len(result.anticrossing_report)}")
    if job.get("json"):
        save_result_json(result, job.get("json"), config=job.to_dict())
        logger.log(f"Wrote {job.get('json')}")
    return EXIT_OK


def cmd_doctor():
    issues = run_startup_diagnostics()
    for issue in issues:
        print(f"  - {issue}")
    print(f"superlz {__version__}: {len(issues)} issue(s); log at {logger.get_log_path_display()}")
    return EXIT_OK if not issues else EXIT_NUMERICAL


def main(argv=None):
    """Entry point; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    if args.verbose:
        logger.set_echo_level("DEBUG")
    elif args.quiet:
        logger.set_echo_level("ERROR")
    else:
        logger.set_echo_level("WARN")

    logger.log(f"=== superlz {__version__}: {' '.join(sys.argv[1:] if argv is None else argv)} ===")
    try:
        if args.command == "doctor":
            return cmd_doctor()
        job = _resolve_job(args)
        if job.command == "simulate":
            return cmd_simulate(job)
        if job.command == "sweep":
            return cmd_sweep(job, quiet=args.quiet)
        if job.command == "landscape-gen":
            return cmd_landscape_gen(job)
        return cmd_shuttle(job)
    except SuperLZError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        logger.log_exception(e, args.command)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except Exception as e:
        logger.log_exception(e, args.command)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
