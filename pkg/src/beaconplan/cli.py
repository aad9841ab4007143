"""Command-line entry point: ``beaconplan <command> [options]``.

Commands
--------
optimize      place beacons with one solver; positions, report, trace, optional heatmap
compare       worst-point power and normalized wall time per beacon count and solver
min-beacons   smallest beacon count meeting the outage target, per (zeta, radius)
coverage      largest coverable radius per beacon count against the centered benchmark
antennas      outage matrix over beacon and antenna counts
grid-export   the proxy grid as CSV

Settings come from defaults, then ``--config FILE`` (flat JSON), then
``--set KEY=VALUE``, then the dedicated flags. Exit status is 0 when every
requested computation completed and converged, 1 otherwise, 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .channel import Deployment
from .config import STOCHASTIC_SOLVERS, RunConfig
from .exceptions import BeaconPlanError, ConfigError
from .geometry import grid_for_size
from .io import atomic_write_text, write_csv, write_manifest
from .objective import evaluate_field
from .planner import antenna_study, centered_coverage_radius, max_coverage_radius, min_beacons
from .solvers import SOLVERS, solve_placement

log = logging.getLogger("beaconplan")

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _str_list(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def create_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat JSON configuration file")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration key (value parsed as JSON when possible)")
    common.add_argument("--seed", dest="seed", type=int, help="RNG seed (required for stochastic runs)")
    common.add_argument("--out", dest="output_dir", help="output directory")
    common.add_argument("--jobs", dest="n_jobs", type=int, help="worker threads for Monte Carlo")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="beaconplan", description=__doc__.split("\n")[0],
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", parents=[common], help="place beacons with one solver")
    p.add_argument("--solver", choices=SOLVERS)
    p.add_argument("--beacons", dest="beacon_count", type=int)
    p.add_argument("--radius", dest="radius_m", type=float)
    p.add_argument("--heatmap", action="store_const", const=True, default=None)

    p = sub.add_parser("compare", parents=[common], help="compare solvers over a beacon range")
    p.add_argument("--beacon-min", dest="compare_beacon_min", type=int)
    p.add_argument("--beacon-max", dest="compare_beacon_max", type=int)
    p.add_argument("--solvers", dest="compare_solvers", type=_str_list)

    p = sub.add_parser("min-beacons", parents=[common], help="minimum beacon count per (zeta, R)")
    p.add_argument("--solver", choices=SOLVERS)
    p.add_argument("--zeta", dest="sweep_zeta", type=_float_list)
    p.add_argument("--radius", dest="sweep_radius_m", type=_float_list)
    p.add_argument("--samples", type=int)
    p.add_argument("--cap", dest="beacon_cap", type=int)
    p.add_argument("--antennas", dest="antenna_count", type=int)

    p = sub.add_parser("coverage", parents=[common], help="maximum coverage radius per beacon count")
    p.add_argument("--solver", choices=SOLVERS)
    p.add_argument("--beacons", dest="coverage_beacon_counts", type=_int_list)
    p.add_argument("--tolerance", dest="coverage_tolerance_m", type=float)
    p.add_argument("--gamma", dest="path_loss_exponent", type=float)

    p = sub.add_parser("antennas", parents=[common], help="outage over beacon and antenna counts")
    p.add_argument("--beacons", dest="antenna_beacon_counts", type=_int_list)
    p.add_argument("--antennas", dest="antenna_counts", type=_int_list)
    p.add_argument("--samples", type=int)

    p = sub.add_parser("grid-export", parents=[common], help="write the proxy grid")
    p.add_argument("--radius", dest="radius_m", type=float)
    p.add_argument("--grid-points", dest="grid_points", type=int)
    return parser


_NON_CONFIG = {"command", "config", "overrides", "verbose"}


def resolve_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    changes = {}
    for item in args.overrides:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        try:
            changes[key.strip()] = json.loads(raw)
        except json.JSONDecodeError:
            changes[key.strip()] = raw
    for key, value in vars(args).items():
        if key not in _NON_CONFIG and value is not None:
            changes[key] = value
    return cfg.override(**changes) if changes else cfg


def is_stochastic(command: str, cfg: RunConfig) -> bool:
    if command in ("min-beacons", "antennas"):
        return True
    if command in ("optimize", "coverage"):
        return cfg.solver in STOCHASTIC_SOLVERS
    if command == "compare":
        return any(s in STOCHASTIC_SOLVERS for s in cfg.compare_solvers)
    return False


def _seed(cfg: RunConfig) -> int:
    return 0 if cfg.seed is None else cfg.seed


# -- commands -----------------------------------------------------------------

def cmd_optimize(cfg: RunConfig, out: Path):
    area = cfg.area()
    grid = grid_for_size(cfg.radius_m, cfg.grid_points)
    power = cfg.tx_power_total_w / cfg.beacon_count
    report = solve_placement(cfg.solver, cfg.beacon_count, grid, area.pl, power, seed=cfg.seed,
                             ipm_config=cfg.ipm_config(), pso_config=cfg.pso_config(),
                             delta_r=cfg.delta_r_m)
    files = [
        write_csv(out / "positions.csv", ["b", "x", "y"],
                  [(b, x, y) for b, (x, y) in enumerate(report.positions)]),
        atomic_write_text(out / "report.json", report.to_json(include_timing=False) + "\n"),
        atomic_write_text(out / "trace.csv", report.trace_csv()),
    ]
    if cfg.heatmap:
        fld = evaluate_field(Deployment(report.positions, power), grid, area.pl, on_coincident="exclude")
        files.append(atomic_write_text(out / "heatmap.csv", fld.to_csv()))
    log.info("%s |B|=%d worst=%.4g W (%.2f dBm) converged=%s", report.solver, report.beacon_count,
             report.worst_power_w, report.worst_power_dbm, report.converged)
    timing = {"wall_time_ms": report.wall_time_ms}
    return files, report.converged, timing


def cmd_compare(cfg: RunConfig, out: Path):
    area = cfg.area()
    grid = grid_for_size(cfg.radius_m, cfg.grid_points)
    rows, ok = [], True
    for B in range(cfg.compare_beacon_min, cfg.compare_beacon_max + 1):
        power = cfg.tx_power_total_w / B
        # the reference time is always measured, even when ode-pobes is not listed
        ref = solve_placement("ode-pobes", B, grid, area.pl, power, delta_r=cfg.delta_r_m)
        for solver in cfg.compare_solvers:
            try:
                rep = ref if solver == "ode-pobes" else solve_placement(
                    solver, B, grid, area.pl, power, seed=cfg.seed, ipm_config=cfg.ipm_config(),
                    pso_config=cfg.pso_config(), delta_r=cfg.delta_r_m)
            except BeaconPlanError as exc:
                log.error("%s failed at |B|=%d: %s", solver, B, exc)
                rows.append((B, solver, None, None, None, None, False, "failed"))
                ok = False
                continue
            ok &= rep.converged
            rows.append((B, solver, rep.worst_power_w, rep.worst_power_dbm, rep.wall_time_ms,
                         rep.wall_time_ms / ref.wall_time_ms, rep.converged, "ok"))
            log.info("|B|=%d %-18s worst=%.4g W", B, solver, rep.worst_power_w)
    header = ["beacon_count", "solver", "worst_power_w", "worst_power_dbm", "wall_time_ms",
              "normalized_time", "converged", "status"]
    return [write_csv(out / "compare.csv", header, rows)], ok, {}


def cmd_min_beacons(cfg: RunConfig, out: Path):
    base = cfg.area()
    table, curve = [], []
    for R in cfg.sweep_radius_m:
        grid = grid_for_size(R, cfg.grid_points)
        for zeta in cfg.sweep_zeta:
            area = base.replace(R=R, zeta=zeta)
            res = min_beacons(area, cfg.solver, cfg.antenna_count, cfg.samples, _seed(cfg),
                              cap=cfg.beacon_cap, grid=grid, audit=cfg.audit_points, n_jobs=cfg.n_jobs,
                              ipm_config=cfg.ipm_config(), pso_config=cfg.pso_config())
            table.append((zeta, R, cfg.solver, cfg.antenna_count, res.beacon_count, res.feasible,
                          res.outage.probability, res.outage.half_width_95, res.outage.worst_index))
            curve.extend((zeta, R, B, p, hw) for B, p, hw in res.history)
            log.info("zeta=%g R=%g -> |B|min=%d feasible=%s", zeta, R, res.beacon_count, res.feasible)
    files = [
        write_csv(out / "min_beacons.csv",
                  ["zeta", "radius_m", "solver", "antenna_count", "min_beacons", "feasible",
                   "outage", "half_width_95", "worst_index"], table),
        write_csv(out / "outage_curve.csv",
                  ["zeta", "radius_m", "beacon_count", "outage", "half_width_95"], curve),
    ]
    return files, True, {}


def cmd_coverage(cfg: RunConfig, out: Path):
    area = cfg.area()
    r_center = centered_coverage_radius(area)
    rows, ok = [], True
    for B in cfg.coverage_beacon_counts:
        try:
            res = max_coverage_radius(B, area, cfg.solver, cfg.coverage_tolerance_m, seed=_seed(cfg))
        except BeaconPlanError as exc:
            log.error("coverage failed at |B|=%d: %s", B, exc)
            rows.append((B, cfg.solver, cfg.path_loss_exponent, None, r_center, None, None, False))
            ok = False
            continue
        rows.append((B, cfg.solver, cfg.path_loss_exponent, res.r_max, r_center,
                     (res.r_max / r_center) ** 2, res.worst_power, res.feasible))
        log.info("|B|=%d R_max=%.3f m (centered %.3f m)", B, res.r_max, r_center)
    header = ["beacon_count", "solver", "path_loss_exponent", "r_max_m", "centered_r_max_m",
              "area_ratio", "worst_power_w", "feasible"]
    return [write_csv(out / "coverage.csv", header, rows)], ok, {}


def cmd_antennas(cfg: RunConfig, out: Path):
    study = antenna_study(cfg.area(), cfg.antenna_beacon_counts, cfg.antenna_counts, cfg.samples,
                          _seed(cfg), grid=grid_for_size(cfg.radius_m, cfg.grid_points),
                          audit=cfg.audit_points, n_jobs=cfg.n_jobs)
    rows = []
    for B, row in zip(study.beacon_counts, study.estimates):
        for A, est in zip(study.antenna_counts, row):
            worst = est.audited[0]
            rows.append((B, A, est.probability, est.half_width_95, est.failures, est.samples,
                         est.worst_index, worst.worst_index, worst.mean_power, worst.std_error))
    header = ["beacon_count", "antenna_count", "outage", "half_width_95", "failures", "samples",
              "outage_index", "worst_mean_index", "worst_mean_power_w", "worst_mean_power_se_w"]
    return [write_csv(out / "antennas.csv", header, rows)], True, {}


def cmd_grid_export(cfg: RunConfig, out: Path):
    grid = grid_for_size(cfg.radius_m, cfg.grid_points)
    return [atomic_write_text(out / "grid.csv", grid.to_csv())], True, {}


COMMANDS = {
    "optimize": cmd_optimize,
    "compare": cmd_compare,
    "min-beacons": cmd_min_beacons,
    "coverage": cmd_coverage,
    "antennas": cmd_antennas,
    "grid-export": cmd_grid_export,
}


def main(argv=None) -> int:
    parser = create_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
    except (ConfigError, TypeError, OSError) as exc:
        print(f"beaconplan: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if is_stochastic(args.command, cfg) and args.seed is None:
        print(f"beaconplan: {args.command} with these settings is stochastic; --seed is required",
              file=sys.stderr)
        return EXIT_USAGE

    out = Path(cfg.output_dir)
    t0 = time.perf_counter()
    try:
        files, ok, timing = COMMANDS[args.command](cfg, out)
    except BeaconPlanError as exc:
        print(f"beaconplan: {args.command} failed: {exc}", file=sys.stderr)
        write_manifest(out, args.command, cfg, [], status="failed", extra={"error": str(exc)})
        return EXIT_FAILED
    timing["command_wall_ms"] = (time.perf_counter() - t0) * 1e3
    write_manifest(out, args.command, cfg, files, status="ok" if ok else "not-converged",
                   extra={"timing": timing})
    if not ok:
        print(f"beaconplan: {args.command}: some computations failed or did not converge",
              file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
