"""Command-line front end: run, trip solve, stationarity, experiment."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .controls import load_control
from .driver import (InitStrategy, RadiusStrategy, SlipConfig, LOG_COLUMNS,
                     run, run_mesh_sequenced, zero_control)
from .experiments import load_spec, run_experiment
from .model import instance_from_config
from .stationarity import report_to_json_file, sl_measure
from .trip import load_trip_instance, solve_dp, trip_solution_to_json


def _load_toml(path):
    if sys.version_info >= (3, 11):
        import tomllib as toml
    else:
        import tomli as toml
    with open(path, "rb") as fh:
        return toml.load(fh)


def _load_config_file(path) -> dict:
    path = Path(path)
    if path.suffix == ".json":
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    return _load_toml(path)


def _slip_config(section: dict) -> SlipConfig:
    return SlipConfig(
        n_cells=int(section["n_cells"]),
        delta0=float(section.get("delta0", 0.125)),
        sigma=float(section.get("sigma", 1e-3)),
        radius_strategy=RadiusStrategy(section.get("radius_strategy", "reset")),
        init_strategy=InitStrategy(section.get("init_strategy", "zero")),
        max_outer_iterations=int(section.get("max_outer_iterations", 10000)),
    )


def _cmd_run(args) -> int:
    cfg = _load_config_file(args.config)
    model = instance_from_config(cfg.get("instance", {}))
    section = cfg.get("slip", {})
    if "n_cells" not in section:
        raise SystemExit("config needs slip.n_cells")
    config = _slip_config(section)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    log_path = out / "iterations.csv"

    with open(log_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(LOG_COLUMNS)

        def stream(rec):
            writer.writerow([rec.n, rec.k, repr(rec.delta), repr(rec.pred),
                             repr(rec.ared), int(rec.accepted), repr(rec.J),
                             repr(rec.F_val), rec.tv, f"{rec.time_s:.6f}",
                             repr(rec.stationarity)])
            fh.flush()

        if config.init_strategy is InitStrategy.MESH_SEQUENCING:
            n_list = [int(n) for n in section.get("n_list", [config.n_cells])]
            results = run_mesh_sequenced(model, config, n_list, on_record=stream)
            result = results[-1]
        else:
            if args.init:
                v0 = load_control(args.init, model.levels)
            else:
                v0 = zero_control(model, config.n_cells)
            result = run(model, config, v0, on_record=stream)

    from .controls import save_control
    save_control(result.final, out / "final_control.json")
    print(f"terminated: {result.termination.value}  "
          f"J={result.final_J:.6e}  tv={result.final_tv}  "
          f"records={len(result.log)}")
    print(f"log: {log_path}")
    return 0


def _cmd_trip_solve(args) -> int:
    inst = load_trip_instance(args.instance)
    sol = solve_dp(inst)
    payload = trip_solution_to_json(sol)
    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def _cmd_stationarity(args) -> int:
    cfg = _load_config_file(args.config) if args.config else {}
    model = instance_from_config(cfg.get("instance", cfg))
    control = load_control(args.control, model.levels)
    report = sl_measure(control, model)
    for sw in report.switches:
        print(f"t={sw.time:+.6f}  grad={sw.gradient:+.6e}")
    print(f"measure: {report.measure:.6e}  ({len(report.switches)} switches)")
    if args.out:
        report_to_json_file(report, args.out)
    return 0


def _cmd_experiment(args) -> int:
    spec = load_spec(args.spec)
    out = run_experiment(spec, out_dir=args.out, workers=args.workers)
    print(f"experiment {spec.experiment} complete: {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slip",
        description="Trust-region solver for TV-regularized integer optimal control",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the solver from a config file")
    p_run.add_argument("--config", required=True, help="TOML/JSON config with [instance] and [slip]")
    p_run.add_argument("--init", help="initial control JSON (default: zero control)")
    p_run.add_argument("--out", default="slip_out", help="output directory")
    p_run.set_defaults(func=_cmd_run)

    p_trip = sub.add_parser("trip", help="trust-region subproblem tools")
    trip_sub = p_trip.add_subparsers(dest="trip_command", required=True)
    p_solve = trip_sub.add_parser("solve", help="solve one subproblem instance")
    p_solve.add_argument("--instance", required=True, help="TripInstance JSON file")
    p_solve.add_argument("--out", help="write the solution JSON here as well")
    p_solve.set_defaults(func=_cmd_trip_solve)

    p_stat = sub.add_parser("stationarity", help="stationarity report for a control")
    p_stat.add_argument("--control", required=True, help="control JSON file")
    p_stat.add_argument("--config", help="instance config TOML/JSON (defaults otherwise)")
    p_stat.add_argument("--out", help="write the report JSON here")
    p_stat.set_defaults(func=_cmd_stationarity)

    p_exp = sub.add_parser("experiment", help="run an experiment spec")
    p_exp.add_argument("--spec", required=True, help="experiment spec TOML")
    p_exp.add_argument("--out", required=True, help="output directory")
    p_exp.add_argument("--workers", type=int, default=1, help="parallel runs")
    p_exp.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
