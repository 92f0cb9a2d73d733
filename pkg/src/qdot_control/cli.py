"""Command-line entry point: ``qdot-control {analyze,simulate,optimize} --config FILE``.

Exit codes: 0 success (for ``analyze``: simultaneously controllable),
2 ``analyze`` verdict negative, 1 any error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import config as cfgmod
from .errors import ConfigError, OptimizationError, PropagationError
from .multipartite import assess
from .propagator import propagate
from .pulse_opt import OptimizerOptions, optimize, selective_objective
from .reports import (
    SCHEMA_VERSION,
    controllability_report,
    trajectory_summary,
    write_json,
    write_pulse_csv,
    write_trajectory_csv,
)

log = logging.getLogger("qdot_control")


def _setup(args):
    cfg = cfgmod.load_config(args.config)
    if args.rwa:
        cfg.numerics.rwa = True
    if args.tol is not None:
        if not 0 < args.tol < 1:
            raise ConfigError("--tol must lie in (0, 1)")
        cfg.numerics.tol = args.tol
    return cfg, cfgmod.build_system(cfg)


def _out_dir(args, cfg) -> Path:
    out = Path(args.out or cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_analyze(args) -> int:
    cfg, system = _setup(args)
    verdict = assess(system, cfg.numerics.tol, cfg.numerics.rank_rtol)
    report = controllability_report(system, verdict)
    text = json.dumps(report, indent=2)
    print(text)
    if args.out:
        write_json(_out_dir(args, cfg) / "report.json", report)
    return 0 if verdict.mixed_state_simultaneous else 2


def _objective(cfg, system, pulse):
    target = cfgmod.target_index(cfg, system)
    return selective_objective(
        system, target, target_only=cfg.objective.observable == "target_only", target_time=pulse.duration
    )


def cmd_simulate(args) -> int:
    cfg, system = _setup(args)
    pulse = cfgmod.build_pulse(cfg, system)
    obj = _objective(cfg, system, pulse)
    traj = propagate(system, pulse, obj.initial_state, obj.observable, cfg.numerics.record_stride, cfg.numerics.rwa)
    out = _out_dir(args, cfg)
    write_trajectory_csv(out / "trajectory.csv", traj, system)
    summary = trajectory_summary(system, traj, pulse, cfg.numerics.rwa)
    write_json(out / "summary.json", summary)
    print(json.dumps(summary, indent=2))
    return 0


def cmd_optimize(args) -> int:
    cfg, system = _setup(args)
    pulse = cfgmod.build_pulse(cfg, system)
    obj = _objective(cfg, system, pulse)
    o = cfg.optimizer
    opts = OptimizerOptions(
        max_iters=o.max_iters,
        step0=o.step0,
        backtrack=o.backtrack,
        grow=o.grow,
        min_step=o.min_step,
        rel_gain_tol=o.rel_gain_tol,
        stall_window=o.stall_window,
        pin_boundaries=o.pin_boundaries,
        fluence_penalty=o.fluence_penalty,
        optimize_waveform=o.optimize_waveform,
        rwa=cfg.numerics.rwa,
    )
    run = optimize(system, pulse, obj, opts)
    out = _out_dir(args, cfg)
    stride, rwa = cfg.numerics.record_stride, cfg.numerics.rwa
    before = propagate(system, pulse, obj.initial_state, obj.observable, stride, rwa)
    after = propagate(system, run.final_pulse, obj.initial_state, obj.observable, stride, rwa)
    write_pulse_csv(out / "pulse_initial.csv", pulse)
    write_pulse_csv(out / "pulse_optimized.csv", run.final_pulse)
    write_trajectory_csv(out / "trajectory_initial.csv", before, system)
    write_trajectory_csv(out / "trajectory_optimized.csv", after, system)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "target_dot": cfg.objective.target_dot,
        "observable": cfg.objective.observable,
        "options": {k: getattr(opts, k) for k in opts.__dataclass_fields__},
        **run.as_dict(),
        "initial": trajectory_summary(system, before, pulse, rwa),
        "optimized": trajectory_summary(system, after, run.final_pulse, rwa),
    }
    write_json(out / "optimization.json", payload)
    print(json.dumps({k: payload[k] for k in ("initial_objective", "final_objective", "converged", "reason")}, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qdot-control", description=__doc__.splitlines()[0])
    ap.add_argument("--schema-version", action="version", version=SCHEMA_VERSION, help="print the report schema version")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="YAML configuration file")
    common.add_argument("--out", help="output directory (overrides output.dir)")
    common.add_argument("--rwa", action="store_true", help="rotating-wave approximation")
    common.add_argument("--tol", type=float, help="Lie closure independence tolerance")
    common.add_argument("--seed", type=int, help="reserved; all workflows are deterministic")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn, text in (
        ("analyze", cmd_analyze, "controllability report"),
        ("simulate", cmd_simulate, "propagate the configured pulse"),
        ("optimize", cmd_optimize, "shape the pulse for selective excitation"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.set_defaults(func=fn)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
    except PropagationError as exc:
        print(f"propagation failed: {exc}", file=sys.stderr)
    except OptimizationError as exc:
        print(f"optimization aborted: {exc}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
