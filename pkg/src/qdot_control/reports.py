"""CSV and JSON artifacts written by the command-line workflows.

Floats are written with 17 significant digits so every value read back is
bit-identical to the one written.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .multipartite import BlockSystem, SimultaneousVerdict
from .propagator import PulseSchedule, Trajectory

SCHEMA_VERSION = "1.0"
PULSE_MAGIC = "# qdot-control pulse"


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_pulse_csv(path, pulse: PulseSchedule) -> None:
    """Pulse file: ``# key=value`` header lines, then ``step,t_mid,f1..fM`` rows."""
    carrier = "none" if pulse.carrier_freq is None else fmt(pulse.carrier_freq)
    with open(path, "w", newline="") as fh:
        fh.write(f"{PULSE_MAGIC} v{SCHEMA_VERSION}\n")
        fh.write(f"# dt={fmt(pulse.dt)}\n")
        fh.write(f"# carrier_freq={carrier}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "t_mid"] + [f"f{m + 1}" for m in range(pulse.n_controls)])
        for k, (t, row) in enumerate(zip(pulse.t_mid, pulse.samples)):
            w.writerow([k, fmt(t)] + [fmt(v) for v in row])


def read_pulse_csv(path) -> PulseSchedule:
    meta = {}
    rows = []
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition("=")
            if sep:
                meta[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)
    if "dt" not in meta:
        raise ValueError("pulse file lacks a '# dt=' header line")
    reader = csv.reader(body)
    header = next(reader, None)
    if not header or header[:2] != ["step", "t_mid"] or len(header) < 3:
        raise ValueError("pulse file header must be 'step,t_mid,f1[,f2...]'")
    for row in reader:
        if len(row) != len(header):
            raise ValueError(f"row {row[:1]} has {len(row)} columns, expected {len(header)}")
        rows.append([float(v) for v in row[2:]])
    if not rows:
        raise ValueError("pulse file has no samples")
    carrier = meta.get("carrier_freq", "none")
    return PulseSchedule(
        np.array(rows),
        float(meta["dt"]),
        None if carrier == "none" else float(carrier),
        {"kind": "file", "source": str(path)},
    )


def write_trajectory_csv(path, traj: Trajectory, sys: BlockSystem) -> None:
    """Columns ``time, pop_dot1..pop_dotL, observable`` (excited-level populations)."""
    excited = traj.excited(sys)
    obs = traj.observable_values if traj.observable_values is not None else np.full(traj.times.size, np.nan)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time"] + [f"pop_dot{l + 1}" for l in range(sys.n_blocks)] + ["observable"])
        for t, pops, a in zip(traj.times, excited, obs):
            w.writerow([fmt(t)] + [fmt(p) for p in pops] + [fmt(a)])


def read_trajectory_csv(path) -> dict:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(v) for v in row] for row in reader])
    return {name: data[:, i] for i, name in enumerate(header)}


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def controllability_report(sys: BlockSystem, verdict: SimultaneousVerdict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "system": {
            "block_dims": list(sys.block_dims),
            "n_blocks": sys.n_blocks,
            "n_controls": sys.n_controls,
        },
        "per_dot": [{"dot": l + 1, **c.as_dict()} for l, c in enumerate(verdict.per_block_labels)],
        "lie_dimension": verdict.computed_dim,
        "traceless_dimension": verdict.traceless_dim,
        "a_matrix": np.asarray(verdict.a_matrix).tolist(),
        "rank_r": verdict.rank_r,
        "expected_dimension": verdict.expected_dim,
        "mixed_state_simultaneous": verdict.mixed_state_simultaneous,
        "pure_state_simultaneous": verdict.pure_state_simultaneous,
        "block_intersections": [{"dot": l + 1, **c.as_dict()} for l, c in enumerate(verdict.block_intersections)],
        "direct_sum_consistent": verdict.direct_sum_consistent,
        "tolerances": {"independence": verdict.independence_tol, "rank_rtol": verdict.rank_rtol},
    }


def trajectory_summary(sys: BlockSystem, traj: Trajectory, pulse: PulseSchedule, rwa: bool) -> dict:
    final = traj.excited(sys)[-1]
    return {
        "schema_version": SCHEMA_VERSION,
        "final_populations": {f"dot{l + 1}": float(p) for l, p in enumerate(final)},
        "final_observable": None if traj.observable_values is None else float(traj.observable_values[-1]),
        "t_final": float(traj.times[-1]),
        "steps": pulse.steps,
        "dt": pulse.dt,
        "carrier_freq": pulse.carrier_freq,
        "rwa": rwa,
        "pulse": {k: v for k, v in pulse.envelope_meta.items() if isinstance(v, (int, float, str, bool, type(None)))},
    }
