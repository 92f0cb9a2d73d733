"""YAML configuration documents for the command-line workflows.

Dot and region indices are 1-based in configuration files, as in the usual
physics notation; they are converted to 0-based indices on load.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, ValidationError, field_validator, model_validator

from .dots import LambdaDot, Region, TwoLevelDot, lambda_ensemble, mixed_polarization_control, region_controls, two_level_ensemble
from .errors import ConfigError
from .multipartite import BlockSystem
from .propagator import PulseSchedule, gaussian_pi_pulse

DEFAULT_STEPS = 10_000

Entry = Union[float, str]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RegionSpec(_Strict):
    name: str
    members: list[int] = Field(min_length=1)


class CustomBlockSpec(_Strict):
    drift: list[list[Entry]]
    controls: list[list[list[Entry]]] = Field(min_length=1)
    excitation: Optional[list[float]] = None


class TwoLevelDotSpec(_Strict):
    epsilon: float
    dipole: float


class LambdaDotSpec(_Strict):
    epsilon: float
    d_plus: float
    d_minus: float


class SystemSpec(_Strict):
    kind: Literal["two_level", "lambda", "custom_blocks"]
    dots: list[dict] = Field(default_factory=list)
    regions: Optional[list[RegionSpec]] = None
    polarization_alpha: Optional[float] = None
    blocks: Optional[list[CustomBlockSpec]] = None
    interacting: bool = False

    @field_validator("interacting")
    @classmethod
    def _no_interactions(cls, v):
        if v:
            raise ValueError(
                "interacting subsystems (tensor-product coupling) are not supported; "
                "only non-interacting, block-diagonal ensembles can be analyzed"
            )
        return v

    @model_validator(mode="after")
    def _shape(self):
        if self.kind == "custom_blocks":
            if not self.blocks:
                raise ValueError("custom_blocks systems need a non-empty 'blocks' list")
        elif not self.dots:
            raise ValueError(f"{self.kind} systems need a non-empty 'dots' list")
        if self.polarization_alpha is not None and self.kind != "lambda":
            raise ValueError("polarization_alpha only applies to lambda systems")
        return self


class PulseSpec(_Strict):
    kind: Literal["gaussian", "file", "zero"] = "gaussian"
    t_final: float = Field(200.0, gt=0)
    carrier: Optional[float] = None
    scale: float = 1.0
    path: Optional[str] = None

    @model_validator(mode="after")
    def _path(self):
        if self.kind == "file" and not self.path:
            raise ValueError("pulse kind 'file' needs a 'path'")
        return self


class ObjectiveSpecConfig(_Strict):
    target_dot: int = Field(1, ge=1)
    observable: Literal["selective", "target_only"] = "selective"


class NumericsSpec(_Strict):
    steps: Optional[int] = Field(None, ge=1)
    steps_per_period: Optional[float] = Field(None, gt=0)
    tol: float = Field(1e-9, gt=0, lt=1)
    rank_rtol: float = Field(1e-9, gt=0, lt=1)
    rwa: bool = False
    record_stride: int = Field(10, ge=1)


class OptimizerSpec(_Strict):
    max_iters: int = Field(500, ge=0)
    step0: float = Field(1e-3, gt=0)
    backtrack: float = Field(0.5, gt=0, lt=1)
    grow: float = Field(2.0, ge=1)
    min_step: float = Field(1e-12, gt=0)
    rel_gain_tol: float = Field(1e-6, ge=0)
    stall_window: int = Field(10, ge=1)
    pin_boundaries: bool = False
    fluence_penalty: float = Field(0.0, ge=0)
    optimize_waveform: bool = False


class OutputSpec(_Strict):
    dir: str = "results"


class ModelConfig(_Strict):
    system: SystemSpec
    pulse: PulseSpec = Field(default_factory=PulseSpec)
    objective: ObjectiveSpecConfig = Field(default_factory=ObjectiveSpecConfig)
    numerics: NumericsSpec = Field(default_factory=NumericsSpec)
    optimizer: OptimizerSpec = Field(default_factory=OptimizerSpec)
    output: OutputSpec = Field(default_factory=OutputSpec)

    # directory of the config file; relative pulse paths resolve against it
    _base_dir: Optional[str] = PrivateAttr(None)


def _node_line(node, loc) -> Optional[int]:
    """1-based line of the YAML node at pydantic location ``loc`` (best effort)."""
    line = None
    for key in loc:
        if isinstance(node, yaml.MappingNode):
            match = next((v for k, v in node.value if k.value == key), None)
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            match = node.value[key]
        else:
            match = None
        if match is None:
            break
        node = match
        line = node.start_mark.line + 1
    return line


def parse_config(text: str, base_dir: str | None = None) -> ModelConfig:
    try:
        data = yaml.safe_load(text)
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else None
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}", where) from exc
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping with a 'system' section")
    try:
        cfg = ModelConfig.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        loc = tuple(err["loc"])
        field = ".".join(str(p) for p in loc)
        line = _node_line(root, loc)
        where = f"line {line}, field {field}" if line else f"field {field}"
        raise ConfigError(err["msg"], where) from exc
    cfg._base_dir = base_dir
    _check_dots(cfg, root)
    return cfg


def load_config(path) -> ModelConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return parse_config(text, str(path.parent))


def _check_dots(cfg: ModelConfig, root) -> None:
    spec = {"two_level": TwoLevelDotSpec, "lambda": LambdaDotSpec}.get(cfg.system.kind)
    if spec is None:
        return
    for i, raw in enumerate(cfg.system.dots):
        try:
            spec.model_validate(raw)
        except ValidationError as exc:
            err = exc.errors()[0]
            loc = ("system", "dots", i) + tuple(err["loc"])
            line = _node_line(root, loc) or _node_line(root, loc[:3])
            field = ".".join(str(p) for p in loc)
            where = f"line {line}, field {field}" if line else f"field {field}"
            raise ConfigError(err["msg"], where) from exc


def _matrix(rows, where: str) -> np.ndarray:
    try:
        m = np.array([[complex(str(x).replace(" ", "")) if isinstance(x, str) else x for x in r] for r in rows], dtype=complex)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad matrix entry ({exc})", where) from exc
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ConfigError(f"matrix must be square, got shape {m.shape}", where)
    return m


def build_system(cfg: ModelConfig) -> BlockSystem:
    s = cfg.system
    if s.kind == "two_level":
        sys = two_level_ensemble([TwoLevelDot(**TwoLevelDotSpec.model_validate(d).model_dump()) for d in s.dots])
    elif s.kind == "lambda":
        sys = lambda_ensemble([LambdaDot(**LambdaDotSpec.model_validate(d).model_dump()) for d in s.dots])
        if s.polarization_alpha is not None:
            try:
                sys = mixed_polarization_control(sys, s.polarization_alpha)
            except ValueError as exc:
                raise ConfigError(str(exc), "field system.polarization_alpha") from exc
    else:
        drift, controls, excitation = [], None, []
        for i, b in enumerate(s.blocks):
            where = f"field system.blocks.{i}"
            drift.append(_matrix(b.drift, where + ".drift"))
            mats = [_matrix(c, f"{where}.controls.{m}") for m, c in enumerate(b.controls)]
            if controls is None:
                controls = [[] for _ in mats]
            if len(mats) != len(controls):
                raise ConfigError("every block needs the same number of controls", where + ".controls")
            for m, c in enumerate(mats):
                controls[m].append(c)
            excitation.append(b.excitation)
        exc = None if any(e is None for e in excitation) else excitation
        try:
            sys = BlockSystem(drift, controls, exc)
        except ValueError as err:
            raise ConfigError(str(err), "field system.blocks") from err
    if s.regions:
        regions = []
        for i, r in enumerate(s.regions):
            bad = [m for m in r.members if not 1 <= m <= sys.n_blocks]
            if bad:
                raise ConfigError(f"unknown dots {bad} (have {sys.n_blocks})", f"field system.regions.{i}.members")
            regions.append(Region(r.name, [m - 1 for m in r.members]))
        sys = region_controls(sys, regions)
    return sys


def target_index(cfg: ModelConfig, sys: BlockSystem) -> int:
    t = cfg.objective.target_dot
    if t > sys.n_blocks:
        raise ConfigError(f"target dot {t} out of range (have {sys.n_blocks} dots)", "field objective.target_dot")
    return t - 1


def resolve_steps(cfg: ModelConfig, sys: BlockSystem) -> int:
    n = cfg.numerics
    if n.steps is not None:
        return n.steps
    if n.steps_per_period is not None:
        top = max(np.ptp(np.linalg.eigvalsh(h)) for h in sys.drift)
        return max(1, math.ceil(cfg.pulse.t_final * top / (2 * math.pi) * n.steps_per_period))
    return DEFAULT_STEPS


def carrier_frequency(cfg: ModelConfig, sys: BlockSystem) -> float:
    """Configured carrier, else the transition frequency of the target dot."""
    if cfg.pulse.carrier is not None:
        return cfg.pulse.carrier
    l = target_index(cfg, sys)
    evals = np.linalg.eigvalsh(sys.drift[l])
    return float(evals.max() - evals.min())


def build_pulse(cfg: ModelConfig, sys: BlockSystem) -> PulseSchedule:
    from .reports import read_pulse_csv

    p = cfg.pulse
    if p.kind == "file":
        path = Path(p.path)
        if not path.is_absolute() and cfg._base_dir:
            path = Path(cfg._base_dir) / path
        try:
            pulse = read_pulse_csv(path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read pulse file {path}: {exc}", "field pulse.path") from exc
        if pulse.n_controls != sys.n_controls:
            raise ConfigError(f"pulse file has {pulse.n_controls} controls, system has {sys.n_controls}", "field pulse.path")
        return pulse
    steps = resolve_steps(cfg, sys)
    carrier = carrier_frequency(cfg, sys)
    base = gaussian_pi_pulse(p.t_final, carrier, steps, p.scale)
    samples = np.repeat(base.samples, sys.n_controls, axis=1)
    if p.kind == "zero":
        samples = np.zeros_like(samples)
        return PulseSchedule(samples, base.dt, carrier, {"kind": "zero", "t_final": p.t_final})
    return PulseSchedule(samples, base.dt, carrier, base.envelope_meta)
