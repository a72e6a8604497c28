"""Experiment configuration: strict JSON parsing with a versioned schema.

Unknown keys are rejected everywhere so typos fail loudly before any
execution. All validation errors raise ConfigError naming the offending
field.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cover import CoverSpec
from .errors import ConfigError, InvalidScheduleError
from .optim import ALGORITHMS, OptimizerConfig
from .problems import (
    ActivationPatternSpec,
    Problem,
    linear_adversary_problem,
    quadratic_problem,
    sparse_logreg_problem,
)
from .schedules import KINDS as SCHEDULE_KINDS
from .schedules import ScheduleSpec
from .tensor import Shape

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class DumpOptions:
    accumulators_top_n: int | None = None
    plots: bool = True
    timing: bool = False
    checkpoint: bool = False


@dataclass(frozen=True)
class AuditOptions:
    resume: str | None = None
    checkpoint_out: str | None = None


@dataclass
class ExperimentConfig:
    steps: int
    seed: int
    problem_spec: dict
    cover_spec: CoverSpec
    optimizers: list[OptimizerConfig]
    output_dir: str | None = None
    dump: DumpOptions = field(default_factory=DumpOptions)
    audit: AuditOptions = field(default_factory=AuditOptions)
    effective_dict: dict = field(default_factory=dict)

    def build_problem(self) -> Problem:
        return build_problem(self.problem_spec, self.seed)

    @property
    def config_hash(self) -> str:
        canonical = json.dumps(self.effective_dict, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _require_keys(obj: dict, allowed: set[str], required: set[str], context: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(f"{context} must be an object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in {context}")
    missing = sorted(required - set(obj))
    if missing:
        raise ConfigError(f"missing required key(s) {missing} in {context}")


def _as_int(value, context: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{context} must be an integer")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{context} must be >= {minimum}")
    return value


def _as_number(value, context: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{context} must be a number")
    return float(value)


def _as_bool(value, context: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{context} must be a boolean")
    return value


def parse_schedule(spec: dict | None, context: str) -> ScheduleSpec:
    if spec is None:
        return ScheduleSpec()
    _require_keys(
        spec,
        {"kind", "warmup_steps", "model_dim", "total_steps", "decay", "interval", "floor"},
        {"kind"},
        context,
    )
    if spec["kind"] not in SCHEDULE_KINDS:
        raise ConfigError(f"{context}.kind must be one of {SCHEDULE_KINDS}")
    try:
        return ScheduleSpec(
            kind=spec["kind"],
            warmup_steps=_as_int(spec.get("warmup_steps", 0), f"{context}.warmup_steps", 0),
            model_dim=spec.get("model_dim"),
            total_steps=spec.get("total_steps"),
            decay=spec.get("decay"),
            interval=spec.get("interval"),
            floor=_as_number(spec.get("floor", 0.0), f"{context}.floor"),
        )
    except InvalidScheduleError as exc:
        raise ConfigError(f"{context}: {exc}") from exc


def parse_optimizer(spec: dict, context: str) -> OptimizerConfig:
    _require_keys(
        spec,
        {
            "algorithm",
            "learning_rate",
            "momentum",
            "schedule",
            "projection_radius",
            "epsilon",
            "beta2",
            "label",
        },
        {"algorithm", "learning_rate"},
        context,
    )
    if spec["algorithm"] not in ALGORITHMS:
        raise ConfigError(f"{context}.algorithm must be one of {ALGORITHMS}")
    radius = spec.get("projection_radius")
    try:
        return OptimizerConfig(
            algorithm=spec["algorithm"],
            learning_rate=_as_number(spec["learning_rate"], f"{context}.learning_rate"),
            momentum=_as_number(spec.get("momentum", 0.0), f"{context}.momentum"),
            schedule=parse_schedule(spec.get("schedule"), f"{context}.schedule"),
            projection_radius=(
                None if radius is None else _as_number(radius, f"{context}.projection_radius")
            ),
            epsilon=_as_number(spec.get("epsilon", 1e-8), f"{context}.epsilon"),
            beta2=_as_number(spec.get("beta2", 0.999), f"{context}.beta2"),
            label=spec.get("label"),
        )
    except ConfigError as exc:
        raise ConfigError(f"{context}: {exc}") from exc


def parse_cover(spec: dict, context: str) -> CoverSpec:
    _require_keys(spec, {"kind", "axes", "path"}, {"kind"}, context)
    kind = spec["kind"]
    if kind not in ("singleton", "axes", "custom"):
        raise ConfigError(f"{context}.kind must be singleton, axes, or custom")
    if kind == "custom" and not spec.get("path"):
        raise ConfigError(f"{context}.path is required for a custom cover")
    axes = spec.get("axes")
    if axes is not None:
        if not isinstance(axes, list) or not all(
            isinstance(a, int) and not isinstance(a, bool) for a in axes
        ):
            raise ConfigError(f"{context}.axes must be a list of integers")
        axes = tuple(axes)
    return CoverSpec(kind=kind, axes=axes, path=spec.get("path"))


def build_problem(spec: dict, seed: int) -> Problem:
    context = "problem"
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"{context}.kind is required")
    kind = spec["kind"]
    if kind == "quadratic":
        _require_keys(spec, {"kind", "dim", "noise", "center"}, {"kind", "dim"}, context)
        center = spec.get("center")
        return quadratic_problem(
            _as_int(spec["dim"], f"{context}.dim", 1),
            seed,
            center=None if center is None else np.asarray(center, dtype=np.float64),
            noise=_as_number(spec.get("noise", 1.0), f"{context}.noise"),
        )
    if kind == "sparse_logreg":
        _require_keys(
            spec,
            {"kind", "shape", "row_scales", "col_scales", "sparsity"},
            {"kind", "shape"},
            context,
        )
        dims = spec["shape"]
        if not isinstance(dims, list) or len(dims) != 2:
            raise ConfigError(f"{context}.shape must be [rows, cols]")
        m, n = (_as_int(x, f"{context}.shape", 1) for x in dims)
        pattern = ActivationPatternSpec(
            row_scales=tuple(spec.get("row_scales") or (1.0,) * m),
            col_scales=tuple(spec.get("col_scales") or (1.0,) * n),
            sparsity=_as_number(spec.get("sparsity", 1.0), f"{context}.sparsity"),
        )
        try:
            return sparse_logreg_problem(Shape((m, n)), pattern, seed)
        except ValueError as exc:
            raise ConfigError(f"{context}: {exc}") from exc
    if kind == "linear_adversary":
        _require_keys(spec, {"kind", "dim", "radius"}, {"kind", "dim", "radius"}, context)
        return linear_adversary_problem(
            _as_int(spec["dim"], f"{context}.dim", 1),
            _as_number(spec["radius"], f"{context}.radius"),
            seed,
        )
    raise ConfigError(f"{context}.kind must be quadratic, sparse_logreg, or linear_adversary")


def parse_config(
    raw: dict, *, seed_override: int | None = None, out_override: str | None = None
) -> ExperimentConfig:
    _require_keys(
        raw,
        {
            "schema_version",
            "steps",
            "seed",
            "output_dir",
            "problem",
            "cover",
            "optimizers",
            "dump",
            "audit",
        },
        {"schema_version", "steps", "seed", "problem", "cover", "optimizers"},
        "config",
    )
    if raw["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(
            f"schema_version must be {SCHEMA_VERSION}, got {raw['schema_version']!r}"
        )
    steps = _as_int(raw["steps"], "steps", 1)
    seed = _as_int(raw["seed"], "seed") if seed_override is None else seed_override

    opt_specs = raw["optimizers"]
    if not isinstance(opt_specs, list) or not opt_specs:
        raise ConfigError("optimizers must be a non-empty list")
    optimizers = [
        parse_optimizer(spec, f"optimizers[{idx}]") for idx, spec in enumerate(opt_specs)
    ]

    dump_spec = raw.get("dump") or {}
    _require_keys(
        dump_spec,
        {"accumulators_top_n", "plots", "timing", "checkpoint"},
        set(),
        "dump",
    )
    top_n = dump_spec.get("accumulators_top_n")
    dump = DumpOptions(
        accumulators_top_n=None if top_n is None else _as_int(top_n, "dump.accumulators_top_n", 1),
        plots=_as_bool(dump_spec.get("plots", True), "dump.plots"),
        timing=_as_bool(dump_spec.get("timing", False), "dump.timing"),
        checkpoint=_as_bool(dump_spec.get("checkpoint", False), "dump.checkpoint"),
    )

    audit_spec = raw.get("audit") or {}
    _require_keys(audit_spec, {"resume", "checkpoint_out"}, set(), "audit")
    audit = AuditOptions(
        resume=audit_spec.get("resume"),
        checkpoint_out=audit_spec.get("checkpoint_out"),
    )

    output_dir = out_override if out_override is not None else raw.get("output_dir")

    effective = json.loads(json.dumps(raw))
    effective["seed"] = seed
    config = ExperimentConfig(
        steps=steps,
        seed=seed,
        problem_spec=raw["problem"],
        cover_spec=parse_cover(raw["cover"], "cover"),
        optimizers=optimizers,
        output_dir=output_dir,
        dump=dump,
        audit=audit,
        effective_dict=effective,
    )
    # fail fast on problem construction errors (bad shapes, scales, ...)
    config.build_problem()
    return config


def load_config(
    path: str | Path, *, seed_override: int | None = None, out_override: str | None = None
) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return parse_config(raw, seed_override=seed_override, out_override=out_override)
