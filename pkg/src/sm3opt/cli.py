"""Command-line experiment harness.

    sm3opt run     config.json --out DIR [--seed N]
    sm3opt compare config.json --out DIR [--seed N]
    sm3opt audit   config.json --out DIR [--seed N]

Exit codes: 0 success, 1 runtime failure, 2 invalid configuration,
3 invariant violation detected by `audit`. All artifacts are
deterministic functions of (config file bytes, seed) while timing
is disabled.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, load_config
from .cover import Cover
from .errors import ConfigError, InvariantViolationError
from .metrics import (
    accumulator_dump,
    memory_account,
    regret_bound_rhs,
    write_compare_csv,
    write_dump_csv,
    write_run_csv,
)
from .optim import Optimizer, OptimizerConfig, build_optimizer
from .problems import Problem
from .runner import RunResult, ShadowAccumulators, execute_compare, execute_run
from .tensor import ParamTensor


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sm3opt", description="cover-compressed adaptive optimizer experiments"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "execute one optimizer and write run artifacts"),
        ("compare", "execute several optimizers side by side"),
        ("audit", "execute while asserting accumulator invariants each step"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="path to the experiment config JSON")
        p.add_argument("--out", help="output directory (overrides config output_dir)")
        p.add_argument("--seed", type=int, help="seed (overrides config seed)")
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config, seed_override=args.seed, out_override=args.out)
        out_dir = _resolve_out_dir(config)
        if args.command == "run":
            _cmd_run(config, out_dir)
        elif args.command == "compare":
            _cmd_compare(config, out_dir)
        else:
            _cmd_audit(config, out_dir)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolationError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - map anything else to exit 1
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _resolve_out_dir(config: ExperimentConfig) -> Path:
    if not config.output_dir:
        raise ConfigError("output_dir is required (set it in the config or pass --out)")
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


def _build_cover(config: ExperimentConfig, problem: Problem) -> Cover:
    try:
        return config.cover_spec.build(problem.shape)
    except (ValueError, OSError) as exc:
        raise ConfigError(f"cover: {exc}") from exc


def _slots(config: ExperimentConfig, problem: Problem, opt: OptimizerConfig) -> int:
    account = memory_account(
        [problem.shape], opt.algorithm, config.cover_spec, momentum=opt.momentum
    )
    return account.state_slots


def _cmd_run(config: ExperimentConfig, out_dir: Path) -> None:
    if len(config.optimizers) != 1:
        raise ConfigError("run requires exactly one entry in optimizers")
    opt_config = config.optimizers[0]
    problem = config.build_problem()
    cover = _build_cover(config, problem)
    shadows = (
        ShadowAccumulators(cover) if config.dump.accumulators_top_n is not None else None
    )
    want_bound = problem.diameter() is not None

    result = execute_run(
        problem,
        opt_config,
        cover,
        config.steps,
        shadows=shadows,
        collect_gradients=want_bound,
        record_timing=config.dump.timing,
    )

    write_run_csv(out_dir / "run.csv", result.records)
    bound = None
    if want_bound:
        bound = regret_bound_rhs(problem.diameter(), result.gradients, cover)

    summary = {
        "final_loss": result.final_loss,
        "final_regret": result.final_regret,
        "bound_rhs": bound,
        "slots": _slots(config, problem, opt_config),
        "steps": config.steps,
        "config_hash": config.config_hash,
        "meta": {
            "command": "run",
            "algorithm": opt_config.algorithm,
            "label": opt_config.display_label,
            "seed": config.seed,
            "problem": problem.spec_dict(),
            "cover": {"kind": config.cover_spec.kind},
        },
    }
    _write_json(out_dir / "summary.json", summary)

    if shadows is not None:
        rows = accumulator_dump(
            shadows.last_gamma if shadows.last_gamma is not None else np.zeros(problem.dimension),
            shadows.last_nu_prime if shadows.last_nu_prime is not None else np.zeros(problem.dimension),
            shadows.last_nu if shadows.last_nu is not None else np.zeros(problem.dimension),
            config.dump.accumulators_top_n,
        )
        write_dump_csv(out_dir / "accumulators.csv", rows)
        if config.dump.plots:
            from .report import render_dump_figure

            render_dump_figure(out_dir, rows)

    if config.dump.checkpoint:
        _write_json(
            out_dir / "checkpoint.json",
            {
                "step": config.steps,
                "config_hash": config.config_hash,
                "w": result.final_w.data.tolist(),
                "optimizer": result.optimizer.state_dict(),
            },
        )

    if config.dump.plots:
        from .report import render_run_figures

        render_run_figures(out_dir, result.records)

    print(f"run complete: {config.steps} steps, artifacts in {out_dir}")


def _cmd_compare(config: ExperimentConfig, out_dir: Path) -> None:
    if len(config.optimizers) < 2:
        raise ConfigError("compare requires at least two entries in optimizers")
    problem = config.build_problem()
    cover = _build_cover(config, problem)
    result = execute_compare(
        problem,
        config.optimizers,
        cover,
        config.steps,
        record_timing=config.dump.timing,
    )
    losses = [run.losses for run in result.runs]
    write_compare_csv(out_dir / "compare.csv", result.labels, losses)

    summary = {
        "steps": config.steps,
        "config_hash": config.config_hash,
        "seed": config.seed,
        "problem": problem.spec_dict(),
        "trajectory_note": (
            "optimizers share the seeded problem draws but follow their own "
            "iterate trajectories; gradient streams coincide only when the "
            "problem's gradients are iterate independent"
        ),
        "optimizers": [
            {
                "label": label,
                "algorithm": run.config.algorithm,
                "final_loss": run.final_loss,
                "final_regret": run.final_regret,
                "slots": _slots(config, problem, run.config),
            }
            for label, run in zip(result.labels, result.runs)
        ],
    }
    _write_json(out_dir / "summary.json", summary)

    if config.dump.plots:
        from .report import render_compare_figure

        render_compare_figure(out_dir, result.labels, losses)

    print(f"compare complete: {len(result.runs)} optimizers, artifacts in {out_dir}")


def _cmd_audit(config: ExperimentConfig, out_dir: Path) -> None:
    if len(config.optimizers) != 1:
        raise ConfigError("audit requires exactly one entry in optimizers")
    opt_config = config.optimizers[0]
    if opt_config.algorithm not in ("sm3-i", "sm3-ii"):
        raise ConfigError(
            "audit requires an sm3-i or sm3-ii optimizer (cover invariants do not "
            f"apply to {opt_config.algorithm})"
        )
    problem = config.build_problem()
    cover = _build_cover(config, problem)
    shadows = ShadowAccumulators(cover)
    optimizer = build_optimizer(opt_config, problem.dimension, cover)
    start_w = None
    start_step = 0

    if config.audit.resume:
        checkpoint = _read_json(config.audit.resume)
        start_step = int(checkpoint["step"])
        if start_step >= config.steps:
            raise ConfigError(
                f"audit.resume checkpoint is at step {start_step}, config has steps={config.steps}"
            )
        start_w = ParamTensor(problem.shape, np.asarray(checkpoint["w"], dtype=np.float64))
        optimizer.load_state_dict(checkpoint["optimizer"])
        shadows.load_state_dict(checkpoint["shadows"])

    report_path = out_dir / "audit.json"
    try:
        result = execute_run(
            problem,
            opt_config,
            cover,
            config.steps,
            shadows=shadows,
            audit_checks=True,
            optimizer=optimizer,
            start_w=start_w,
            start_step=start_step,
        )
    except InvariantViolationError as exc:
        _write_json(
            report_path,
            {
                "status": "fail",
                "message": str(exc),
                "step": exc.step,
                "param_index": exc.index,
                "config_hash": config.config_hash,
            },
        )
        raise

    _write_json(
        report_path,
        {
            "status": "pass",
            "from_step": start_step + 1,
            "to_step": config.steps,
            "steps_checked": config.steps - start_step,
            "config_hash": config.config_hash,
        },
    )
    if config.audit.checkpoint_out:
        _write_json(
            Path(config.audit.checkpoint_out),
            {
                "step": config.steps,
                "config_hash": config.config_hash,
                "w": result.final_w.data.tolist(),
                "optimizer": result.optimizer.state_dict(),
                "shadows": shadows.state_dict(),
            },
        )
    print(f"audit passed: steps {start_step + 1}..{config.steps}, report in {report_path}")


def _write_json(path: Path, payload: dict) -> None:
    path.write_bytes((json.dumps(payload, indent=2, sort_keys=True) + "\n").encode("utf-8"))


def _read_json(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"checkpoint file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"checkpoint file {path} is not valid JSON: {exc}") from exc


if __name__ == "__main__":
    sys.exit(main())
