"""
Command-line surface: gen, train, sample, eval, ablate, viz.

Every command resolves a RunConfig (JSON file from --config, then flag
overrides), writes it to <out>/resolved_config.json and exits 0, 1 (runtime
failure) or 2 (usage or configuration error).
"""

import argparse
import json
import os
import sys
import uuid
from pathlib import Path
from typing import List, Optional

import structlog
from pydantic import BaseModel, ValidationError

from gridflow import __version__
from gridflow.core.exceptions import EXIT_FAILURE, ConfigError, GridflowError
from gridflow.core.levels import Level, parse_level
from gridflow.core.logging_utils import configure_logging
from gridflow.core.manifest import read_manifest, resolve_image
from gridflow.eval import (
    REPORT_COLUMNS,
    ablate_cfg,
    ablate_steps,
    best_of_n_table,
    data_scale_sweep,
    evaluate,
    format_table,
    random_walk_baseline,
    report_rows,
    write_csv,
)
from gridflow.eval.ablations import CFG_COLUMNS, SCALE_COLUMNS, STEPS_COLUMNS
from gridflow.eval.baseline import BASELINE_COLUMNS
from gridflow.eval.best_of_n import BEST_OF_N_COLUMNS
from gridflow.flow.checkpoint import DenoiserCheckpoint
from gridflow.flow.trainer import train
from gridflow.oracle.verify import verify
from gridflow.parse import parse
from gridflow.render.png import read_png, write_png
from gridflow.render.spec import DEFAULT_SPEC
from gridflow.sampler import FlowSampler, dump_trajectory, parse_stub
from gridflow.schemas import RunConfig, TaskKind
from gridflow.tasks.dataset import gen_dataset, gen_suite

logger = structlog.get_logger(__name__)

RESOLVED_CONFIG_NAME = "resolved_config.json"


# --- config resolution ---

def load_run_config(path: Optional[str]) -> RunConfig:
    if not path:
        return RunConfig()
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e.strerror}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config {path} is not valid JSON: {e.msg} (line {e.lineno})")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid config {path}: {_first_error(e)}")


def _first_error(e: ValidationError) -> str:
    error = e.errors()[0]
    return ".".join(str(p) for p in error["loc"]) + ": " + error["msg"]


def _override(section: BaseModel, **updates) -> BaseModel:
    """Validated copy of a config section with the non-None flag values applied."""
    updates = {k: v for k, v in updates.items() if v is not None}
    if not updates:
        return section
    try:
        return type(section).model_validate({**section.model_dump(), **updates})
    except ValidationError as e:
        raise ConfigError(f"Invalid option: {_first_error(e)}")


def write_resolved(config: RunConfig, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / RESOLVED_CONFIG_NAME).write_text(
        json.dumps(config.model_dump(mode="json"), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def default_jobs() -> int:
    value = os.environ.get("GRIDFLOW_JOBS")
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            raise ConfigError(f"GRIDFLOW_JOBS must be an integer, got {value!r}")
    return os.cpu_count() or 1


def _level(kind: str, text: str) -> Level:
    try:
        return parse_level(kind, text)
    except ValueError as e:
        raise ConfigError(f"Invalid --level {text!r}: {e}")


def _number_list(text: str, cast, flag: str) -> list:
    try:
        return [cast(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{flag} expects comma-separated numbers, got {text!r}")


def _int_list(text: str, flag: str) -> List[int]:
    return _number_list(text, int, flag)


def _float_list(text: str, flag: str) -> List[float]:
    return _number_list(text, float, flag)


def _load_checkpoint(path: Optional[str]) -> DenoiserCheckpoint:
    if not path:
        raise ConfigError("--checkpoint is required")
    return DenoiserCheckpoint.load(path)


def _make_sampler(args, config: RunConfig):
    if getattr(args, "stub", None):
        try:
            return parse_stub(args.stub, DEFAULT_SPEC), "none"
        except ValueError as e:
            raise ConfigError(str(e))
    checkpoint = _load_checkpoint(args.checkpoint)
    return FlowSampler(checkpoint, config.sample, use_ema=not args.no_ema), checkpoint.checkpoint_id


def _find_record(manifest: str, record_id: Optional[str]):
    records = read_manifest(manifest)
    if record_id is None:
        return records[0]
    for record in records:
        if record.id == record_id:
            return record
    raise ConfigError(f"Instance {record_id} is not in {manifest}")


def _emit(rows, columns, path: Path) -> None:
    write_csv(rows, columns, path)
    print(format_table(rows, columns))
    logger.info("table_written", path=str(path), rows=len(rows))


# --- commands ---

def cmd_gen(args, config: RunConfig) -> int:
    out = Path(args.out)
    if args.suite:
        if args.task is None:
            raise ConfigError("--suite requires --task")
        write_resolved(config, out)
        gen_suite(TaskKind(args.task), out, DEFAULT_SPEC, args.jobs, config.gen.base_seed, args.scale, config.eval.test_count)
        return 0

    level = _level(args.task or config.gen.kind.value, args.level) if args.level else None
    config.gen = _override(config.gen, kind=args.task, level=level, count=args.count, base_seed=args.seed)
    write_resolved(config, out)
    gen_dataset(config.gen, out, DEFAULT_SPEC, args.jobs)
    return 0


def cmd_train(args, config: RunConfig) -> int:
    config.train = _override(
        config.train,
        steps=args.steps,
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        seed=args.seed,
        base_width=args.base_width,
        p_uncond=args.p_uncond,
        device=args.device,
    )
    out = Path(args.out)
    write_resolved(config, out)
    train(config.train, args.manifest, out, DEFAULT_SPEC)
    return 0


def _sample_overrides(args, config: RunConfig, **extra) -> None:
    config.sample = _override(
        config.sample, steps=args.steps, cfg_scale=args.cfg, seed=args.seed, **extra
    )


def cmd_sample(args, config: RunConfig) -> int:
    _sample_overrides(args, config, record_trajectory=True if args.trajectory else None)
    out = Path(args.out)
    write_resolved(config, out)

    record = _find_record(args.manifest, args.instance)
    instance = record.to_instance()
    input_image = read_png(resolve_image(args.manifest, record.input_png_path))
    sampler, _ = _make_sampler(args, config)
    image, trajectory = sampler.sample(instance, input_image, config.sample.seed)
    write_png(image, out / f"{instance.id}.png")
    if trajectory is not None:
        dump_trajectory(trajectory, out / "trajectory")

    try:
        verdict = verify(instance, parse(image, instance, DEFAULT_SPEC), record.solution, strict=config.sample.strict)
        logger.info("sample_written", id=instance.id, correct=verdict.correct, reward=verdict.partial_reward)
    except GridflowError as e:
        logger.info("sample_written", id=instance.id, correct=False, parse_error=type(e).__name__)
    return 0


def cmd_eval(args, config: RunConfig) -> int:
    _sample_overrides(args, config, strict=True if args.strict else None)
    if args.best_of:
        config.eval = _override(config.eval, best_of_n=_int_list(args.best_of, "--best-of"))
    out = Path(args.out)
    write_resolved(config, out)

    if args.random_walks:
        try:
            rows = random_walk_baseline(read_manifest(args.manifest), args.random_walks, config.sample.seed)
        except ValueError as e:
            raise ConfigError(f"--random-walks: {e}")
        _emit(rows, BASELINE_COLUMNS, out / "random_walk.csv")
        return 0

    sampler, checkpoint_id = _make_sampler(args, config)
    report = evaluate(sampler, args.manifest, config.sample, DEFAULT_SPEC, checkpoint_id)
    (out / "report.json").write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    _emit(report_rows(report), REPORT_COLUMNS, out / "report.csv")

    if args.best_of:
        rows = best_of_n_table(sampler, args.manifest, config.eval.best_of_n, config.sample, DEFAULT_SPEC)
        _emit(rows, BEST_OF_N_COLUMNS, out / "best_of_n.csv")
    return 0


def cmd_ablate(args, config: RunConfig) -> int:
    if args.steps_list:
        config.eval = _override(config.eval, steps_list=_int_list(args.steps_list, "--steps-list"))
    if args.cfg_list:
        config.eval = _override(config.eval, cfg_list=_float_list(args.cfg_list, "--cfg-list"))
    if args.data_scale:
        config.eval = _override(config.eval, sizes_list=_int_list(args.data_scale, "--data-scale"))
    _sample_overrides(args, config)
    out = Path(args.out)
    write_resolved(config, out)

    if not (args.steps_list or args.cfg_list or args.data_scale):
        raise ConfigError("ablate needs one of --steps-list, --cfg-list or --data-scale")

    if args.data_scale:
        if args.task is None or args.level is None:
            raise ConfigError("--data-scale requires --task and --level")
        kind = TaskKind(args.task)
        rows = data_scale_sweep(
            kind,
            _level(kind.value, args.level),
            config.eval.sizes_list,
            config.train,
            config.sample,
            out,
            config.eval.test_count,
            DEFAULT_SPEC,
            args.jobs,
        )
        _emit(rows, SCALE_COLUMNS, out / "data_scale.csv")
        return 0

    if not args.manifest:
        raise ConfigError("--manifest is required")
    sampler = FlowSampler(_load_checkpoint(args.checkpoint), config.sample, use_ema=not args.no_ema)
    if args.steps_list:
        rows = ablate_steps(sampler, args.manifest, config.eval.steps_list, config.sample, DEFAULT_SPEC)
        _emit(rows, STEPS_COLUMNS, out / "steps.csv")
    if args.cfg_list:
        rows = ablate_cfg(
            sampler, args.manifest, config.eval.cfg_list, config.sample, out,
            config.eval.montage_instances, DEFAULT_SPEC,
        )
        _emit(rows, CFG_COLUMNS, out / "cfg.csv")
    return 0


def cmd_viz(args, config: RunConfig) -> int:
    _sample_overrides(args, config, record_trajectory=True)
    out = Path(args.out)
    write_resolved(config, out)

    record = _find_record(args.manifest, args.instance)
    input_image = read_png(resolve_image(args.manifest, record.input_png_path))
    sampler = FlowSampler(_load_checkpoint(args.checkpoint), config.sample, use_ema=not args.no_ema)
    _, trajectory = sampler.sample(record.to_instance(), input_image, config.sample.seed)
    dump_trajectory(trajectory, out)
    return 0


COMMANDS = {
    "gen": cmd_gen,
    "train": cmd_train,
    "sample": cmd_sample,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "viz": cmd_viz,
}


# --- parser ---

def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON RunConfig file; flags override its values")
    parser.add_argument("--out", required=True, help="Output directory")
    parser.add_argument("--jobs", type=int, default=None, help="Worker processes (default: $GRIDFLOW_JOBS or CPU count)")
    parser.add_argument("--log-level", default=None, help="Log level (default: $GRIDFLOW_LOG_LEVEL or INFO)")
    parser.add_argument("--log-format", choices=["json", "console"], default="json", help="Log renderer")


def _sampling(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--steps", type=int, help="Euler steps T (default 20)")
    parser.add_argument("--cfg", type=float, help="Guidance scale w (default 4)")
    parser.add_argument("--seed", type=int, help="Sampling seed")
    parser.add_argument("--checkpoint", help="Denoiser checkpoint (.dftk)")
    parser.add_argument("--no-ema", action="store_true", help="Sample with raw instead of EMA weights")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridflow", description="Visual reasoning tasks solved by image generation.")
    parser.add_argument("--version", action="version", version=f"gridflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    kinds = [k.value for k in TaskKind]

    gen = sub.add_parser("gen", help="Generate a dataset")
    _common(gen)
    gen.add_argument("--task", choices=kinds, help="Task kind")
    gen.add_argument("--level", help="Difficulty level, e.g. 8 or 2x2 for jigsaw")
    gen.add_argument("--count", type=int, help="Number of instances")
    gen.add_argument("--seed", type=int, help="Base seed")
    gen.add_argument("--suite", action="store_true", help="Generate the full train/test suite for --task")
    gen.add_argument("--scale", type=float, default=1.0, help="Suite mode: multiply published training counts")

    tr = sub.add_parser("train", help="Train a denoiser on a manifest")
    _common(tr)
    tr.add_argument("--manifest", required=True, help="Training manifest or dataset directory")
    tr.add_argument("--steps", type=int, help="Optimizer steps (overrides --epochs)")
    tr.add_argument("--epochs", type=int, help="Epochs (default 5)")
    tr.add_argument("--batch-size", type=int, help="Batch size (default 8)")
    tr.add_argument("--lr", type=float, help="Learning rate (default 1e-4)")
    tr.add_argument("--seed", type=int, help="Training seed")
    tr.add_argument("--base-width", type=int, help="Denoiser base channel width (default 64)")
    tr.add_argument("--p-uncond", type=float, help="Condition dropout probability (default 0.1)")
    tr.add_argument("--device", help="torch device (default cpu)")

    sa = sub.add_parser("sample", help="Sample a solution image for one instance")
    _common(sa)
    _sampling(sa)
    sa.add_argument("--manifest", required=True, help="Manifest holding the instance")
    sa.add_argument("--instance", help="Instance id (default: first record)")
    sa.add_argument("--trajectory", action="store_true", help="Also dump per-step x0 estimates")
    sa.add_argument("--stub", help=argparse.SUPPRESS)

    ev = sub.add_parser("eval", help="Evaluate a checkpoint on a test manifest")
    _common(ev)
    _sampling(ev)
    ev.add_argument("--manifest", required=True, help="Test manifest or dataset directory")
    ev.add_argument("--strict", action="store_true", help="Require shortest frozen-lake paths")
    ev.add_argument("--best-of", help="Comma-separated candidate counts, e.g. 1,2,4,8")
    ev.add_argument("--random-walks", type=int, help="Report the random-walk baseline with this many walks per instance")
    ev.add_argument("--stub", help=argparse.SUPPRESS)

    ab = sub.add_parser("ablate", help="Step, guidance or data-scale sweeps")
    _common(ab)
    _sampling(ab)
    ab.add_argument("--manifest", help="Test manifest for step/guidance sweeps")
    ab.add_argument("--steps-list", help="Comma-separated step counts, e.g. 5,10,20,30,40")
    ab.add_argument("--cfg-list", help="Comma-separated guidance scales, e.g. 1,2,3,4,5,6,7")
    ab.add_argument("--data-scale", help="Comma-separated training-set sizes, e.g. 64,512,4096")
    ab.add_argument("--task", choices=kinds, help="Data-scale sweep: task kind")
    ab.add_argument("--level", help="Data-scale sweep: level")

    vz = sub.add_parser("viz", help="Dump the x0-estimate trajectory of one instance")
    _common(vz)
    _sampling(vz)
    vz.add_argument("--manifest", required=True, help="Manifest holding the instance")
    vz.add_argument("--instance", help="Instance id (default: first record)")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    configure_logging(
        level=args.log_level or os.environ.get("GRIDFLOW_LOG_LEVEL", "INFO"),
        json_output=args.log_format == "json",
    )
    structlog.contextvars.clear_contextvars()
    structlog.contextvars.bind_contextvars(command=args.command, run_id=uuid.uuid4().hex[:12])

    try:
        if args.jobs is None:
            args.jobs = default_jobs()
        config = load_run_config(args.config)
        code = COMMANDS[args.command](args, config)
        logger.info("command_finished", exit_code=code)
        return code
    except GridflowError as e:
        logger.error("command_failed", error_type=type(e).__name__, detail=e.detail)
        print(f"gridflow {args.command}: {e.detail}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception("unhandled_exception", error=str(e))
        return EXIT_FAILURE
    finally:
        structlog.contextvars.clear_contextvars()
