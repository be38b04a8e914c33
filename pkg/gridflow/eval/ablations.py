"""Sweeps over inference steps, guidance scale and training-set size."""

import time
from pathlib import Path
from typing import List, Sequence, Union

import structlog

from gridflow.core.levels import TEST_SEED_BASE, Level
from gridflow.core.manifest import read_manifest
from gridflow.eval.harness import evaluate, load_inputs
from gridflow.flow.checkpoint import DenoiserCheckpoint
from gridflow.flow.trainer import train
from gridflow.render.png import write_png
from gridflow.render.spec import DEFAULT_SPEC, RenderSpec
from gridflow.sampler.samplers import FlowSampler
from gridflow.sampler.trajectory import montage
from gridflow.schemas import GenConfig, SampleConfig, TaskKind, TrainConfig
from gridflow.tasks.dataset import gen_dataset

logger = structlog.get_logger(__name__)

STEPS_COLUMNS = ["steps", "cfg_scale", "accuracy", "mean_reward", "parse_error_rate", "wall_ms", "denoiser_evals"]
CFG_COLUMNS = ["cfg_scale", "steps", "accuracy", "mean_reward", "parse_error_rate", "montage"]
SCALE_COLUMNS = ["train_size", "accuracy", "mean_reward", "parse_error_rate", "final_step"]


def _overall(report) -> dict:
    n = sum(row.n_samples for row in report.rows)
    return {
        "accuracy": sum(row.accuracy * row.n_samples for row in report.rows) / n,
        "mean_reward": sum(row.mean_reward * row.n_samples for row in report.rows) / n,
        "parse_error_rate": sum(row.parse_error_rate * row.n_samples for row in report.rows) / n,
        "wall_ms": sum(row.mean_wall_ms * row.n_samples for row in report.rows) / n,
        "n": n,
    }


def ablate_steps(
    sampler: FlowSampler,
    manifest: Union[str, Path],
    steps_list: Sequence[int],
    config: SampleConfig,
    spec: RenderSpec = DEFAULT_SPEC,
) -> List[dict]:
    """One evaluation per step count; reports wall time and denoiser calls per sample."""
    rows = []
    for steps in steps_list:
        run = sampler.with_config(steps=steps)
        report = evaluate(run, manifest, run.config, spec, run.checkpoint.checkpoint_id)
        summary = _overall(report)
        rows.append({
            "steps": steps,
            "cfg_scale": run.config.cfg_scale,
            "accuracy": summary["accuracy"],
            "mean_reward": summary["mean_reward"],
            "parse_error_rate": summary["parse_error_rate"],
            "wall_ms": summary["wall_ms"],
            "denoiser_evals": run.evaluations / summary["n"],
        })
        logger.info("steps_ablated", steps=steps, accuracy=summary["accuracy"])
    return rows


def ablate_cfg(
    sampler: FlowSampler,
    manifest: Union[str, Path],
    cfg_list: Sequence[float],
    config: SampleConfig,
    out_dir: Union[str, Path],
    montage_instances: int = 4,
    spec: RenderSpec = DEFAULT_SPEC,
) -> List[dict]:
    """
    One evaluation per guidance scale, plus a montage per scale of the
    first-step x0 estimates for the first `montage_instances` records.
    """
    manifest = Path(manifest)
    out_dir = Path(out_dir)
    records = read_manifest(manifest)[:montage_instances]
    inputs = load_inputs(records, manifest)

    rows = []
    for w in cfg_list:
        run = sampler.with_config(cfg_scale=w)
        report = evaluate(run, manifest, run.config, spec, run.checkpoint.checkpoint_id)
        summary = _overall(report)

        tracer = run.with_config(record_trajectory=True)
        frames = []
        for record, input_image in zip(records, inputs):
            _, trajectory = tracer.sample(record.to_instance(), input_image, run.config.seed)
            frames.append(trajectory.frames[0][1])
        path = out_dir / f"cfg_w{w:g}.png"
        write_png(montage(frames), path)

        rows.append({
            "cfg_scale": w,
            "steps": run.config.steps,
            "accuracy": summary["accuracy"],
            "mean_reward": summary["mean_reward"],
            "parse_error_rate": summary["parse_error_rate"],
            "montage": path.name,
        })
        logger.info("cfg_ablated", cfg_scale=w, accuracy=summary["accuracy"])
    return rows


def data_scale_sweep(
    kind: TaskKind,
    level: Level,
    sizes: Sequence[int],
    train_config: TrainConfig,
    sample_config: SampleConfig,
    out_dir: Union[str, Path],
    test_count: int = 100,
    spec: RenderSpec = DEFAULT_SPEC,
    jobs: int = 1,
) -> List[dict]:
    """
    Train one model per training-set size under the same step budget and
    evaluate each on a shared held-out set drawn from the test seed range.
    """
    out_dir = Path(out_dir)
    if train_config.steps is None:
        train_config = train_config.model_copy(update={"steps": train_config.total_steps(min(sizes))})
    test_dir = out_dir / "test"
    gen_dataset(GenConfig(kind=kind, level=level, count=test_count, base_seed=TEST_SEED_BASE), test_dir, spec, jobs)

    rows = []
    for size in sizes:
        started = time.perf_counter()
        train_dir = out_dir / f"train_{size}"
        gen_dataset(GenConfig(kind=kind, level=level, count=size, base_seed=0), train_dir, spec, jobs)
        checkpoint: DenoiserCheckpoint = train(train_config, train_dir, out_dir / f"model_{size}", spec)
        sampler = FlowSampler(checkpoint, sample_config)
        report = evaluate(sampler, test_dir, sample_config, spec, checkpoint.checkpoint_id)
        summary = _overall(report)
        rows.append({
            "train_size": size,
            "accuracy": summary["accuracy"],
            "mean_reward": summary["mean_reward"],
            "parse_error_rate": summary["parse_error_rate"],
            "final_step": checkpoint.step,
        })
        logger.info("scale_point_done", train_size=size, accuracy=summary["accuracy"],
                    seconds=round(time.perf_counter() - started, 1))
    return rows
