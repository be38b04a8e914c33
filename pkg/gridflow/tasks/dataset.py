"""
Dataset generation: instances, their input/target PNGs and a manifest.

Layout under the output directory:
    manifest.jsonl
    inputs/<id>.png
    targets/<id>.png
"""

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import structlog

from gridflow.core.exceptions import GenerationStuck
from gridflow.core.levels import (
    PUBLISHED_TEST_LEVELS,
    PUBLISHED_TRAIN_COUNTS,
    TEST_SAMPLES_PER_LEVEL,
    TEST_SEED_BASE,
    Level,
    format_level,
)
from gridflow.core.manifest import MANIFEST_NAME, write_manifest
from gridflow.core.rng import derive_seed
from gridflow.render.png import encode_png
from gridflow.render.renderer import render_instance, render_solution
from gridflow.render.spec import DEFAULT_SPEC, RenderSpec
from gridflow.schemas import GenConfig, ManifestRecord, TaskKind
from gridflow.tasks import generate

logger = structlog.get_logger(__name__)

INPUTS_DIR = "inputs"
TARGETS_DIR = "targets"
MAX_DEDUP_ATTEMPTS = 100


def payload_digest(payload) -> str:
    blob = json.dumps(payload.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _alternate_seed(seed: int, attempt: int) -> int:
    """Replacement seed for a duplicate, kept in the same (train or test) seed range."""
    band = TEST_SEED_BASE if seed >= TEST_SEED_BASE else 0
    return band + derive_seed(seed, f"dedup-{attempt}") % TEST_SEED_BASE


def _build(args: Tuple[TaskKind, Level, int, RenderSpec]):
    """Generate and render one instance. Runs in worker processes."""
    kind, level, seed, spec = args
    instance, solution = generate(kind, level, seed)
    input_png = encode_png(render_instance(instance, spec))
    target_png = encode_png(render_solution(instance, solution, spec))
    return instance, solution, input_png, target_png, payload_digest(instance.payload)


def generate_records(
    config: GenConfig,
    out_dir: Path,
    spec: RenderSpec = DEFAULT_SPEC,
    jobs: int = 1,
    seen: Optional[Dict[str, str]] = None,
) -> List[ManifestRecord]:
    """
    Generate `config.count` instances from consecutive seeds and write their PNGs.

    Instances whose payload duplicates an earlier one are replaced by
    instances from deterministically derived alternate seeds.

    Args:
        config: kind, level, count and base seed
        out_dir: dataset directory; images go to inputs/ and targets/
        spec: render parameters
        jobs: worker processes; 1 generates inline
        seen: payload digest -> id, shared across calls to dedupe a whole suite

    Returns:
        Manifest records in seed order
    """
    out_dir = Path(out_dir)
    (out_dir / INPUTS_DIR).mkdir(parents=True, exist_ok=True)
    (out_dir / TARGETS_DIR).mkdir(parents=True, exist_ok=True)
    seen = {} if seen is None else seen

    seeds = [config.base_seed + i for i in range(config.count)]
    tasks = [(config.kind, config.level, seed, spec) for seed in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            built = list(pool.map(_build, tasks, chunksize=max(1, len(tasks) // (jobs * 4))))
    else:
        built = [_build(task) for task in tasks]

    records = []
    duplicates = 0
    for seed, result in zip(seeds, built):
        attempt = 0
        while result[4] in seen:
            attempt += 1
            duplicates += 1
            if attempt > MAX_DEDUP_ATTEMPTS:
                raise GenerationStuck(TaskKind(config.kind).value, seed, MAX_DEDUP_ATTEMPTS)
            alt_seed = _alternate_seed(seed, attempt)
            result = _build((config.kind, config.level, alt_seed, spec))

        instance, solution, input_png, target_png, digest = result
        seen[digest] = instance.id
        input_rel = f"{INPUTS_DIR}/{instance.id}.png"
        target_rel = f"{TARGETS_DIR}/{instance.id}.png"
        (out_dir / input_rel).write_bytes(input_png)
        (out_dir / target_rel).write_bytes(target_png)
        records.append(
            ManifestRecord(
                id=instance.id,
                kind=instance.kind,
                level=instance.level,
                seed=instance.seed,
                input_png_path=input_rel,
                target_png_path=target_rel,
                solution=solution,
                payload=instance.payload,
            )
        )

    logger.info(
        "instances_generated",
        kind=TaskKind(config.kind).value,
        task_level=format_level(config.level),
        count=len(records),
        duplicates_replaced=duplicates,
        out=str(out_dir),
    )
    return records


def gen_dataset(
    config: GenConfig,
    out_dir: Path,
    spec: RenderSpec = DEFAULT_SPEC,
    jobs: int = 1,
) -> List[ManifestRecord]:
    out_dir = Path(out_dir)
    records = generate_records(config, out_dir, spec, jobs)
    write_manifest(records, out_dir / MANIFEST_NAME)
    return records


def gen_suite(
    kind: TaskKind,
    out_dir: Path,
    spec: RenderSpec = DEFAULT_SPEC,
    jobs: int = 1,
    base_seed: int = 0,
    scale: float = 1.0,
    test_count: int = TEST_SAMPLES_PER_LEVEL,
) -> Dict[str, List[ManifestRecord]]:
    """
    Build the published train/test split for one task.

    train/<H>x<W>/ holds the training levels that render at one image
    shape, sized by PUBLISHED_TRAIN_COUNTS times `scale`, so each training
    manifest feeds a single model. test/<level>/ holds `test_count`
    instances per test level from seeds at TEST_SEED_BASE and above, so
    test seeds never collide with training seeds. Payload dedupe spans
    both splits.
    """
    kind = TaskKind(kind)
    out_dir = Path(out_dir)
    seen: Dict[str, str] = {}
    splits: Dict[str, List[ManifestRecord]] = {}

    train: Dict[str, List[ManifestRecord]] = {}
    for level, count in PUBLISHED_TRAIN_COUNTS[kind.value].items():
        height, width = spec.image_shape(kind, level)
        name = f"train/{height}x{width}"
        config = GenConfig(kind=kind, level=level, count=max(1, int(round(count * scale))), base_seed=base_seed)
        train.setdefault(name, []).extend(generate_records(config, out_dir / name, spec, jobs, seen))
    for name, records in train.items():
        write_manifest(records, out_dir / name / MANIFEST_NAME)
        splits[name] = records

    for level in PUBLISHED_TEST_LEVELS[kind.value]:
        config = GenConfig(kind=kind, level=level, count=test_count, base_seed=TEST_SEED_BASE + base_seed)
        level_dir = out_dir / "test" / format_level(level)
        records = generate_records(config, level_dir, spec, jobs, seen)
        write_manifest(records, level_dir / MANIFEST_NAME)
        splits[f"test/{format_level(level)}"] = records

    logger.info("suite_generated", kind=kind.value, splits={k: len(v) for k, v in splits.items()})
    return splits
