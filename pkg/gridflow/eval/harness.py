"""
End-to-end evaluation: sample -> parse -> verify, aggregated per level.

A parse failure, a low-confidence jigsaw reading or a diverged sample
counts as an incorrect answer with reward 0; only the first two count
toward parse_error_rate.
"""

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import structlog

from gridflow.core.exceptions import ParseError, SampleDiverged
from gridflow.core.levels import format_level
from gridflow.core.manifest import read_manifest, resolve_image
from gridflow.core.raster import RasterImage
from gridflow.oracle.verify import verify
from gridflow.parse import parse
from gridflow.render.png import read_png
from gridflow.render.spec import DEFAULT_SPEC, RenderSpec
from gridflow.schemas import EvalReport, EvalRow, ManifestRecord, Permutation, SampleConfig, TaskKind, Verdict

logger = structlog.get_logger(__name__)

REPORT_COLUMNS = ["kind", "level", "n", "accuracy", "mean_reward", "parse_error_rate", "wall_ms"]


@dataclass
class Outcome:
    verdict: Verdict
    parse_error: bool
    wall_ms: float
    solution: object = None
    image: Optional[RasterImage] = None


def attempt(
    sampler,
    record: ManifestRecord,
    input_image: RasterImage,
    seed: int,
    strict: bool = False,
    spec: RenderSpec = DEFAULT_SPEC,
) -> Outcome:
    """One sample of one instance, judged against the record's ground truth."""
    instance = record.to_instance()
    started = time.perf_counter()
    try:
        image, _ = sampler.sample(instance, input_image, seed)
    except SampleDiverged as e:
        wall_ms = (time.perf_counter() - started) * 1000.0
        return Outcome(Verdict(correct=False, partial_reward=0.0, reason=e.detail), False, wall_ms)
    wall_ms = (time.perf_counter() - started) * 1000.0

    try:
        solution = parse(image, instance, spec)
    except ParseError as e:
        verdict = Verdict(correct=False, partial_reward=0.0, reason=f"{type(e).__name__}: {e.detail}")
        return Outcome(verdict, True, wall_ms, image=image)
    if isinstance(solution, Permutation) and solution.low_confidence:
        verdict = Verdict(correct=False, partial_reward=0.0, reason="jigsaw reading below confidence threshold")
        return Outcome(verdict, True, wall_ms, solution, image)
    verdict = verify(instance, solution, record.solution, strict=strict)
    return Outcome(verdict, False, wall_ms, solution, image)


def load_inputs(records: Sequence[ManifestRecord], manifest: Path) -> List[RasterImage]:
    return [read_png(resolve_image(manifest, record.input_png_path)) for record in records]


def group_by_level(records: Sequence[ManifestRecord]) -> Dict[Tuple[TaskKind, str], List[int]]:
    """Record indices per (kind, level token), groups in order of first appearance."""
    groups: Dict[Tuple[TaskKind, str], List[int]] = {}
    for index, record in enumerate(records):
        groups.setdefault((record.kind, format_level(record.level)), []).append(index)
    return groups


def summarize(records: Sequence[ManifestRecord], outcomes: Sequence[Outcome]) -> List[EvalRow]:
    rows = []
    for indices in group_by_level(records).values():
        n = len(indices)
        picked = [outcomes[i] for i in indices]
        first = records[indices[0]]
        rows.append(
            EvalRow(
                kind=first.kind,
                level=first.level,
                n_samples=n,
                accuracy=sum(o.verdict.correct for o in picked) / n,
                mean_reward=sum(o.verdict.partial_reward for o in picked) / n,
                parse_error_rate=sum(o.parse_error for o in picked) / n,
                mean_wall_ms=sum(o.wall_ms for o in picked) / n,
            )
        )
    return rows


def evaluate(
    sampler,
    manifest: Union[str, Path],
    config: SampleConfig,
    spec: RenderSpec = DEFAULT_SPEC,
    checkpoint_id: str = "",
) -> EvalReport:
    manifest = Path(manifest)
    records = read_manifest(manifest)
    inputs = load_inputs(records, manifest)

    outcomes = []
    for record, input_image in zip(records, inputs):
        outcome = attempt(sampler, record, input_image, config.seed, config.strict, spec)
        logger.debug(
            "sample_evaluated",
            id=record.id,
            correct=outcome.verdict.correct,
            reward=outcome.verdict.partial_reward,
            reason=outcome.verdict.reason,
        )
        outcomes.append(outcome)

    report = EvalReport(
        rows=summarize(records, outcomes),
        steps=config.steps,
        cfg_scale=config.cfg_scale,
        checkpoint_id=checkpoint_id or "none",
        seed=config.seed,
        sampler=sampler.name,
    )
    for row in report.rows:
        logger.info(
            "evaluation_finished",
            kind=row.kind.value,
            task_level=format_level(row.level),
            n=row.n_samples,
            accuracy=round(row.accuracy, 4),
            mean_reward=round(row.mean_reward, 4),
        )
    return report


def report_rows(report: EvalReport) -> List[dict]:
    return [
        {
            "kind": row.kind.value,
            "level": format_level(row.level),
            "n": row.n_samples,
            "accuracy": row.accuracy,
            "mean_reward": row.mean_reward,
            "parse_error_rate": row.parse_error_rate,
            "wall_ms": row.mean_wall_ms,
        }
        for row in report.rows
    ]
