"""
Generate-then-verify: draw several candidates and keep the first one the
exact verifier accepts.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Union

import structlog

from gridflow.core.levels import format_level
from gridflow.core.manifest import read_manifest
from gridflow.core.raster import RasterImage
from gridflow.eval.harness import Outcome, attempt, group_by_level, load_inputs
from gridflow.render.spec import DEFAULT_SPEC, RenderSpec
from gridflow.schemas import ManifestRecord, SampleConfig, Verdict

logger = structlog.get_logger(__name__)

BEST_OF_N_COLUMNS = ["kind", "level", "n_candidates", "n", "accuracy", "mean_reward", "mean_candidates_used"]


@dataclass
class BestOfN:
    solution: Optional[object]
    verdict: Verdict
    candidates_used: int

    @property
    def success(self) -> bool:
        return self.verdict.correct


def best_of_n(
    sampler,
    record: ManifestRecord,
    input_image: RasterImage,
    n: int,
    seed: int,
    strict: bool = False,
    spec: RenderSpec = DEFAULT_SPEC,
) -> BestOfN:
    """
    Sample with seeds seed..seed+n-1, stopping at the first correct candidate.

    Without a correct candidate the highest-reward one is returned (earliest
    on ties) and flagged as a failure by its verdict.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    best: Optional[Outcome] = None
    for k in range(n):
        outcome = attempt(sampler, record, input_image, seed + k, strict, spec)
        if outcome.verdict.correct:
            return BestOfN(outcome.solution, outcome.verdict, k + 1)
        if best is None or outcome.verdict.partial_reward > best.verdict.partial_reward:
            best = outcome
    return BestOfN(best.solution, best.verdict, n)


def best_of_n_table(
    sampler,
    manifest: Union[str, Path],
    n_list: Sequence[int],
    config: SampleConfig,
    spec: RenderSpec = DEFAULT_SPEC,
) -> List[dict]:
    """
    Accuracy per level for every N in n_list.

    Candidates are shared across N: the run at N is the length-N prefix of
    the run at max(n_list), so accuracy is monotone in N.
    """
    manifest = Path(manifest)
    records = read_manifest(manifest)
    inputs = load_inputs(records, manifest)
    largest = max(n_list)

    # Per instance: index of the first correct candidate (or None) and running best rewards.
    first_correct: List[Optional[int]] = []
    running_best: List[List[float]] = []
    for record, input_image in zip(records, inputs):
        rewards = []
        hit = None
        for k in range(largest):
            outcome = attempt(sampler, record, input_image, config.seed + k, config.strict, spec)
            rewards.append(max(rewards[-1] if rewards else 0.0, outcome.verdict.partial_reward))
            if outcome.verdict.correct:
                hit = k
                break
        first_correct.append(hit)
        running_best.append(rewards)

    rows = []
    for n in sorted(n_list):
        for indices in group_by_level(records).values():
            count = len(indices)
            solved = [first_correct[i] is not None and first_correct[i] < n for i in indices]
            rewards = [1.0 if ok else running_best[i][min(n, len(running_best[i])) - 1] for i, ok in zip(indices, solved)]
            used = [first_correct[i] + 1 if ok else n for i, ok in zip(indices, solved)]
            first = records[indices[0]]
            rows.append({
                "kind": first.kind.value,
                "level": format_level(first.level),
                "n_candidates": n,
                "n": count,
                "accuracy": sum(solved) / count,
                "mean_reward": sum(rewards) / count,
                "mean_candidates_used": sum(used) / count,
            })
        logger.info("best_of_n_evaluated", n_candidates=n)
    return rows
