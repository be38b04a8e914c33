"""Frozen-lake instances: a square grid with holes, a start and a goal."""

import math
from typing import Optional

import numpy as np
import structlog

from gridflow.core.exceptions import GenerationStuck, InvalidLevel, NoPath
from gridflow.core.rng import split_rng
from gridflow.oracle.paths import bfs_shortest_path
from gridflow.schemas import TaskKind, VspPayload
from gridflow.tasks.base import MAX_ATTEMPTS, Generated, TaskGenerator

logger = structlog.get_logger(__name__)

# Hole density is drawn per instance from this range.
HOLE_DENSITY_RANGE = (0.1, 0.35)
MIN_SIZE, MAX_SIZE = 2, 32


class VspGenerator(TaskGenerator):
    kind = TaskKind.VSP

    def __init__(self, hole_density: Optional[float] = None):
        self.hole_density = hole_density

    def hole_count(self, free: int, rng) -> int:
        """Fixed density when configured; otherwise uniform over the counts the range allows."""
        if self.hole_density is not None:
            return int(round(self.hole_density * free))
        lo, hi = HOLE_DENSITY_RANGE
        low = max(1, math.floor(lo * free))
        high = max(low, math.ceil(hi * free))
        return int(rng.integers(low, high + 1))

    def generate(self, seed: int, level: int) -> Generated:
        size = int(level)
        if not MIN_SIZE <= size <= MAX_SIZE:
            raise InvalidLevel(self.kind.value, level)

        rng = split_rng(seed, "vsp")
        cells = size * size
        quadrant = (size + 1) // 2

        for attempt in range(1, MAX_ATTEMPTS + 1):
            start = (int(rng.integers(quadrant)), int(rng.integers(quadrant)))
            start_index = start[0] * size + start[1]
            goal_index = int(rng.integers(cells - 1))
            if goal_index >= start_index:
                goal_index += 1
            goal = divmod(goal_index, size)

            free = np.array([i for i in range(cells) if i not in (start_index, goal_index)])
            n_holes = self.hole_count(len(free), rng)
            holes = np.zeros(cells, dtype=bool)
            holes[rng.choice(free, size=n_holes, replace=False)] = True

            payload = VspPayload(
                size=size,
                holes=holes.reshape(size, size).tolist(),
                start=start,
                goal=goal,
            )
            try:
                solution = bfs_shortest_path(payload)
            except NoPath:
                continue
            if attempt > 1:
                logger.debug("generation_resampled", kind=self.kind.value, seed=seed, attempts=attempt)
            return self.make_instance(seed, size, payload), solution

        raise GenerationStuck(self.kind.value, seed, MAX_ATTEMPTS)


def gen_vsp(seed: int, grid_size: int, hole_density: Optional[float] = None) -> Generated:
    return VspGenerator(hole_density).generate(seed, grid_size)
