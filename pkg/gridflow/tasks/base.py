"""Shared plumbing for the per-task instance generators."""

from typing import Tuple

from gridflow.core.levels import Level, format_level
from gridflow.schemas import TaskInstance, TaskKind

# Rejection-sampling cap per instance before GenerationStuck.
MAX_ATTEMPTS = 10_000

Generated = Tuple[TaskInstance, object]


def instance_id(kind: TaskKind, level: Level, seed: int) -> str:
    return f"{TaskKind(kind).value}-{format_level(level)}-{seed}"


class TaskGenerator:
    """Base class for instance generators.

    Subclasses set `kind` and implement `generate`, which must be a pure
    function of (seed, level): same inputs, same instance and solution.
    """

    kind: TaskKind

    def generate(self, seed: int, level: Level) -> Generated:
        """
        Build one instance and its oracle solution.

        Args:
            seed: 64-bit instance seed
            level: difficulty level for this task kind

        Returns:
            (TaskInstance, SymbolicSolution)
        """
        raise NotImplementedError

    def make_instance(self, seed: int, level: Level, payload) -> TaskInstance:
        return TaskInstance(
            id=instance_id(self.kind, level, seed),
            kind=self.kind,
            level=level,
            seed=seed,
            payload=payload,
        )
