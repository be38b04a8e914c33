"""Random-walk reference for the navigation tasks."""

from typing import List, Sequence

from gridflow.core.levels import format_level
from gridflow.core.rng import split_rng
from gridflow.eval.harness import group_by_level
from gridflow.oracle.paths import MOVE_ORDER
from gridflow.oracle.verify import verify
from gridflow.schemas import MOVE_DELTAS, MOVE_WALLS, ActionSequence, ManifestRecord, TaskKind

BASELINE_COLUMNS = ["kind", "level", "n", "walks", "accuracy"]


def random_walk(payload, length: int, rng) -> List:
    """Uniform walk from the start: stays on the grid, never steps straight back, never crosses a wall."""
    size = payload.size
    walls = getattr(payload, "walls", None)
    cell = tuple(payload.start)
    previous = None
    moves = []
    for _ in range(length):
        options = []
        for move in MOVE_ORDER:
            dr, dc = MOVE_DELTAS[move]
            nxt = (cell[0] + dr, cell[1] + dc)
            if not (0 <= nxt[0] < size and 0 <= nxt[1] < size) or nxt == previous:
                continue
            if walls is not None and walls[cell[0]][cell[1]] & MOVE_WALLS[move]:
                continue
            options.append((move, nxt))
        if not options:
            break
        move, nxt = options[int(rng.integers(len(options)))]
        moves.append(move)
        previous, cell = cell, nxt
    return moves


def random_walk_baseline(records: Sequence[ManifestRecord], walks: int, seed: int) -> List[dict]:
    """Fraction of random walks (ground-truth length) that verify as correct, per level."""
    if walks < 1:
        raise ValueError("walks must be >= 1")
    hits = []
    for record in records:
        if record.kind not in (TaskKind.VSP, TaskKind.MAZE):
            raise ValueError(f"Random walks only apply to navigation tasks, got {record.kind.value}")
        instance = record.to_instance()
        rng = split_rng(seed, f"random-walk-{record.id}")
        length = len(record.solution.moves)
        correct = 0
        for _ in range(walks):
            moves = random_walk(record.payload, length, rng)
            correct += verify(instance, ActionSequence(moves=moves), record.solution).correct
        hits.append(correct / walks)

    rows = []
    for indices in group_by_level(records).values():
        first = records[indices[0]]
        rows.append({
            "kind": first.kind.value,
            "level": format_level(first.level),
            "n": len(indices),
            "walks": walks,
            "accuracy": sum(hits[i] for i in indices) / len(indices),
        })
    return rows
