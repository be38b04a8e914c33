from gridflow.core.exceptions import KindMismatch
from gridflow.oracle.paths import bfs_shortest_path, walk
from gridflow.oracle.sudoku import is_valid_solution, solve_sudoku
from gridflow.oracle.tsp import held_karp, tour_length
from gridflow.rewards import TSP_LENGTH_TOLERANCE, r_jigsaw, r_plan, r_sudoku, r_tsp
from gridflow.schemas import (
    SOLUTION_TYPES,
    ActionSequence,
    Permutation,
    SudokuGrid,
    TaskInstance,
    TaskKind,
    Tour,
    Verdict,
)


def ground_truth(instance: TaskInstance):
    """Oracle solution for an instance, recomputed from its payload."""
    payload = instance.payload
    if instance.kind in (TaskKind.VSP, TaskKind.MAZE):
        return bfs_shortest_path(payload)
    if instance.kind == TaskKind.TSP:
        return held_karp(payload.cities, payload.start)
    if instance.kind == TaskKind.SUDOKU:
        return solve_sudoku(payload.puzzle)
    inverse = [0] * len(payload.shuffle)
    for slot, patch in enumerate(payload.shuffle):
        inverse[patch] = slot
    return Permutation(mapping=inverse)


def _verdict(correct: bool, reward: float, reason: str) -> Verdict:
    if correct:
        return Verdict(correct=True, partial_reward=1.0, reason=reason or "ok")
    return Verdict(correct=False, partial_reward=min(max(reward, 0.0), 1.0), reason=reason)


def _verify_path(instance: TaskInstance, candidate: ActionSequence, reference: ActionSequence, strict: bool) -> Verdict:
    payload = instance.payload
    reward = r_plan(candidate.moves, reference.moves)
    cells, violation = walk(payload, candidate.moves)
    if violation:
        return _verdict(False, reward, violation)
    if cells[-1] != tuple(payload.goal):
        return _verdict(False, reward, f"path ends at {cells[-1]}, goal is {tuple(payload.goal)}")
    if strict and len(candidate.moves) != len(reference.moves):
        return _verdict(False, reward, f"path length {len(candidate.moves)} exceeds shortest {len(reference.moves)}")
    return _verdict(True, 1.0, "")


def _verify_tour(instance: TaskInstance, candidate: Tour, reference: Tour) -> Verdict:
    payload = instance.payload
    n = len(payload.cities)
    order = candidate.order
    if any(not 0 <= i < n for i in order):
        return _verdict(False, 0.0, "city index out of range")
    reward = r_tsp(order, reference.order, payload.cities)
    if sorted(order) != list(range(n)):
        return _verdict(False, reward, "tour is not a permutation of the cities")
    if order[0] != payload.start:
        return _verdict(False, reward, f"tour starts at {order[0]}, start is {payload.start}")
    gap = abs(tour_length(payload.cities, order) - tour_length(payload.cities, reference.order))
    if gap >= TSP_LENGTH_TOLERANCE:
        return _verdict(False, reward, f"tour is {gap:.6f} longer than optimal")
    return _verdict(True, 1.0, "")


def _verify_sudoku(instance: TaskInstance, candidate: SudokuGrid, reference: SudokuGrid) -> Verdict:
    reward = r_sudoku(candidate.digits, reference.digits)
    for cell, (given, digit) in enumerate(zip(instance.payload.puzzle, candidate.digits)):
        if given and given != digit:
            return _verdict(False, reward, f"given at cell {cell} changed")
    if not is_valid_solution(candidate.digits):
        return _verdict(False, reward, "row, column or box constraint violated")
    return _verdict(True, 1.0, "")


def _verify_jigsaw(instance: TaskInstance, candidate: Permutation, reference: Permutation) -> Verdict:
    n = len(reference.mapping)
    reward = r_jigsaw(candidate.mapping, reference.mapping, n)
    if list(candidate.mapping) != list(reference.mapping):
        wrong = sum(1 for p, g in zip(candidate.mapping, reference.mapping) if p != g)
        return _verdict(False, reward, f"{wrong} of {n} patches misplaced")
    return _verdict(True, 1.0, "")


def verify(instance: TaskInstance, candidate, reference=None, strict: bool = False) -> Verdict:
    """
    Compare a candidate solution with the oracle in symbolic space.

    Args:
        instance: The task instance
        candidate: Parsed or predicted solution
        reference: Ground truth; recomputed by the oracle when omitted
        strict: Require frozen-lake paths to be shortest

    Returns:
        Verdict with correctness, partial reward and a short reason
    """
    expected_type = SOLUTION_TYPES[instance.kind]
    if not isinstance(candidate, expected_type):
        raise KindMismatch(expected_type.__name__, type(candidate).__name__)
    if reference is None:
        reference = ground_truth(instance)
    elif not isinstance(reference, expected_type):
        raise KindMismatch(expected_type.__name__, type(reference).__name__)

    if instance.kind in (TaskKind.VSP, TaskKind.MAZE):
        return _verify_path(instance, candidate, reference, strict and instance.kind == TaskKind.VSP)
    if instance.kind == TaskKind.TSP:
        return _verify_tour(instance, candidate, reference)
    if instance.kind == TaskKind.SUDOKU:
        return _verify_sudoku(instance, candidate, reference)
    return _verify_jigsaw(instance, candidate, reference)
