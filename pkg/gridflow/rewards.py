"""
Partial-credit rewards, reported next to binary accuracy.

Each function returns a value in [0, 1]; 1 means the candidate matches the
ground truth under the task's criterion.
"""

from typing import Sequence, Tuple

from gridflow.core.exceptions import OracleInputError
from gridflow.oracle.tsp import tour_length

TSP_LENGTH_TOLERANCE = 1e-4


def r_plan(predicted: Sequence, ground_truth: Sequence) -> float:
    """Longest agreeing prefix of the action sequence, over the ground-truth length."""
    n = len(ground_truth)
    if n == 0:
        raise OracleInputError("Ground-truth plan must be nonempty")
    k = 0
    for p, g in zip(predicted, ground_truth):
        if p != g:
            break
        k += 1
    return k / n


def r_tsp(
    predicted: Sequence[int],
    ground_truth: Sequence[int],
    cities: Sequence[Tuple[float, float]],
) -> float:
    n = len(cities)
    for index in list(predicted) + list(ground_truth):
        if not 0 <= index < n:
            raise OracleInputError(f"City index {index} out of range for {n} cities")

    visited = {tuple(cities[i]) for i in predicted}
    expected = {tuple(cities[i]) for i in ground_truth}
    if visited != expected:
        return 0.0
    same_length = abs(tour_length(cities, predicted) - tour_length(cities, ground_truth)) < TSP_LENGTH_TOLERANCE
    return 0.5 * (1 + int(same_length))


def r_sudoku(predicted: Sequence[int], ground_truth: Sequence[int]) -> float:
    if len(predicted) != 81:
        return 0.0
    return sum(1 for p, g in zip(predicted, ground_truth) if p == g) / 81


def r_jigsaw(predicted: Sequence[int], ground_truth: Sequence[int], n: int) -> float:
    if n < 2:
        raise OracleInputError("A jigsaw has at least two patches")
    if len(predicted) != n:
        return 0.0
    return sum(1 for p, g in zip(predicted, ground_truth) if p == g) / n
