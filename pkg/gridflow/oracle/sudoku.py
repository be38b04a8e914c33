"""Bitmask backtracking Sudoku solver, solution counter and full-grid sampler."""

from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from gridflow.core.exceptions import OracleInputError, Unsatisfiable
from gridflow.schemas import SudokuGrid

ALL_DIGITS = 0x3FE  # bits 1..9
BOX = [(i // 27) * 3 + (i % 9) // 3 for i in range(81)]


def _masks(puzzle: Sequence[int]) -> Optional[Tuple[List[int], List[int], List[int]]]:
    rows, cols, boxes = [0] * 9, [0] * 9, [0] * 9
    for i, d in enumerate(puzzle):
        if not d:
            continue
        r, c, b = i // 9, i % 9, BOX[i]
        bit = 1 << d
        if (rows[r] | cols[c] | boxes[b]) & bit:
            return None
        rows[r] |= bit
        cols[c] |= bit
        boxes[b] |= bit
    return rows, cols, boxes


def _search(grid, rows, cols, boxes, rng) -> Iterator[List[int]]:
    # most-constrained cell first, lowest index on ties
    best, best_mask, best_count = -1, 0, 10
    for i in range(81):
        if grid[i]:
            continue
        mask = ALL_DIGITS & ~(rows[i // 9] | cols[i % 9] | boxes[BOX[i]])
        count = bin(mask).count("1")
        if count < best_count:
            best, best_mask, best_count = i, mask, count
            if count <= 1:
                break
    if best < 0:
        yield list(grid)
        return
    if best_count == 0:
        return

    r, c, b = best // 9, best % 9, BOX[best]
    digits = range(1, 10) if rng is None else (int(x) + 1 for x in rng.permutation(9))
    for d in digits:
        bit = 1 << d
        if not best_mask & bit:
            continue
        grid[best] = d
        rows[r] |= bit
        cols[c] |= bit
        boxes[b] |= bit
        yield from _search(grid, rows, cols, boxes, rng)
        grid[best] = 0
        rows[r] ^= bit
        cols[c] ^= bit
        boxes[b] ^= bit


def _check_shape(puzzle: Sequence[int]) -> List[int]:
    grid = [int(d) for d in puzzle]
    if len(grid) != 81 or any(d < 0 or d > 9 for d in grid):
        raise OracleInputError("A Sudoku puzzle is 81 digits in 0..9")
    return grid


def solve_sudoku(puzzle: Sequence[int]) -> SudokuGrid:
    grid = _check_shape(puzzle)
    masks = _masks(grid)
    if masks is None:
        raise Unsatisfiable("Givens conflict in a row, column or box")
    for solution in _search(grid, *masks, rng=None):
        return SudokuGrid(digits=solution)
    raise Unsatisfiable()


def count_solutions(puzzle: Sequence[int], cap: int = 2) -> int:
    if cap < 1:
        raise OracleInputError("cap must be positive")
    grid = _check_shape(puzzle)
    masks = _masks(grid)
    if masks is None:
        return 0
    count = 0
    for _ in _search(grid, *masks, rng=None):
        count += 1
        if count >= cap:
            break
    return count


def random_full_grid(rng: np.random.Generator) -> List[int]:
    grid = [0] * 81
    return next(_search(grid, [0] * 9, [0] * 9, [0] * 9, rng=rng))


def is_valid_solution(digits: Sequence[int]) -> bool:
    if len(digits) != 81 or any(d < 1 or d > 9 for d in digits):
        return False
    return _masks(digits) is not None
