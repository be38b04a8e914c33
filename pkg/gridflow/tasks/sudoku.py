"""Sudoku puzzles with a unique completion, carved from a random full grid."""

import structlog

from gridflow.core.exceptions import GenerationStuck, InvalidLevel
from gridflow.core.rng import split_rng
from gridflow.oracle.sudoku import count_solutions, random_full_grid
from gridflow.schemas import SudokuGrid, SudokuPayload, TaskKind
from gridflow.tasks.base import Generated, TaskGenerator

logger = structlog.get_logger(__name__)

MIN_CLUES, MAX_CLUES = 17, 80
MAX_RESTARTS = 50


class SudokuGenerator(TaskGenerator):
    kind = TaskKind.SUDOKU

    def generate(self, seed: int, level: int) -> Generated:
        clues = int(level)
        if not MIN_CLUES <= clues <= MAX_CLUES:
            raise InvalidLevel(self.kind.value, level)

        rng = split_rng(seed, "sudoku")
        for restart in range(MAX_RESTARTS):
            full = random_full_grid(rng)
            puzzle = list(full)
            remaining = 81
            for index in rng.permutation(81):
                if remaining == clues:
                    break
                digit = puzzle[index]
                puzzle[index] = 0
                if count_solutions(puzzle, cap=2) == 1:
                    remaining -= 1
                else:
                    puzzle[index] = digit
            if remaining == clues:
                payload = SudokuPayload(puzzle=puzzle)
                return self.make_instance(seed, clues, payload), SudokuGrid(digits=full)
            logger.debug("generation_resampled", kind=self.kind.value, seed=seed, restart=restart, stuck_at=remaining)

        raise GenerationStuck(self.kind.value, seed, MAX_RESTARTS)


def gen_sudoku(seed: int, clues: int) -> Generated:
    return SudokuGenerator().generate(seed, clues)
