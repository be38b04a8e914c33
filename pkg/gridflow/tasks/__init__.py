"""Seeded instance generators, one per task kind."""

from typing import Dict, Type

from gridflow.core.levels import Level
from gridflow.schemas import TaskKind
from gridflow.tasks.base import Generated, TaskGenerator, instance_id
from gridflow.tasks.jigsaw import JigsawGenerator, gen_jigsaw
from gridflow.tasks.maze import MazeGenerator, gen_maze
from gridflow.tasks.sudoku import SudokuGenerator, gen_sudoku
from gridflow.tasks.tsp import TspGenerator, gen_tsp
from gridflow.tasks.vsp import VspGenerator, gen_vsp

GENERATORS: Dict[TaskKind, Type[TaskGenerator]] = {
    TaskKind.VSP: VspGenerator,
    TaskKind.MAZE: MazeGenerator,
    TaskKind.TSP: TspGenerator,
    TaskKind.SUDOKU: SudokuGenerator,
    TaskKind.JIGSAW: JigsawGenerator,
}


def generate(kind: TaskKind, level: Level, seed: int) -> Generated:
    return GENERATORS[TaskKind(kind)]().generate(seed, level)


__all__ = [
    "GENERATORS",
    "TaskGenerator",
    "generate",
    "instance_id",
    "gen_vsp",
    "gen_maze",
    "gen_tsp",
    "gen_sudoku",
    "gen_jigsaw",
]
