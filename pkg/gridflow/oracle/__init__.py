from .paths import bfs_shortest_path
from .sudoku import count_solutions, solve_sudoku
from .tsp import held_karp, tour_length

__all__ = [
    "bfs_shortest_path",
    "held_karp",
    "tour_length",
    "solve_sudoku",
    "count_solutions",
]
