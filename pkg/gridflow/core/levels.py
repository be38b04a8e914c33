"""Difficulty levels and dataset sizes per task, as published for the benchmark suite."""

from typing import Dict, List, Tuple, Union

Level = Union[int, Tuple[int, int]]

VSP_LEVELS: List[int] = [3, 4, 5, 6, 7, 8, 16, 32]
MAZE_LEVELS: List[int] = [8, 16, 32]
TSP_LEVELS: List[int] = [12, 13, 14, 15, 16, 17, 18]
SUDOKU_LEVELS: List[int] = [30, 35, 40, 45]
JIGSAW_LEVELS: List[Tuple[int, int]] = [(1, 2), (1, 3), (2, 1), (3, 1), (2, 2), (3, 3), (4, 4)]

PUBLISHED_LEVELS: Dict[str, List[Level]] = {
    "vsp": VSP_LEVELS,
    "maze": MAZE_LEVELS,
    "tsp": TSP_LEVELS,
    "sudoku": SUDOKU_LEVELS,
    "jigsaw": JIGSAW_LEVELS,
}

PUBLISHED_TRAIN_COUNTS: Dict[str, Dict[Level, int]] = {
    "vsp": {3: 500, 4: 1000, 5: 2500, 6: 6000, 16: 10000, 32: 10000},
    "maze": {8: 10000, 16: 10000, 32: 10000},
    "tsp": {12: 5000, 15: 5000},
    "sudoku": {30: 7500, 35: 7500, 40: 7500, 45: 7500},
    "jigsaw": {
        (1, 2): 4000, (1, 3): 4000, (2, 1): 4000, (3, 1): 4000,
        (2, 2): 4000, (3, 3): 5000, (4, 4): 5000,
    },
}

PUBLISHED_TEST_LEVELS: Dict[str, List[Level]] = {
    "vsp": VSP_LEVELS,
    "maze": MAZE_LEVELS,
    "tsp": [12, 15, 18],
    "sudoku": [35, 40, 45],
    "jigsaw": [(2, 2), (3, 3), (4, 4)],
}

TEST_SAMPLES_PER_LEVEL = 100

# Test seeds live at and above this offset; training seeds stay below it.
TEST_SEED_BASE = 1 << 40


def format_level(level: Level) -> str:
    if isinstance(level, (tuple, list)):
        return f"{level[0]}x{level[1]}"
    return str(level)


def parse_level(kind: str, text: str) -> Level:
    """Parse a CLI level token: '8' for most tasks, '2x2' for jigsaw."""
    text = text.strip().lower()
    if kind == "jigsaw":
        rows, sep, cols = text.partition("x")
        if not sep:
            raise ValueError(f"Jigsaw level must look like ROWSxCOLS, got {text!r}")
        return (int(rows), int(cols))
    return int(text)


def is_published_level(kind: str, level: Level) -> bool:
    if isinstance(level, list):
        level = tuple(level)
    return level in PUBLISHED_LEVELS.get(kind, [])
