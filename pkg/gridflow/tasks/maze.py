"""Perfect mazes carved by randomized depth-first search."""

import structlog

from gridflow.core.exceptions import GenerationStuck, InvalidLevel
from gridflow.core.rng import split_rng
from gridflow.oracle.paths import bfs_shortest_path
from gridflow.schemas import ALL_WALLS, MOVE_DELTAS, MOVE_WALLS, MazePayload, Move, TaskKind
from gridflow.tasks.base import MAX_ATTEMPTS, Generated, TaskGenerator

logger = structlog.get_logger(__name__)

MIN_SIZE, MAX_SIZE = 2, 64
_OPPOSITE = {Move.U: Move.D, Move.D: Move.U, Move.L: Move.R, Move.R: Move.L}
_MOVES = (Move.U, Move.R, Move.D, Move.L)


def carve(size: int, rng) -> list:
    """Spanning tree over the cell lattice; returns per-cell wall bits."""
    walls = [[ALL_WALLS] * size for _ in range(size)]
    visited = [[False] * size for _ in range(size)]
    origin = (int(rng.integers(size)), int(rng.integers(size)))
    visited[origin[0]][origin[1]] = True
    stack = [origin]
    while stack:
        r, c = stack[-1]
        options = []
        for move in _MOVES:
            dr, dc = MOVE_DELTAS[move]
            nr, nc = r + dr, c + dc
            if 0 <= nr < size and 0 <= nc < size and not visited[nr][nc]:
                options.append((move, nr, nc))
        if not options:
            stack.pop()
            continue
        move, nr, nc = options[int(rng.integers(len(options)))]
        walls[r][c] &= ~MOVE_WALLS[move]
        walls[nr][nc] &= ~MOVE_WALLS[_OPPOSITE[move]]
        visited[nr][nc] = True
        stack.append((nr, nc))
    return walls


class MazeGenerator(TaskGenerator):
    kind = TaskKind.MAZE

    def generate(self, seed: int, level: int) -> Generated:
        size = int(level)
        if not MIN_SIZE <= size <= MAX_SIZE:
            raise InvalidLevel(self.kind.value, level)

        rng = split_rng(seed, "maze")
        walls = carve(size, rng)

        # Start and goal at least `size` apart in Manhattan distance.
        for _ in range(MAX_ATTEMPTS):
            start = (int(rng.integers(size)), int(rng.integers(size)))
            goal = (int(rng.integers(size)), int(rng.integers(size)))
            if abs(start[0] - goal[0]) + abs(start[1] - goal[1]) >= size:
                break
        else:
            raise GenerationStuck(self.kind.value, seed, MAX_ATTEMPTS)

        payload = MazePayload(size=size, walls=walls, start=start, goal=goal)
        solution = bfs_shortest_path(payload)
        logger.debug("maze_generated", seed=seed, size=size, path_length=len(solution.moves))
        return self.make_instance(seed, size, payload), solution


def gen_maze(seed: int, grid_size: int) -> Generated:
    return MazeGenerator().generate(seed, grid_size)
