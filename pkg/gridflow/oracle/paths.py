"""Grid navigation oracle shared by the frozen-lake and maze tasks."""

from collections import deque
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from gridflow.core.exceptions import NoPath, OracleInputError
from gridflow.schemas import (
    ActionSequence,
    Cell,
    MazePayload,
    Move,
    MOVE_DELTAS,
    MOVE_WALLS,
    VspPayload,
)

# Tie-break order: among shortest paths the one that is lexicographically
# smallest under R < D < L < U is returned.
MOVE_ORDER: Tuple[Move, ...] = (Move.R, Move.D, Move.L, Move.U)

GridPayload = Union[VspPayload, MazePayload]
StepFn = Callable[[Cell, Move], Optional[Cell]]


def step_function(payload: GridPayload) -> StepFn:
    """Return step(cell, move) -> next cell, or None when the move is illegal."""
    size = payload.size

    if isinstance(payload, VspPayload):
        holes = payload.holes

        def step(cell: Cell, move: Move) -> Optional[Cell]:
            dr, dc = MOVE_DELTAS[move]
            r, c = cell[0] + dr, cell[1] + dc
            if 0 <= r < size and 0 <= c < size and not holes[r][c]:
                return (r, c)
            return None

        return step

    walls = payload.walls

    def step(cell: Cell, move: Move) -> Optional[Cell]:
        if walls[cell[0]][cell[1]] & MOVE_WALLS[move]:
            return None
        dr, dc = MOVE_DELTAS[move]
        r, c = cell[0] + dr, cell[1] + dc
        if 0 <= r < size and 0 <= c < size:
            return (r, c)
        return None

    return step


def bfs_distances(size: int, step: StepFn, source: Cell) -> Dict[Cell, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        cell = queue.popleft()
        for move in MOVE_ORDER:
            nxt = step(cell, move)
            if nxt is not None and nxt not in dist:
                dist[nxt] = dist[cell] + 1
                queue.append(nxt)
    return dist


def bfs_shortest_path(
    payload: GridPayload,
    start: Optional[Cell] = None,
    goal: Optional[Cell] = None,
) -> ActionSequence:
    start = tuple(start or payload.start)
    goal = tuple(goal or payload.goal)
    size = payload.size
    for r, c in (start, goal):
        if not (0 <= r < size and 0 <= c < size):
            raise OracleInputError(f"Cell {(r, c)} lies outside the {size}x{size} grid")
    if isinstance(payload, VspPayload) and (payload.holes[start[0]][start[1]] or payload.holes[goal[0]][goal[1]]):
        raise OracleInputError("Start and goal must be traversable")
    if start == goal:
        raise OracleInputError("Start and goal coincide")

    step = step_function(payload)
    to_goal = bfs_distances(size, step, goal)
    if start not in to_goal:
        raise NoPath(f"Goal {goal} is unreachable from {start}")

    moves = []
    cell = start
    while cell != goal:
        for move in MOVE_ORDER:
            nxt = step(cell, move)
            if nxt is not None and to_goal.get(nxt) == to_goal[cell] - 1:
                moves.append(move)
                cell = nxt
                break
    return ActionSequence(moves=moves)


def walk(payload: GridPayload, moves: Sequence[Move]) -> Tuple[List[Cell], Optional[str]]:
    """Replay moves from the start cell. Returns visited cells and the first violation, if any."""
    step = step_function(payload)
    cell = tuple(payload.start)
    cells = [cell]
    size = payload.size
    for index, move in enumerate(moves):
        nxt = step(cell, move)
        if nxt is None:
            dr, dc = MOVE_DELTAS[move]
            r, c = cell[0] + dr, cell[1] + dc
            if not (0 <= r < size and 0 <= c < size):
                return cells, f"off grid at move {index}"
            if isinstance(payload, VspPayload):
                return cells, f"hole at ({r},{c})"
            return cells, f"wall crossed between {cell} and ({r},{c})"
        cell = nxt
        cells.append(cell)
    return cells, None
