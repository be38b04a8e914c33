"""Read a drawn route off a frozen-lake or maze image."""

from typing import Dict, List, Set, Tuple

import numpy as np

from gridflow.core.exceptions import AmbiguousPath, NoPath
from gridflow.core.raster import RasterImage
from gridflow.oracle.paths import MOVE_ORDER, step_function
from gridflow.parse.ink import check_shape, ink_mask
from gridflow.parse.thresholds import CELL_COVERAGE
from gridflow.render.spec import RenderSpec
from gridflow.schemas import MOVE_DELTAS, ActionSequence, Cell, Move, TaskInstance, TaskKind


def inked_cells(mask: np.ndarray, instance: TaskInstance, spec: RenderSpec) -> Set[Cell]:
    n = instance.payload.size
    cell = spec.cell_px
    frame = spec.frame_px
    lo, hi = cell // 4, cell - cell // 4
    grid = mask[frame:frame + n * cell, frame:frame + n * cell].reshape(n, cell, n, cell)
    coverage = grid[:, lo:hi, :, lo:hi].mean(axis=(1, 3))
    rows, cols = np.nonzero(coverage >= CELL_COVERAGE)
    return {(int(r), int(c)) for r, c in zip(rows, cols)}


def _edge_inked(mask: np.ndarray, spec: RenderSpec, kind: TaskKind, a: Cell, b: Cell) -> bool:
    """Ink in the window straddling the boundary between two adjacent cells."""
    ya, xa = spec.cell_center(kind, *a)
    yb, xb = spec.cell_center(kind, *b)
    my, mx = (ya + yb) // 2, (xa + xb) // 2
    half = spec.cell_px // 4
    window = mask[my - half:my + half, mx - half:mx + half]
    return window.size > 0 and window.mean() >= CELL_COVERAGE


def _adjacency(instance: TaskInstance):
    """Frozen lake: plain 4-adjacency so routes through holes still parse. Maze: open passages only."""
    n = instance.payload.size
    if instance.kind == TaskKind.MAZE:
        return step_function(instance.payload)

    def step(cell: Cell, move: Move):
        dr, dc = MOVE_DELTAS[move]
        r, c = cell[0] + dr, cell[1] + dc
        return (r, c) if 0 <= r < n and 0 <= c < n else None

    return step


def parse_path(image: RasterImage, instance: TaskInstance, spec: RenderSpec) -> ActionSequence:
    check_shape(image, instance, spec)
    payload = instance.payload
    start, goal = tuple(payload.start), tuple(payload.goal)
    mask = ink_mask(image, spec)
    nodes = inked_cells(mask, instance, spec) | {start, goal}
    step = _adjacency(instance)

    graph: Dict[Cell, List[Tuple[Move, Cell]]] = {}
    for cell in nodes:
        links = []
        for move in MOVE_ORDER:
            nxt = step(cell, move)
            if nxt in nodes and _edge_inked(mask, spec, instance.kind, cell, nxt):
                links.append((move, nxt))
        graph[cell] = links

    if not graph[start]:
        raise NoPath("No ink leaves the start cell")
    if len(graph[start]) > 1:
        raise AmbiguousPath(f"Route branches at the start cell {start}")

    moves = []
    visited = {start}
    prev, cur = None, start
    while cur != goal:
        links = graph[cur]
        if len(links) >= 3:
            raise AmbiguousPath(f"Route branches at {cur}")
        onward = [(m, c) for m, c in links if c != prev]
        if not onward:
            raise NoPath(f"Route dead-ends at {cur}")
        if len(onward) > 1:
            raise AmbiguousPath(f"Route branches at {cur}")
        move, nxt = onward[0]
        if nxt in visited:
            raise AmbiguousPath(f"Route loops back to {nxt}")
        moves.append(move)
        visited.add(nxt)
        prev, cur = cur, nxt

    if visited != nodes:
        stray = sorted(nodes - visited)
        raise AmbiguousPath(f"Ink outside the route at {stray[:3]}")
    return ActionSequence(moves=moves)
