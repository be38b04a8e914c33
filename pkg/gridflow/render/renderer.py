"""
Symbolic -> raster rendering of task instances (problem images) and their
solutions (target images).

One renderer class per task kind, registered in RENDERERS. Drawing order is
fixed: background, structure, solution ink, landmarks (start/goal/cities),
frame, so landmarks always stay visible above the ink.
"""

from typing import Dict, List, Optional, Type

import numpy as np

from gridflow.core.exceptions import KindMismatch, RenderRefused
from gridflow.core.raster import RasterImage
from gridflow.oracle.paths import walk
from gridflow.oracle.sudoku import is_valid_solution
from gridflow.render import canvas as cv
from gridflow.render.glyphs import glyph, number_bitmap
from gridflow.render.spec import DEFAULT_SPEC, RenderSpec
from gridflow.render.texture import source_texture
from gridflow.schemas import (
    SOLUTION_TYPES,
    WALL_E,
    WALL_N,
    WALL_S,
    WALL_W,
    ActionSequence,
    Permutation,
    SudokuGrid,
    TaskInstance,
    TaskKind,
    Tour,
)


class TaskRenderer:
    """Base class for per-kind renderers."""

    kind: TaskKind

    def __init__(self, spec: RenderSpec = DEFAULT_SPEC):
        self.spec = spec
        self.palette = spec.palette

    def _canvas(self, instance: TaskInstance) -> np.ndarray:
        h, w = self.spec.image_shape(instance.kind, instance.level)
        return cv.new_canvas(h, w, self.palette.background)

    def _finish(self, canvas: np.ndarray) -> RasterImage:
        cv.draw_frame(canvas, self.spec.frame_px, self.palette.grid)
        return RasterImage(canvas)

    def draw_base(self, canvas: np.ndarray, instance: TaskInstance) -> None:
        raise NotImplementedError

    def draw_solution(self, canvas: np.ndarray, instance: TaskInstance, solution) -> None:
        raise NotImplementedError

    def draw_landmarks(self, canvas: np.ndarray, instance: TaskInstance) -> None:
        pass

    def check_solution(self, instance: TaskInstance, solution) -> None:
        pass

    def render_instance(self, instance: TaskInstance) -> RasterImage:
        canvas = self._canvas(instance)
        self.draw_base(canvas, instance)
        self.draw_landmarks(canvas, instance)
        return self._finish(canvas)

    def render_solution(self, instance: TaskInstance, solution) -> RasterImage:
        expected = SOLUTION_TYPES[instance.kind]
        if not isinstance(solution, expected):
            raise KindMismatch(expected.__name__, type(solution).__name__)
        self.check_solution(instance, solution)
        canvas = self._canvas(instance)
        self.draw_base(canvas, instance)
        self.draw_solution(canvas, instance, solution)
        self.draw_landmarks(canvas, instance)
        return self._finish(canvas)


class _PathRenderer(TaskRenderer):
    """Shared ink and landmark drawing for the two navigation tasks."""

    def check_solution(self, instance: TaskInstance, solution: ActionSequence) -> None:
        cells, violation = walk(instance.payload, solution.moves)
        if violation:
            raise RenderRefused(f"Path is invalid: {violation}")
        if cells[-1] != tuple(instance.payload.goal):
            raise RenderRefused("Path does not end at the goal")

    def draw_solution(self, canvas: np.ndarray, instance: TaskInstance, solution: ActionSequence) -> None:
        cells, _ = walk(instance.payload, solution.moves)
        points = [self.spec.cell_center(self.kind, r, c) for r, c in cells]
        cv.draw_polyline(canvas, points, self.spec.ink_half_width, self.palette.ink)

    def draw_landmarks(self, canvas: np.ndarray, instance: TaskInstance) -> None:
        payload = instance.payload
        radius = self.spec.marker_radius
        cv.fill_disk(canvas, self.spec.cell_center(self.kind, *payload.start), radius, self.palette.start)
        cv.fill_disk(canvas, self.spec.cell_center(self.kind, *payload.goal), radius, self.palette.goal)


class VspRenderer(_PathRenderer):
    kind = TaskKind.VSP

    def draw_base(self, canvas: np.ndarray, instance: TaskInstance) -> None:
        payload = instance.payload
        cell = self.spec.cell_px
        frame = self.spec.frame_px
        inner = payload.size * cell
        for k in range(1, payload.size):
            offset = frame + k * cell
            cv.fill_rect(canvas, offset, frame, offset + 1, frame + inner, self.palette.grid)
            cv.fill_rect(canvas, frame, offset, frame + inner, offset + 1, self.palette.grid)
        for r, row in enumerate(payload.holes):
            for c, hole in enumerate(row):
                if hole:
                    y, x = self.spec.cell_origin(self.kind, r, c)
                    cv.fill_rect(canvas, y, x, y + cell, x + cell, self.palette.wall)


class MazeRenderer(_PathRenderer):
    kind = TaskKind.MAZE

    def draw_base(self, canvas: np.ndarray, instance: TaskInstance) -> None:
        payload = instance.payload
        cell = self.spec.cell_px
        stroke = self.spec.wall_px
        lo = stroke // 2
        hi = stroke - lo
        color = self.palette.wall
        for r, row in enumerate(payload.walls):
            for c, bits in enumerate(row):
                y, x = self.spec.cell_origin(self.kind, r, c)
                if bits & WALL_N:
                    cv.fill_rect(canvas, y - lo, x - lo, y + hi, x + cell + hi, color)
                if bits & WALL_S:
                    cv.fill_rect(canvas, y + cell - lo, x - lo, y + cell + hi, x + cell + hi, color)
                if bits & WALL_W:
                    cv.fill_rect(canvas, y - lo, x - lo, y + cell + hi, x + hi, color)
                if bits & WALL_E:
                    cv.fill_rect(canvas, y - lo, x + cell - lo, y + cell + hi, x + cell + hi, color)


class TspRenderer(TaskRenderer):
    kind = TaskKind.TSP

    def draw_base(self, canvas: np.ndarray, instance: TaskInstance) -> None:
        pass

    def check_solution(self, instance: TaskInstance, solution: Tour) -> None:
        payload = instance.payload
        if sorted(solution.order) != list(range(len(payload.cities))):
            raise RenderRefused("Tour is not a permutation of the cities")
        if solution.order[0] != payload.start:
            raise RenderRefused("Tour does not begin at the start city")

    def draw_solution(self, canvas: np.ndarray, instance: TaskInstance, solution: Tour) -> None:
        cities = instance.payload.cities
        points = [self.spec.city_pixel(cities[i]) for i in solution.order]
        cv.draw_polyline(canvas, points, self.spec.tour_half_width_px, self.palette.ink, closed=True)

    def draw_landmarks(self, canvas: np.ndarray, instance: TaskInstance) -> None:
        payload = instance.payload
        radius = self.spec.city_radius_px
        for index, city in enumerate(payload.cities):
            color = self.palette.start if index == payload.start else self.palette.goal
            cv.fill_disk(canvas, self.spec.city_pixel(city), radius, color)


class SudokuRenderer(TaskRenderer):
    kind = TaskKind.SUDOKU
    BOX_STROKE = 3

    def glyph_origin(self, cell_index: int):
        """Top-left pixel of the digit glyph inside a Sudoku cell."""
        size = self.spec.sudoku_cell_px
        scale = self.spec.glyph_scale
        r, c = divmod(cell_index, 9)
        y, x = self.spec.cell_origin(self.kind, r, c)
        return (y + (size - 7 * scale) // 2, x + (size - 5 * scale) // 2)

    def draw_base(self, canvas: np.ndarray, instance: TaskInstance) -> None:
        size = self.spec.sudoku_cell_px
        frame = self.spec.frame_px
        inner = 9 * size
        for k in range(1, 9):
            offset = frame + k * size
            if k % 3:
                cv.fill_rect(canvas, offset, frame, offset + 1, frame + inner, self.palette.grid)
                cv.fill_rect(canvas, frame, offset, frame + inner, offset + 1, self.palette.grid)
        half = self.BOX_STROKE // 2
        for k in (3, 6):
            offset = frame + k * size
            cv.fill_rect(canvas, offset - half, frame, offset - half + self.BOX_STROKE, frame + inner, self.palette.wall)
            cv.fill_rect(canvas, frame, offset - half, frame + inner, offset - half + self.BOX_STROKE, self.palette.wall)
        self._digits(canvas, instance.payload.puzzle, self.palette.clue)

    def _digits(self, canvas: np.ndarray, digits: List[int], color, only: Optional[List[bool]] = None) -> None:
        scale = self.spec.glyph_scale
        for index, digit in enumerate(digits):
            if not digit or (only is not None and not only[index]):
                continue
            y, x = self.glyph_origin(index)
            cv.stamp(canvas, y, x, glyph(digit, scale), color)

    def check_solution(self, instance: TaskInstance, solution: SudokuGrid) -> None:
        if not is_valid_solution(solution.digits):
            raise RenderRefused("Grid violates Sudoku constraints")
        for given, digit in zip(instance.payload.puzzle, solution.digits):
            if given and given != digit:
                raise RenderRefused("Grid changes a given digit")

    def draw_solution(self, canvas: np.ndarray, instance: TaskInstance, solution: SudokuGrid) -> None:
        blanks = [d == 0 for d in instance.payload.puzzle]
        self._digits(canvas, solution.digits, self.palette.ink, only=blanks)


class JigsawRenderer(TaskRenderer):
    kind = TaskKind.JIGSAW

    def source(self, instance: TaskInstance) -> np.ndarray:
        payload = instance.payload
        return source_texture(payload.texture_seed, payload.rows, payload.cols, self.spec.jigsaw_board_px)

    def source_patch(self, source: np.ndarray, instance: TaskInstance, patch: int) -> np.ndarray:
        payload = instance.payload
        y, x, h, w = self.spec.patch_box(payload.rows, payload.cols, patch)
        frame = self.spec.frame_px
        return source[y - frame:y - frame + h, x - frame:x - frame + w]

    def piece(self, source: np.ndarray, instance: TaskInstance, piece: int) -> np.ndarray:
        """Pixels of input piece `piece`: its source patch with the label box drawn on."""
        patch = self.source_patch(source, instance, instance.payload.shuffle[piece]).copy()
        box = self.spec.label_box_px
        cv.fill_rect(patch, 0, 0, box, box, self.palette.background)
        label = number_bitmap(piece + 1)
        cv.stamp(patch, (box - label.shape[0]) // 2, (box - label.shape[1]) // 2, label, self.palette.clue)
        return patch

    def _place(self, canvas: np.ndarray, instance: TaskInstance, layout: List[int]) -> None:
        payload = instance.payload
        source = self.source(instance)
        for slot, piece in enumerate(layout):
            y, x, h, w = self.spec.patch_box(payload.rows, payload.cols, slot)
            canvas[y:y + h, x:x + w] = self.piece(source, instance, piece)

    def draw_base(self, canvas: np.ndarray, instance: TaskInstance) -> None:
        self._place(canvas, instance, list(range(len(instance.payload.shuffle))))

    def check_solution(self, instance: TaskInstance, solution: Permutation) -> None:
        if len(solution.mapping) != len(instance.payload.shuffle):
            raise RenderRefused("Permutation size does not match the layout")

    def draw_solution(self, canvas: np.ndarray, instance: TaskInstance, solution: Permutation) -> None:
        self._place(canvas, instance, list(solution.mapping))


RENDERERS: Dict[TaskKind, Type[TaskRenderer]] = {
    TaskKind.VSP: VspRenderer,
    TaskKind.MAZE: MazeRenderer,
    TaskKind.TSP: TspRenderer,
    TaskKind.SUDOKU: SudokuRenderer,
    TaskKind.JIGSAW: JigsawRenderer,
}


def get_renderer(kind: TaskKind, spec: RenderSpec = DEFAULT_SPEC) -> TaskRenderer:
    return RENDERERS[TaskKind(kind)](spec)


def render_instance(instance: TaskInstance, spec: RenderSpec = DEFAULT_SPEC) -> RasterImage:
    return get_renderer(instance.kind, spec).render_instance(instance)


def render_solution(instance: TaskInstance, solution, spec: RenderSpec = DEFAULT_SPEC) -> RasterImage:
    return get_renderer(instance.kind, spec).render_solution(instance, solution)
