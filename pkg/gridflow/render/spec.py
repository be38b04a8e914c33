"""Every rendering constant lives here; parsers read the same object to invert the drawing."""

from itertools import combinations
from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from gridflow.core.levels import Level
from gridflow.schemas import TaskKind

RGB = Tuple[int, int, int]


class Palette(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    background: RGB = (255, 255, 255)
    grid: RGB = (160, 160, 160)
    wall: RGB = (0, 0, 0)
    start: RGB = (255, 200, 0)
    goal: RGB = (0, 90, 220)
    ink: RGB = (220, 30, 30)
    clue: RGB = (16, 16, 16)

    @model_validator(mode="after")
    def check_distinct(self):
        colors = self.model_dump()
        for (a, ca), (b, cb) in combinations(colors.items(), 2):
            if tuple(ca) == tuple(cb):
                raise ValueError(f"palette colors {a} and {b} coincide")
        return self


class RenderSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    cell_px: int = Field(16, ge=8, description="Pixels per grid cell")
    frame_px: int = Field(1, ge=1)
    palette: Palette = Field(default_factory=Palette)
    wall_px: int = Field(2, ge=1)
    sudoku_cell_scale: int = Field(2, ge=1, description="Sudoku cells are this many grid cells wide")
    tsp_canvas_cells: int = Field(32, ge=8, description="TSP canvas side in grid cells")
    tsp_margin_px: int = Field(8, ge=0)
    city_radius_px: int = Field(4, ge=1)
    tour_half_width_px: int = Field(1, ge=0)
    jigsaw_board_cells: int = Field(12, ge=12, description="Jigsaw board side in grid cells; 12 divides by 1..4")
    label_box_px: int = Field(12, ge=12)

    # --- derived geometry ---

    @property
    def ink_half_width(self) -> int:
        return max(1, self.cell_px // 8)

    @property
    def marker_radius(self) -> int:
        return self.cell_px * 3 // 8

    @property
    def sudoku_cell_px(self) -> int:
        return self.cell_px * self.sudoku_cell_scale

    @property
    def glyph_scale(self) -> int:
        return max(1, (self.sudoku_cell_px * 2 // 3) // 7)

    @property
    def tsp_canvas_px(self) -> int:
        return self.tsp_canvas_cells * self.cell_px

    @property
    def jigsaw_board_px(self) -> int:
        return self.jigsaw_board_cells * self.cell_px

    def grid_side(self, kind: TaskKind, level: Level) -> int:
        """Cells per side for lattice tasks."""
        if kind in (TaskKind.VSP, TaskKind.MAZE):
            return int(level)
        if kind == TaskKind.SUDOKU:
            return 9
        raise ValueError(f"{kind.value} has no cell lattice")

    def cell_size(self, kind: TaskKind) -> int:
        return self.sudoku_cell_px if kind == TaskKind.SUDOKU else self.cell_px

    def image_shape(self, kind: TaskKind, level: Level) -> Tuple[int, int]:
        """(height, width) of every image rendered for this kind and level."""
        if kind in (TaskKind.VSP, TaskKind.MAZE, TaskKind.SUDOKU):
            inner = self.grid_side(kind, level) * self.cell_size(kind)
        elif kind == TaskKind.TSP:
            inner = self.tsp_canvas_px
        else:
            inner = self.jigsaw_board_px
        side = inner + 2 * self.frame_px
        return (side, side)

    def cell_origin(self, kind: TaskKind, r: int, c: int) -> Tuple[int, int]:
        size = self.cell_size(kind)
        return (self.frame_px + r * size, self.frame_px + c * size)

    def cell_center(self, kind: TaskKind, r: int, c: int) -> Tuple[int, int]:
        y, x = self.cell_origin(kind, r, c)
        half = self.cell_size(kind) // 2
        return (y + half, x + half)

    def city_pixel(self, city: Tuple[float, float]) -> Tuple[int, int]:
        """(row, col) of a city; x maps to columns, y to rows."""
        span = self.tsp_canvas_px - 1 - 2 * self.tsp_margin_px
        offset = self.frame_px + self.tsp_margin_px
        return (offset + int(round(city[1] * span)), offset + int(round(city[0] * span)))

    def patch_box(self, rows: int, cols: int, slot: int) -> Tuple[int, int, int, int]:
        """(y0, x0, height, width) of a jigsaw slot."""
        h, w = self.jigsaw_board_px // rows, self.jigsaw_board_px // cols
        r, c = divmod(slot, cols)
        return (self.frame_px + r * h, self.frame_px + c * w, h, w)


DEFAULT_SPEC = RenderSpec()
