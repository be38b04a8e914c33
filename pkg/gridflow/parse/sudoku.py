"""Read digits back from a Sudoku image by glyph template matching."""

import numpy as np

from gridflow.core.exceptions import GivenMismatch, IllegibleCell
from gridflow.core.raster import RasterImage
from gridflow.parse.ink import check_shape, color_mask
from gridflow.parse.thresholds import GLYPH_SLACK_BITS
from gridflow.render.glyphs import GLYPH_COLS, GLYPH_ROWS, GLYPHS
from gridflow.render.renderer import SudokuRenderer
from gridflow.render.spec import RenderSpec
from gridflow.schemas import SudokuGrid, TaskInstance

_DIGITS = sorted(GLYPHS)
_STACK = np.stack([GLYPHS[d] for d in _DIGITS])


def read_glyph(window: np.ndarray, scale: int) -> np.ndarray:
    """Majority-vote a (7*scale, 5*scale) ink window down to a 5x7 bitmap."""
    blocks = window.reshape(GLYPH_ROWS, scale, GLYPH_COLS, scale).sum(axis=(1, 3))
    return blocks * 2 > scale * scale


def parse_sudoku(image: RasterImage, instance: TaskInstance, spec: RenderSpec) -> SudokuGrid:
    check_shape(image, instance, spec)
    renderer = SudokuRenderer(spec)
    scale = spec.glyph_scale
    height, width = GLYPH_ROWS * scale, GLYPH_COLS * scale
    mask = color_mask(image.array, spec.palette.clue) | color_mask(image.array, spec.palette.ink)

    digits = []
    for cell, given in enumerate(instance.payload.puzzle):
        y, x = renderer.glyph_origin(cell)
        window = mask[y:y + height, x:x + width]
        if not window.any():
            raise IllegibleCell(cell)
        bitmap = read_glyph(window, scale)
        distances = (_STACK != bitmap[None]).sum(axis=(1, 2))
        best = int(np.argmin(distances))
        if distances[best] > GLYPH_SLACK_BITS:
            raise IllegibleCell(cell, int(distances[best]))
        digit = _DIGITS[best]
        if given and digit != given:
            raise GivenMismatch(cell, given, digit)
        digits.append(digit)
    return SudokuGrid(digits=digits)
