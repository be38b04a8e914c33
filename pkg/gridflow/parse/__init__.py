"""
Image -> symbolic solution parsing.

Every parser inverts the renderer under the same RenderSpec and raises a
ParseError subclass when the image does not admit a clean reading.
"""

from typing import Callable, Dict

from gridflow.core.raster import RasterImage
from gridflow.parse.ink import check_shape
from gridflow.parse.jigsaw import parse_jigsaw
from gridflow.parse.paths import parse_path
from gridflow.parse.sudoku import parse_sudoku
from gridflow.parse.tour import parse_tour
from gridflow.render.spec import DEFAULT_SPEC, RenderSpec
from gridflow.schemas import TaskInstance, TaskKind

PARSERS: Dict[TaskKind, Callable] = {
    TaskKind.VSP: parse_path,
    TaskKind.MAZE: parse_path,
    TaskKind.TSP: parse_tour,
    TaskKind.SUDOKU: parse_sudoku,
    TaskKind.JIGSAW: parse_jigsaw,
}


def parse(image: RasterImage, instance: TaskInstance, spec: RenderSpec = DEFAULT_SPEC):
    check_shape(image, instance, spec)
    return PARSERS[instance.kind](image, instance, spec)


__all__ = ["PARSERS", "parse", "parse_path", "parse_tour", "parse_sudoku", "parse_jigsaw"]
