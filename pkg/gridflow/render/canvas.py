"""Integer-coordinate drawing on (H, W, 3) uint8 arrays. No anti-aliasing."""

from typing import Iterator, Sequence, Tuple

import numpy as np

Point = Tuple[int, int]


def new_canvas(height: int, width: int, color) -> np.ndarray:
    canvas = np.empty((height, width, 3), dtype=np.uint8)
    canvas[:] = color
    return canvas


def fill_rect(canvas: np.ndarray, y0: int, x0: int, y1: int, x1: int, color) -> None:
    """Fill rows y0..y1-1 and columns x0..x1-1, clipped to the canvas."""
    h, w = canvas.shape[:2]
    y0, x0 = max(0, y0), max(0, x0)
    y1, x1 = min(h, y1), min(w, x1)
    if y0 < y1 and x0 < x1:
        canvas[y0:y1, x0:x1] = color


def draw_frame(canvas: np.ndarray, width: int, color) -> None:
    canvas[:width, :] = color
    canvas[-width:, :] = color
    canvas[:, :width] = color
    canvas[:, -width:] = color


def fill_disk(canvas: np.ndarray, center: Point, radius: int, color) -> None:
    cy, cx = center
    h, w = canvas.shape[:2]
    y0, y1 = max(0, cy - radius), min(h, cy + radius + 1)
    x0, x1 = max(0, cx - radius), min(w, cx + radius + 1)
    yy, xx = np.mgrid[y0:y1, x0:x1]
    mask = (yy - cy) ** 2 + (xx - cx) ** 2 <= radius * radius
    canvas[y0:y1, x0:x1][mask] = color


def bresenham(p0: Point, p1: Point) -> Iterator[Point]:
    y0, x0 = p0
    y1, x1 = p1
    dy, dx = abs(y1 - y0), -abs(x1 - x0)
    sy = 1 if y0 < y1 else -1
    sx = 1 if x0 < x1 else -1
    err = dx + dy
    while True:
        yield (y0, x0)
        if y0 == y1 and x0 == x1:
            return
        e2 = 2 * err
        if e2 >= dx:
            err += dx
            y0 += sy
        if e2 <= dy:
            err += dy
            x0 += sx


def draw_line(canvas: np.ndarray, p0: Point, p1: Point, half_width: int, color) -> None:
    """Square-brush line: every Bresenham pixel stamps a (2*half_width+1)^2 square."""
    for y, x in bresenham(p0, p1):
        fill_rect(canvas, y - half_width, x - half_width, y + half_width + 1, x + half_width + 1, color)


def draw_polyline(canvas: np.ndarray, points: Sequence[Point], half_width: int, color, closed: bool = False) -> None:
    points = list(points)
    if closed and len(points) > 1:
        points.append(points[0])
    for a, b in zip(points, points[1:]):
        draw_line(canvas, a, b, half_width, color)


def stamp(canvas: np.ndarray, y: int, x: int, bitmap: np.ndarray, color) -> None:
    h, w = bitmap.shape
    region = canvas[y:y + h, x:x + w]
    region[bitmap[: region.shape[0], : region.shape[1]]] = color
