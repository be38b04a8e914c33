"""5x7 digit bitmaps. Any two glyphs differ in at least 6 pixels."""

from typing import Dict

import numpy as np

GLYPH_ROWS, GLYPH_COLS = 7, 5

_SOURCE = {
    0: (".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."),
    1: ("..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."),
    2: (".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"),
    3: ("#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###."),
    4: ("...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."),
    5: ("#####", "#....", "####.", "....#", "....#", "#...#", ".###."),
    6: ("..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."),
    7: ("#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."),
    8: (".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."),
    9: (".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."),
}

GLYPHS: Dict[int, np.ndarray] = {
    digit: np.array([[ch == "#" for ch in row] for row in rows], dtype=bool)
    for digit, rows in _SOURCE.items()
}


def glyph(digit: int, scale: int = 1) -> np.ndarray:
    """Boolean (7*scale, 5*scale) bitmap, scaled by pixel replication."""
    return np.kron(GLYPHS[digit], np.ones((scale, scale), dtype=bool)).astype(bool)


def number_bitmap(value: int, scale: int = 1, spacing: int = 1) -> np.ndarray:
    """Digits of a non-negative integer side by side."""
    parts = [glyph(int(ch), scale) for ch in str(value)]
    gap = np.zeros((GLYPH_ROWS * scale, spacing * scale), dtype=bool)
    pieces = []
    for index, part in enumerate(parts):
        if index:
            pieces.append(gap)
        pieces.append(part)
    return np.hstack(pieces)
