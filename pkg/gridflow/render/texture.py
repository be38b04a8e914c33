"""Procedural jigsaw source images: a smooth colour field over per-patch base hues."""

import colorsys

import numpy as np

from gridflow.core.rng import split_rng

FIELD_AMPLITUDE = 45.0
SATURATION = 0.75
VALUE = 0.85


def source_texture(texture_seed: int, rows: int, cols: int, side: int) -> np.ndarray:
    """(side, side, 3) uint8 image; patch k (row-major) gets its own hue."""
    rng = split_rng(texture_seed, "jigsaw-texture")
    n = rows * cols
    hues = (np.arange(n) + rng.random()) / n
    hues = hues[rng.permutation(n)]
    base = np.array([colorsys.hsv_to_rgb(h % 1.0, SATURATION, VALUE) for h in hues]) * 255.0

    yy, xx = np.mgrid[0:side, 0:side] / float(side)
    field = np.zeros((side, side, 3))
    for channel in range(3):
        for _ in range(3):
            fy, fx = rng.uniform(0.5, 2.5, size=2)
            phase = rng.uniform(0, 2 * np.pi)
            field[..., channel] += np.sin(2 * np.pi * (fy * yy + fx * xx) + phase)
    field = field / 3.0 * FIELD_AMPLITUDE

    ph, pw = side // rows, side // cols
    patch_of_row = np.minimum(np.arange(side) // ph, rows - 1)
    patch_of_col = np.minimum(np.arange(side) // pw, cols - 1)
    patch_index = patch_of_row[:, None] * cols + patch_of_col[None, :]

    image = base[patch_index] + field
    return np.clip(np.rint(image), 0, 255).astype(np.uint8)
