"""Recover a jigsaw arrangement by matching each board slot against the known input pieces."""

import numpy as np
from scipy.optimize import linear_sum_assignment

from gridflow.core.raster import RasterImage
from gridflow.parse.ink import check_shape
from gridflow.parse.thresholds import JIGSAW_LOW_CONFIDENCE
from gridflow.render.renderer import JigsawRenderer
from gridflow.render.spec import RenderSpec
from gridflow.schemas import Permutation, TaskInstance


def slot_costs(image: RasterImage, instance: TaskInstance, spec: RenderSpec) -> np.ndarray:
    """cost[slot, piece]: mean squared pixel-channel distance, label box excluded."""
    payload = instance.payload
    n = payload.rows * payload.cols
    renderer = JigsawRenderer(spec)
    source = renderer.source(instance)
    pieces = np.stack([renderer.piece(source, instance, j) for j in range(n)]).astype(np.float64)

    h, w = pieces.shape[1:3]
    keep = np.ones((h, w), dtype=bool)
    keep[:spec.label_box_px, :spec.label_box_px] = False

    slots = []
    for slot in range(n):
        y, x, _, _ = spec.patch_box(payload.rows, payload.cols, slot)
        slots.append(image.array[y:y + h, x:x + w])
    slots = np.stack(slots).astype(np.float64)

    diff = slots[:, None] - pieces[None, :]
    return (diff ** 2)[:, :, keep].mean(axis=(2, 3))


def parse_jigsaw(image: RasterImage, instance: TaskInstance, spec: RenderSpec) -> Permutation:
    check_shape(image, instance, spec)
    cost = slot_costs(image, instance, spec)
    rows, cols = linear_sum_assignment(cost)
    mapping = [int(c) for _, c in sorted(zip(rows, cols))]
    low = bool(cost[rows, cols].max() > JIGSAW_LOW_CONFIDENCE)
    return Permutation(mapping=mapping, low_confidence=low)
