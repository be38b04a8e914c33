"""Read a closed tour off a TSP image by checking every city pair for a drawn segment."""

from typing import List

import numpy as np

from gridflow.core.exceptions import DegreeViolation, NotACycle
from gridflow.core.raster import RasterImage
from gridflow.parse.ink import check_shape, ink_mask
from gridflow.parse.thresholds import CITY_EXCLUSION_PX, EDGE_MIN_INKED, EDGE_SAMPLES
from gridflow.render.spec import RenderSpec
from gridflow.schemas import TaskInstance, Tour


def edge_inked(mask: np.ndarray, p, q) -> bool:
    """Sample the open segment p-q outside both exclusion disks."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    length = float(np.hypot(*(q - p)))
    if length <= 2 * CITY_EXCLUSION_PX:
        return False
    lo = CITY_EXCLUSION_PX / length
    hi = 1.0 - lo
    ts = lo + (hi - lo) * np.arange(1, EDGE_SAMPLES + 1) / (EDGE_SAMPLES + 1)
    points = np.rint(p[None, :] + ts[:, None] * (q - p)[None, :]).astype(int)
    rows = np.clip(points[:, 0], 0, mask.shape[0] - 1)
    cols = np.clip(points[:, 1], 0, mask.shape[1] - 1)
    return int(mask[rows, cols].sum()) >= EDGE_MIN_INKED


def parse_tour(image: RasterImage, instance: TaskInstance, spec: RenderSpec) -> Tour:
    check_shape(image, instance, spec)
    payload = instance.payload
    n = len(payload.cities)
    mask = ink_mask(image, spec)
    centers = [spec.city_pixel(city) for city in payload.cities]

    neighbors: List[List[int]] = [[] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if edge_inked(mask, centers[i], centers[j]):
                neighbors[i].append(j)
                neighbors[j].append(i)

    for city in range(n):
        if len(neighbors[city]) != 2:
            raise DegreeViolation(city, len(neighbors[city]))

    start = payload.start
    order = [start]
    prev, cur = start, min(neighbors[start])
    while cur != start:
        if cur in order:
            raise NotACycle(f"Tour revisits city {cur}")
        order.append(cur)
        a, b = neighbors[cur]
        prev, cur = cur, (b if a == prev else a)
    if len(order) != n:
        raise NotACycle(f"Drawn edges close a loop over {len(order)} of {n} cities")
    return Tour(order=order)
