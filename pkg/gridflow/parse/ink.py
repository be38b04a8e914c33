import numpy as np

from gridflow.core.exceptions import OffGrid
from gridflow.core.raster import RasterImage
from gridflow.parse.thresholds import INK_TAU
from gridflow.render.spec import RenderSpec
from gridflow.schemas import TaskInstance


def color_mask(pixels: np.ndarray, color, tau: float = INK_TAU) -> np.ndarray:
    """True where a pixel lies within `tau` (Euclidean RGB) of `color`."""
    diff = pixels.astype(np.int32) - np.asarray(color, dtype=np.int32)
    return (diff * diff).sum(axis=-1) <= tau * tau


def ink_mask(image: RasterImage, spec: RenderSpec, tau: float = INK_TAU) -> np.ndarray:
    return color_mask(image.array, spec.palette.ink, tau)


def check_shape(image: RasterImage, instance: TaskInstance, spec: RenderSpec) -> None:
    expected = spec.image_shape(instance.kind, instance.level)
    if image.shape != expected:
        raise OffGrid(expected, image.shape)
