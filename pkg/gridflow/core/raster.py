from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class RasterImage:
    """RGB8 image; `array` is (height, width, 3) uint8, row-major."""

    array: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.array, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"Expected a (H, W, 3) image, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "array", arr)

    @classmethod
    def blank(cls, height: int, width: int, color=(255, 255, 255)) -> "RasterImage":
        arr = np.empty((height, width, 3), dtype=np.uint8)
        arr[:] = color
        return cls(arr)

    @classmethod
    def from_pixels(cls, width: int, height: int, pixels: bytes) -> "RasterImage":
        if len(pixels) != 3 * width * height:
            raise ValueError(f"Pixel buffer holds {len(pixels)} bytes, expected {3 * width * height}")
        return cls(np.frombuffer(pixels, dtype=np.uint8).reshape(height, width, 3))

    @property
    def height(self) -> int:
        return self.array.shape[0]

    @property
    def width(self) -> int:
        return self.array.shape[1]

    @property
    def shape(self):
        return (self.height, self.width)

    @property
    def pixels(self) -> bytes:
        return self.array.tobytes()

    def __eq__(self, other):
        if not isinstance(other, RasterImage):
            return NotImplemented
        return self.array.shape == other.array.shape and bool(np.array_equal(self.array, other.array))

    def __hash__(self):
        return hash((self.array.shape, self.array.tobytes()))
