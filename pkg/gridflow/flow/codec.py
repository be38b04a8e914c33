"""
Pixel <-> latent codec and the conditioning tensor.

The identity codec works in normalized pixel space: p -> p / 127.5 - 1.
Anything implementing `Codec` (e.g. a learned autoencoder) can replace it.
"""

from dataclasses import dataclass
from typing import Optional, Protocol, Tuple

import numpy as np
import torch

from gridflow.core.exceptions import ShapeMismatch
from gridflow.core.raster import RasterImage


class Codec(Protocol):
    def encode(self, image: RasterImage) -> torch.Tensor: ...

    def decode(self, latent: torch.Tensor) -> RasterImage: ...


class IdentityCodec:
    """(H, W, 3) uint8 <-> (3, H, W) float32 in [-1, 1]."""

    def encode(self, image: RasterImage) -> torch.Tensor:
        pixels = torch.from_numpy(np.array(image.array, dtype=np.float32))
        return pixels.permute(2, 0, 1).contiguous() / 127.5 - 1.0

    def decode(self, latent: torch.Tensor) -> RasterImage:
        x = latent.detach().to("cpu", torch.float32).clamp(-1.0, 1.0)
        pixels = torch.round((x + 1.0) * 127.5).to(torch.uint8)
        return RasterImage(pixels.permute(1, 2, 0).numpy())


IDENTITY_CODEC = IdentityCodec()


@dataclass(frozen=True)
class Condition:
    """Normalized problem image, or the null condition used for guidance."""

    image: torch.Tensor
    null: bool = False

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.image.shape[-2], self.image.shape[-1])


def encode_condition(
    image: RasterImage,
    expected_shape: Optional[Tuple[int, int]] = None,
    codec: Codec = IDENTITY_CODEC,
) -> Condition:
    if expected_shape is not None and image.shape != tuple(expected_shape):
        raise ShapeMismatch(f"Condition image is {image.shape}, model expects {tuple(expected_shape)}")
    return Condition(image=codec.encode(image), null=False)


def null_condition(height: int, width: int, channels: int = 3) -> Condition:
    return Condition(image=torch.zeros(channels, height, width), null=True)
