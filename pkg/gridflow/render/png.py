import io
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from gridflow.core.exceptions import DecodeError
from gridflow.core.raster import RasterImage

# Fixed so identical images always encode to identical bytes.
PNG_COMPRESS_LEVEL = 6


def encode_png(image: RasterImage) -> bytes:
    buffer = io.BytesIO()
    Image.fromarray(np.asarray(image.array)).save(
        buffer, format="PNG", compress_level=PNG_COMPRESS_LEVEL, optimize=False
    )
    return buffer.getvalue()


def decode_png(data: bytes) -> RasterImage:
    try:
        with Image.open(io.BytesIO(data)) as img:
            if img.format != "PNG":
                raise DecodeError(f"Expected a PNG stream, got {img.format}")
            img.load()
            rgb = img.convert("RGB")
            return RasterImage(np.array(rgb, dtype=np.uint8))
    except DecodeError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as e:
        raise DecodeError(f"Malformed PNG stream: {e}")


def write_png(image: RasterImage, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_png(image))


def read_png(path: Union[str, Path]) -> RasterImage:
    return decode_png(Path(path).read_bytes())
