from .png import decode_png, encode_png, read_png, write_png
from .renderer import RENDERERS, get_renderer, render_instance, render_solution
from .spec import DEFAULT_SPEC, Palette, RenderSpec

__all__ = [
    "RenderSpec",
    "Palette",
    "DEFAULT_SPEC",
    "RENDERERS",
    "get_renderer",
    "render_instance",
    "render_solution",
    "encode_png",
    "decode_png",
    "read_png",
    "write_png",
]
