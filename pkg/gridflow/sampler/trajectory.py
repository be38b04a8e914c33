from pathlib import Path
from typing import List, Union

import numpy as np
import structlog

from gridflow.core.raster import RasterImage
from gridflow.render.png import write_png
from gridflow.sampler.euler import Trajectory

logger = structlog.get_logger(__name__)

MONTAGE_NAME = "montage.png"


def montage(frames: List[RasterImage]) -> RasterImage:
    """Frames side by side, left to right."""
    if not frames:
        raise ValueError("Nothing to montage")
    return RasterImage(np.concatenate([frame.array for frame in frames], axis=1))


def frame_name(k: int, t: float) -> str:
    return f"step_{k}_t{t:.3f}.png"


def dump_trajectory(trajectory: Trajectory, out_dir: Union[str, Path]) -> List[Path]:
    if not len(trajectory):
        raise ValueError("Trajectory is empty")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    written = []
    for k, (t, image) in enumerate(trajectory.frames):
        path = out_dir / frame_name(k, t)
        write_png(image, path)
        written.append(path)
    path = out_dir / MONTAGE_NAME
    write_png(montage([image for _, image in trajectory.frames]), path)
    written.append(path)

    logger.info("trajectory_written", out=str(out_dir), frames=len(trajectory))
    return written
