"""
Euler integration of the learned velocity field with classifier-free guidance.

Integration runs from t = 0 (noise) to t = 1 (data) in T equal steps.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import torch

from gridflow.core.exceptions import SampleDiverged, ShapeMismatch
from gridflow.core.raster import RasterImage
from gridflow.core.rng import torch_generator
from gridflow.flow.codec import IDENTITY_CODEC, Codec, Condition
from gridflow.flow.matching import VelocityFn
from gridflow.schemas import SampleConfig


def cfg_velocity(v_cond: torch.Tensor, v_uncond: torch.Tensor, w: float) -> torch.Tensor:
    if v_cond.shape != v_uncond.shape:
        raise ShapeMismatch(f"Velocity shapes differ: {tuple(v_cond.shape)} vs {tuple(v_uncond.shape)}")
    if w == 1:
        return v_cond
    return v_uncond + w * (v_cond - v_uncond)


def estimate_x0(x_t: torch.Tensor, t: float, v: torch.Tensor) -> torch.Tensor:
    """Project the current state onto the data end of its straight path."""
    return x_t + (1.0 - t) * v


@dataclass
class Trajectory:
    """x0 estimates, one per Euler step, at t = k / T."""

    frames: List[Tuple[float, RasterImage]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.frames)


StepHook = Callable[[int, float, torch.Tensor, torch.Tensor], None]


@torch.no_grad()
def integrate(
    velocity_fn: VelocityFn,
    x1: torch.Tensor,
    condition: Condition,
    steps: int,
    cfg_scale: float,
    on_step: Optional[StepHook] = None,
) -> torch.Tensor:
    """
    Run T Euler steps from the noise latent x1 (shape (C, H, W)).

    One velocity evaluation per step when cfg_scale == 1, two otherwise.
    `on_step(k, t, x_t, v)` sees the guided velocity before each update.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if x1.shape != condition.image.shape:
        raise ShapeMismatch(f"Noise {tuple(x1.shape)} does not match condition {tuple(condition.image.shape)}")

    x = x1.unsqueeze(0)
    cond = condition.image.unsqueeze(0).to(x.dtype)
    null_cond = torch.zeros_like(cond)
    is_null = torch.tensor([condition.null])
    always_null = torch.tensor([True])
    dt = 1.0 / steps

    for k in range(steps):
        t = k / steps
        t_batch = torch.full((1,), t, dtype=x.dtype)
        v_cond = velocity_fn(x, t_batch, cond, is_null)
        if cfg_scale == 1:
            v = v_cond
        else:
            v_uncond = velocity_fn(x, t_batch, null_cond, always_null)
            v = cfg_velocity(v_cond, v_uncond, cfg_scale)
        if on_step is not None:
            on_step(k, t, x[0], v[0])
        x = x + dt * v
        if not torch.isfinite(x).all():
            raise SampleDiverged(k)
    return x[0]


def initial_noise(shape, seed: int, stream: str = "euler") -> torch.Tensor:
    return torch.randn(tuple(shape), generator=torch_generator(seed, stream))


def euler_sample(
    velocity_fn: VelocityFn,
    condition: Condition,
    config: SampleConfig,
    codec: Codec = IDENTITY_CODEC,
    stream: str = "euler",
) -> Tuple[RasterImage, Optional[Trajectory]]:
    """
    Sample one solution image.

    `velocity_fn` is a Denoiser or any callable with its signature. The
    starting noise comes from the (config.seed, stream) random stream.
    """
    x1 = initial_noise(condition.image.shape, config.seed, stream)
    trajectory = Trajectory() if config.record_trajectory else None

    def record(k: int, t: float, x_t: torch.Tensor, v: torch.Tensor) -> None:
        trajectory.frames.append((t, codec.decode(estimate_x0(x_t, t, v))))

    final = integrate(
        velocity_fn,
        x1,
        condition,
        config.steps,
        config.cfg_scale,
        on_step=record if trajectory is not None else None,
    )
    return codec.decode(final), trajectory
