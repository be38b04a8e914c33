"""
Conditional flow matching on straight paths.

Convention: t = 0 is noise x1 ~ N(0, I), t = 1 is data x0.
    x_t = t * x0 + (1 - t) * x1,   v = x0 - x1
"""

from dataclasses import dataclass
from typing import Callable

import torch

from gridflow.core.exceptions import ShapeMismatch
from gridflow.schemas import TrainConfig

# velocity_fn(x_t, t, cond, null_mask) -> predicted velocity, shaped like x_t
VelocityFn = Callable[[torch.Tensor, torch.Tensor, torch.Tensor, torch.Tensor], torch.Tensor]


def _same_shape(a: torch.Tensor, b: torch.Tensor) -> None:
    if a.shape != b.shape:
        raise ShapeMismatch(f"Tensor shapes differ: {tuple(a.shape)} vs {tuple(b.shape)}")


def _broadcast_t(t, like: torch.Tensor) -> torch.Tensor:
    t = torch.as_tensor(t, dtype=like.dtype, device=like.device)
    if t.ndim == 1 and like.ndim > 1:
        t = t.view(-1, *([1] * (like.ndim - 1)))
    return t


def interpolate(x0: torch.Tensor, x1: torch.Tensor, t) -> torch.Tensor:
    _same_shape(x0, x1)
    t = _broadcast_t(t, x0)
    return t * x0 + (1 - t) * x1


def target_velocity(x0: torch.Tensor, x1: torch.Tensor) -> torch.Tensor:
    _same_shape(x0, x1)
    return x0 - x1


def sample_timestep(generator: torch.Generator, n: int, mean: float = 0.0, std: float = 1.0) -> torch.Tensor:
    """Logit-normal draws: sigmoid(z), z ~ N(mean, std^2). Strictly inside (0, 1) in float64."""
    if std <= 0:
        raise ValueError("std must be positive")
    z = torch.randn(n, generator=generator, dtype=torch.float64) * std + mean
    return torch.sigmoid(z)


@dataclass
class FlowBatch:
    x_t: torch.Tensor
    t: torch.Tensor
    target: torch.Tensor
    cond: torch.Tensor
    null_mask: torch.Tensor


def sample_flow_batch(
    x0: torch.Tensor,
    cond: torch.Tensor,
    generator: torch.Generator,
    config: TrainConfig,
) -> FlowBatch:
    """Draw noise, timesteps and condition dropout for one training batch."""
    if x0.shape[0] == 0:
        raise ValueError("Batch is empty")
    _same_shape(x0, cond)
    n = x0.shape[0]
    x1 = torch.randn(x0.shape, generator=generator, dtype=x0.dtype)
    t = sample_timestep(generator, n, config.logit_mean, config.logit_std).to(x0.dtype)
    null_mask = torch.rand(n, generator=generator) < config.p_uncond

    x1 = x1.to(x0.device)
    t = t.to(x0.device)
    null_mask = null_mask.to(x0.device)
    cond = torch.where(null_mask.view(-1, 1, 1, 1), torch.zeros_like(cond), cond)
    return FlowBatch(
        x_t=interpolate(x0, x1, t),
        t=t,
        target=target_velocity(x0, x1),
        cond=cond,
        null_mask=null_mask,
    )


def flow_mse(velocity_fn: VelocityFn, batch: FlowBatch) -> torch.Tensor:
    prediction = velocity_fn(batch.x_t, batch.t, batch.cond, batch.null_mask)
    return torch.mean((prediction - batch.target) ** 2)


def fm_loss(
    velocity_fn: VelocityFn,
    x0: torch.Tensor,
    cond: torch.Tensor,
    generator: torch.Generator,
    config: TrainConfig,
) -> torch.Tensor:
    return flow_mse(velocity_fn, sample_flow_batch(x0, cond, generator, config))
