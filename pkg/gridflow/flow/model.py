"""
Conditional U-Net velocity field.

Input is the noisy latent concatenated channel-wise with the condition
image. Time enters every residual block through a FiLM-style scale/shift;
a learned vector is added to the time embedding for null-condition rows.
"""

import math
from typing import List

import torch
import torch.nn.functional as F
from torch import nn

from gridflow.core.exceptions import ShapeMismatch
from gridflow.schemas import DenoiserConfig


def timestep_embedding(t: torch.Tensor, dim: int, max_period: float = 10000.0) -> torch.Tensor:
    """Sinusoidal embedding of t in [0, 1], shape (B, dim)."""
    half = dim // 2
    freqs = torch.exp(-math.log(max_period) * torch.arange(half, dtype=torch.float32, device=t.device) / half)
    args = 1000.0 * t.float()[:, None] * freqs[None, :]
    return torch.cat([torch.cos(args), torch.sin(args)], dim=-1)


def _norm(channels: int, groups: int) -> nn.GroupNorm:
    return nn.GroupNorm(math.gcd(groups, channels), channels)


class ResBlock(nn.Module):
    def __init__(self, in_ch: int, out_ch: int, emb_dim: int, groups: int):
        super().__init__()
        self.norm1 = _norm(in_ch, groups)
        self.conv1 = nn.Conv2d(in_ch, out_ch, 3, padding=1)
        self.film = nn.Linear(emb_dim, 2 * out_ch)
        self.norm2 = _norm(out_ch, groups)
        self.conv2 = nn.Conv2d(out_ch, out_ch, 3, padding=1)
        self.skip = nn.Conv2d(in_ch, out_ch, 1) if in_ch != out_ch else nn.Identity()

    def forward(self, x: torch.Tensor, emb: torch.Tensor) -> torch.Tensor:
        h = self.conv1(F.silu(self.norm1(x)))
        scale, shift = self.film(emb).chunk(2, dim=-1)
        h = self.norm2(h) * (1 + scale[:, :, None, None]) + shift[:, :, None, None]
        h = self.conv2(F.silu(h))
        return h + self.skip(x)


class Denoiser(nn.Module):
    def __init__(self, config: DenoiserConfig):
        super().__init__()
        self.config = config
        base = config.base_width
        widths = [base * m for m in config.channel_mults]
        emb_dim = config.time_dim
        groups = config.groups
        self.levels = len(widths)

        self.time_mlp = nn.Sequential(
            nn.Linear(config.time_dim, emb_dim),
            nn.SiLU(),
            nn.Linear(emb_dim, emb_dim),
        )
        self.null_embedding = nn.Parameter(torch.zeros(emb_dim))
        self.in_conv = nn.Conv2d(2 * config.channels, widths[0], 3, padding=1)

        self.down_blocks = nn.ModuleList()
        self.downsamples = nn.ModuleList()
        prev = widths[0]
        for i, width in enumerate(widths):
            self.down_blocks.append(ResBlock(prev, width, emb_dim, groups))
            if i < self.levels - 1:
                self.downsamples.append(nn.Conv2d(width, width, 3, stride=2, padding=1))
            prev = width

        self.mid = nn.ModuleList([ResBlock(prev, prev, emb_dim, groups), ResBlock(prev, prev, emb_dim, groups)])

        self.up_blocks = nn.ModuleList()
        self.upsamples = nn.ModuleList()
        for i in range(self.levels - 1):
            self.upsamples.append(nn.Conv2d(widths[i + 1], widths[i + 1], 3, padding=1))
        for i, width in enumerate(widths):
            incoming = widths[i + 1] if i < self.levels - 1 else widths[-1]
            self.up_blocks.append(ResBlock(incoming + width, width, emb_dim, groups))

        self.out_norm = _norm(widths[0], groups)
        self.out_conv = nn.Conv2d(widths[0], config.channels, 3, padding=1)

    @property
    def multiple(self) -> int:
        return 2 ** (self.levels - 1)

    def forward(
        self,
        x_t: torch.Tensor,
        t: torch.Tensor,
        cond: torch.Tensor,
        null_mask: torch.Tensor,
    ) -> torch.Tensor:
        expected = (self.config.channels, self.config.height, self.config.width)
        if tuple(x_t.shape[1:]) != expected or x_t.shape != cond.shape:
            raise ShapeMismatch(f"Denoiser expects (B, {expected}), got {tuple(x_t.shape)} / {tuple(cond.shape)}")

        height, width = x_t.shape[-2:]
        pad_h = -height % self.multiple
        pad_w = -width % self.multiple
        x = torch.cat([x_t, cond], dim=1)
        if pad_h or pad_w:
            x = F.pad(x, (0, pad_w, 0, pad_h))

        emb = self.time_mlp(timestep_embedding(t, self.config.time_dim).to(x_t.dtype))
        emb = emb + null_mask.to(emb.dtype)[:, None] * self.null_embedding[None, :]

        h = self.in_conv(x)
        skips: List[torch.Tensor] = []
        for i, block in enumerate(self.down_blocks):
            h = block(h, emb)
            skips.append(h)
            if i < self.levels - 1:
                h = self.downsamples[i](h)

        for block in self.mid:
            h = block(h, emb)

        for i in reversed(range(self.levels)):
            if i < self.levels - 1:
                h = self.upsamples[i](F.interpolate(h, scale_factor=2, mode="nearest"))
            h = self.up_blocks[i](torch.cat([h, skips[i]], dim=1), emb)

        out = self.out_conv(F.silu(self.out_norm(h)))
        return out[:, :, :height, :width]


def parameter_count(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())
