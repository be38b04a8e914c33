"""Training loop: flow-matching MSE, Adam, EMA shadow weights, CSV log, periodic checkpoints."""

import copy
import csv
import math
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import structlog
import torch
from torch.utils.data import Dataset

from gridflow.core.exceptions import ConfigError, ShapeMismatch, TrainingDiverged
from gridflow.core.manifest import read_manifest, resolve_image
from gridflow.core.rng import split_rng, state_digest, torch_generator
from gridflow.flow.checkpoint import DenoiserCheckpoint, state_to_arrays
from gridflow.flow.codec import IDENTITY_CODEC, Codec
from gridflow.flow.matching import flow_mse, sample_flow_batch
from gridflow.flow.model import Denoiser, parameter_count
from gridflow.render.png import read_png
from gridflow.render.spec import DEFAULT_SPEC, RenderSpec
from gridflow.schemas import DenoiserConfig, ManifestRecord, TrainConfig

logger = structlog.get_logger(__name__)

LOG_NAME = "train_log.csv"
CHECKPOINT_NAME = "checkpoint.dftk"


class ManifestImages(Dataset):
    """(target, condition) latent pairs, decoded from PNG on access."""

    def __init__(
        self,
        records: List[ManifestRecord],
        root: Path,
        spec: RenderSpec = DEFAULT_SPEC,
        codec: Codec = IDENTITY_CODEC,
    ):
        if not records:
            raise ConfigError("Training manifest is empty")
        kinds = {record.kind for record in records}
        if len(kinds) != 1:
            raise ConfigError(f"Training manifest mixes task kinds: {sorted(k.value for k in kinds)}")

        first = records[0]
        self.kind = first.kind
        self.shape = spec.image_shape(first.kind, first.level)
        for record in records:
            shape = spec.image_shape(record.kind, record.level)
            if shape != self.shape:
                raise ShapeMismatch(
                    f"Record {record.id} renders at {shape}, first record at {self.shape}"
                )
        self.records = records
        self.root = root
        self.codec = codec

    def __len__(self) -> int:
        return len(self.records)

    def _load(self, relative: str) -> torch.Tensor:
        image = read_png(resolve_image(self.root, relative))
        if image.shape != self.shape:
            raise ShapeMismatch(f"{relative} is {image.shape}, expected {self.shape}")
        return self.codec.encode(image)

    def __getitem__(self, index: int) -> Tuple[torch.Tensor, torch.Tensor]:
        record = self.records[index]
        return self._load(record.target_png_path), self._load(record.input_png_path)

    def batch(self, indices) -> Tuple[torch.Tensor, torch.Tensor]:
        pairs = [self[int(i)] for i in indices]
        return torch.stack([p[0] for p in pairs]), torch.stack([p[1] for p in pairs])


@torch.no_grad()
def update_ema(ema: torch.nn.Module, model: torch.nn.Module, decay: float) -> None:
    for shadow, param in zip(ema.parameters(), model.parameters()):
        shadow.mul_(decay).add_(param.detach(), alpha=1.0 - decay)


def denoiser_config(config: TrainConfig, shape: Tuple[int, int]) -> DenoiserConfig:
    return DenoiserConfig(
        height=shape[0],
        width=shape[1],
        base_width=config.base_width,
        channel_mults=config.channel_mults,
        time_dim=config.time_dim,
        groups=config.groups,
    )


def _batch_order(n: int, batch_size: int, rng: np.random.Generator):
    """Endless stream of index batches, reshuffled every epoch."""
    while True:
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            yield order[start:start + batch_size]


def _grad_norm(model: torch.nn.Module) -> float:
    total = 0.0
    for p in model.parameters():
        if p.grad is not None:
            total += float(p.grad.detach().pow(2).sum())
    return math.sqrt(total)


def train(
    config: TrainConfig,
    manifest: Union[str, Path],
    out_dir: Union[str, Path],
    spec: RenderSpec = DEFAULT_SPEC,
    codec: Codec = IDENTITY_CODEC,
    max_steps: Optional[int] = None,
) -> DenoiserCheckpoint:
    """
    Train a denoiser on every record of a manifest.

    Args:
        config: optimisation, schedule and architecture settings
        manifest: manifest file or dataset directory
        out_dir: receives train_log.csv, checkpoint_<step>.dftk and checkpoint.dftk
        spec: render parameters the dataset was generated with
        codec: pixel <-> latent mapping
        max_steps: hard cap on steps, overriding the schedule

    Returns:
        The final checkpoint, also written to out_dir/checkpoint.dftk
    """
    manifest = Path(manifest)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    records = read_manifest(manifest)
    data = ManifestImages(records, manifest, spec, codec)
    total_steps = config.total_steps(len(data))
    if max_steps is not None:
        total_steps = min(total_steps, max_steps)
    device = torch.device(config.device)

    torch.manual_seed(int(split_rng(config.seed, "init").integers(1 << 62)))
    model = Denoiser(denoiser_config(config, data.shape)).to(device)
    ema = copy.deepcopy(model).requires_grad_(False)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    noise = torch_generator(config.seed, "flow-noise")
    batches = _batch_order(len(data), config.batch_size, split_rng(config.seed, "batch-order"))

    logger.info(
        "training_started",
        kind=data.kind.value,
        samples=len(data),
        steps=total_steps,
        parameters=parameter_count(model),
        image_shape=list(data.shape),
    )

    def snapshot(step: int) -> DenoiserCheckpoint:
        return DenoiserCheckpoint(
            kind=data.kind,
            denoiser=model.config,
            render=spec,
            train=config,
            step=step,
            rng_digest=state_digest(noise),
            model_state=state_to_arrays(model),
            ema_state=state_to_arrays(ema),
        )

    smoothed = None
    model.train()
    with open(out_dir / LOG_NAME, "w", newline="", encoding="utf-8") as log_file:
        writer = csv.writer(log_file)
        writer.writerow(["step", "loss", "ema_loss"])

        for step in range(1, total_steps + 1):
            x0, cond = data.batch(next(batches))
            batch = sample_flow_batch(x0.to(device), cond.to(device), noise, config)
            loss = flow_mse(model, batch)
            optimizer.zero_grad(set_to_none=True)
            loss.backward()
            value = float(loss.detach())
            if not math.isfinite(value):
                raise TrainingDiverged(step, value, {
                    "grad_norm": _grad_norm(model),
                    "t_min": float(batch.t.min()),
                    "t_max": float(batch.t.max()),
                    "learning_rate": config.learning_rate,
                })
            optimizer.step()
            update_ema(ema, model, config.ema_decay)

            smoothed = value if smoothed is None else config.smoothing * smoothed + (1 - config.smoothing) * value
            writer.writerow([step, f"{value:.6f}", f"{smoothed:.6f}"])

            if step % config.log_every == 0 or step == total_steps:
                log_file.flush()
                logger.info("train_step", step=step, loss=round(value, 6), ema_loss=round(smoothed, 6))
            if step % config.checkpoint_every == 0 and step != total_steps:
                snapshot(step).save(out_dir / f"checkpoint_{step}.dftk")

    final = snapshot(total_steps)
    final.save(out_dir / CHECKPOINT_NAME)
    logger.info("training_finished", steps=total_steps, final_ema_loss=smoothed)
    return final


def read_loss_log(path: Union[str, Path]) -> List[Tuple[int, float, float]]:
    with open(path, newline="", encoding="utf-8") as handle:
        return [(int(r["step"]), float(r["loss"]), float(r["ema_loss"])) for r in csv.DictReader(handle)]
