import numpy as np
import pytest
import torch

from gridflow.core.raster import RasterImage
from gridflow.flow.checkpoint import DenoiserCheckpoint, state_to_arrays
from gridflow.flow.model import Denoiser
from gridflow.render.spec import DEFAULT_SPEC
from gridflow.schemas import DenoiserConfig, GenConfig, TaskKind, TrainConfig
from gridflow.tasks import generate
from gridflow.tasks.dataset import gen_dataset

# One cheap level per kind for fast tests.
SMALL_LEVELS = {
    TaskKind.VSP: 4,
    TaskKind.MAZE: 8,
    TaskKind.TSP: 7,
    TaskKind.SUDOKU: 40,
    TaskKind.JIGSAW: (2, 2),
}

# Published levels with cheap generation, for datasets built through GenConfig.
DATASET_LEVELS = {
    TaskKind.VSP: 3,
    TaskKind.MAZE: 8,
    TaskKind.TSP: 12,
    TaskKind.SUDOKU: 45,
    TaskKind.JIGSAW: (2, 2),
}


@pytest.fixture(scope="session")
def spec():
    return DEFAULT_SPEC


@pytest.fixture(scope="session")
def small_instances():
    """kind -> list of (instance, solution) for seeds 0..2."""
    return {kind: [generate(kind, level, seed) for seed in range(3)] for kind, level in SMALL_LEVELS.items()}


@pytest.fixture(scope="session")
def vsp_dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("vsp3")
    gen_dataset(GenConfig(kind=TaskKind.VSP, level=3, count=8, base_seed=0), out)
    return out


@pytest.fixture(scope="session")
def datasets(tmp_path_factory):
    """kind -> small dataset directory at a published level."""
    out = {}
    for kind, level in DATASET_LEVELS.items():
        path = tmp_path_factory.mktemp(f"data-{kind.value}")
        gen_dataset(GenConfig(kind=kind, level=level, count=3, base_seed=7), path)
        out[kind] = path
    return out


@pytest.fixture
def tiny_train_config():
    return TrainConfig(
        batch_size=2,
        steps=4,
        base_width=8,
        channel_mults=(1, 2),
        time_dim=16,
        groups=4,
        checkpoint_every=2,
        log_every=1,
        seed=3,
    )


def add_noise(image: RasterImage, amplitude: int, seed: int) -> RasterImage:
    rng = np.random.default_rng(seed)
    noise = rng.integers(-amplitude, amplitude + 1, size=image.array.shape)
    return RasterImage(np.clip(image.array.astype(np.int32) + noise, 0, 255).astype(np.uint8))


@pytest.fixture(scope="session")
def tiny_checkpoint(spec):
    """Untrained VSP-3 denoiser; enough to exercise sampling plumbing."""
    config = DenoiserConfig(height=50, width=50, base_width=8, channel_mults=(1, 2), time_dim=16, groups=4)
    torch.manual_seed(0)
    model = Denoiser(config)
    arrays = state_to_arrays(model)
    return DenoiserCheckpoint(
        kind=TaskKind.VSP,
        denoiser=config,
        render=spec,
        train=TrainConfig(base_width=8, channel_mults=(1, 2), time_dim=16, groups=4),
        step=0,
        model_state=arrays,
        ema_state={k: v.copy() for k, v in arrays.items()},
    )
