"""
Denoiser checkpoint file format (little-endian):

    magic     4 bytes  b"DFTK"
    version   u16
    config    u32 length + UTF-8 JSON (kind, denoiser, render, train)
    step      u64
    rng       u16 length + ASCII hex digest of the noise generator state
    arrays    u32 count, then per array:
                u16 name length + UTF-8 name
                u8 ndim, ndim x u32 dims
                float32 data, row-major

Raw weights are stored under "model.<name>", EMA shadows under "ema.<name>".
"""

import hashlib
import io
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Union

import numpy as np
import structlog
import torch

from gridflow.core.exceptions import CheckpointError
from gridflow.flow.model import Denoiser
from gridflow.render.spec import RenderSpec
from gridflow.schemas import DenoiserConfig, TaskKind, TrainConfig

logger = structlog.get_logger(__name__)

MAGIC = b"DFTK"
FORMAT_VERSION = 1

StateArrays = Dict[str, np.ndarray]


def state_to_arrays(module: torch.nn.Module) -> StateArrays:
    return {
        name: tensor.detach().to("cpu", torch.float32).numpy().copy()
        for name, tensor in module.state_dict().items()
    }


@dataclass
class DenoiserCheckpoint:
    kind: TaskKind
    denoiser: DenoiserConfig
    render: RenderSpec
    train: TrainConfig
    step: int = 0
    rng_digest: str = ""
    model_state: StateArrays = field(default_factory=dict)
    ema_state: StateArrays = field(default_factory=dict)

    def config_blob(self) -> dict:
        return {
            "kind": TaskKind(self.kind).value,
            "denoiser": self.denoiser.model_dump(mode="json"),
            "render": self.render.model_dump(mode="json"),
            "train": self.train.model_dump(mode="json"),
        }

    def to_bytes(self) -> bytes:
        out = io.BytesIO()
        out.write(MAGIC)
        out.write(struct.pack("<H", FORMAT_VERSION))
        config = json.dumps(self.config_blob(), sort_keys=True).encode("utf-8")
        out.write(struct.pack("<I", len(config)))
        out.write(config)
        out.write(struct.pack("<Q", self.step))
        digest = self.rng_digest.encode("ascii")
        out.write(struct.pack("<H", len(digest)))
        out.write(digest)

        arrays = [(f"model.{k}", v) for k, v in self.model_state.items()]
        arrays += [(f"ema.{k}", v) for k, v in self.ema_state.items()]
        out.write(struct.pack("<I", len(arrays)))
        for name, array in arrays:
            encoded = name.encode("utf-8")
            out.write(struct.pack("<H", len(encoded)))
            out.write(encoded)
            out.write(struct.pack("<B", array.ndim))
            out.write(struct.pack(f"<{array.ndim}I", *array.shape))
            out.write(np.ascontiguousarray(array, dtype="<f4").tobytes())
        return out.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "DenoiserCheckpoint":
        view = memoryview(data)
        pos = 0

        def take(n: int) -> memoryview:
            nonlocal pos
            if pos + n > len(view):
                raise CheckpointError("Checkpoint is truncated")
            chunk = view[pos:pos + n]
            pos += n
            return chunk

        def unpack(fmt: str):
            return struct.unpack(fmt, take(struct.calcsize(fmt)))

        if bytes(take(4)) != MAGIC:
            raise CheckpointError("Not a denoiser checkpoint (bad magic)")
        (version,) = unpack("<H")
        if version != FORMAT_VERSION:
            raise CheckpointError(f"Unsupported checkpoint version {version}, expected {FORMAT_VERSION}")
        (config_len,) = unpack("<I")
        try:
            blob = json.loads(bytes(take(config_len)).decode("utf-8"))
        except ValueError as e:
            raise CheckpointError(f"Checkpoint config is unreadable: {e}")
        (step,) = unpack("<Q")
        (digest_len,) = unpack("<H")
        digest = bytes(take(digest_len)).decode("ascii")

        model_state: StateArrays = {}
        ema_state: StateArrays = {}
        (count,) = unpack("<I")
        for _ in range(count):
            (name_len,) = unpack("<H")
            name = bytes(take(name_len)).decode("utf-8")
            (ndim,) = unpack("<B")
            shape = unpack(f"<{ndim}I") if ndim else ()
            size = int(np.prod(shape)) if shape else 1
            array = np.frombuffer(take(4 * size), dtype="<f4").astype(np.float32).reshape(shape)
            prefix, _, key = name.partition(".")
            if prefix == "model":
                model_state[key] = array
            elif prefix == "ema":
                ema_state[key] = array
            else:
                raise CheckpointError(f"Unknown array namespace in {name!r}")

        return cls(
            kind=TaskKind(blob["kind"]),
            denoiser=DenoiserConfig.model_validate(blob["denoiser"]),
            render=RenderSpec.model_validate(blob["render"]),
            train=TrainConfig.model_validate(blob["train"]),
            step=step,
            rng_digest=digest,
            model_state=model_state,
            ema_state=ema_state,
        )

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_bytes(self.to_bytes())
        tmp.replace(path)
        logger.info("checkpoint_saved", path=str(path), step=self.step)
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "DenoiserCheckpoint":
        path = Path(path)
        if not path.is_file():
            raise CheckpointError(f"Checkpoint not found: {path}")
        return cls.from_bytes(path.read_bytes())

    @property
    def checkpoint_id(self) -> str:
        return hashlib.sha256(self.to_bytes()).hexdigest()[:16]

    def build_model(self, use_ema: bool = True) -> Denoiser:
        """Instantiate the denoiser with stored weights, in eval mode."""
        state = self.ema_state if use_ema and self.ema_state else self.model_state
        model = Denoiser(self.denoiser)
        try:
            model.load_state_dict({k: torch.from_numpy(v.copy()) for k, v in state.items()})
        except RuntimeError as e:
            raise CheckpointError(f"Stored weights do not fit the stored config: {e}")
        model.eval()
        return model
