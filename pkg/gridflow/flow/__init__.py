from .checkpoint import DenoiserCheckpoint
from .codec import IDENTITY_CODEC, Codec, Condition, IdentityCodec, encode_condition, null_condition
from .matching import fm_loss, flow_mse, interpolate, sample_flow_batch, sample_timestep, target_velocity
from .model import Denoiser
from .trainer import train

__all__ = [
    "Codec",
    "IdentityCodec",
    "IDENTITY_CODEC",
    "Condition",
    "encode_condition",
    "null_condition",
    "interpolate",
    "target_velocity",
    "sample_timestep",
    "sample_flow_batch",
    "flow_mse",
    "fm_loss",
    "Denoiser",
    "DenoiserCheckpoint",
    "train",
]
