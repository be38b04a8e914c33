"""
Interchangeable samplers: the trained flow model and three stubs used to
check the evaluation pipeline independently of any model.
"""

from typing import Optional, Protocol, Tuple

import torch

from gridflow.core.exceptions import KindMismatch
from gridflow.core.raster import RasterImage
from gridflow.core.rng import split_rng
from gridflow.flow.checkpoint import DenoiserCheckpoint
from gridflow.flow.codec import IDENTITY_CODEC, Codec, encode_condition
from gridflow.oracle.verify import ground_truth
from gridflow.render.renderer import render_solution
from gridflow.render.spec import DEFAULT_SPEC, RenderSpec
from gridflow.sampler.euler import Trajectory, euler_sample
from gridflow.schemas import SampleConfig, TaskInstance

SampleResult = Tuple[RasterImage, Optional[Trajectory]]


class Sampler(Protocol):
    name: str

    def sample(self, instance: TaskInstance, input_image: RasterImage, seed: int) -> SampleResult: ...


class FlowSampler:
    """Euler/CFG sampling from a checkpoint. Counts denoiser evaluations."""

    name = "flow"

    def __init__(
        self,
        checkpoint: DenoiserCheckpoint,
        config: SampleConfig,
        use_ema: bool = True,
        codec: Codec = IDENTITY_CODEC,
    ):
        self.checkpoint = checkpoint
        self.config = config
        self.codec = codec
        self.model = checkpoint.build_model(use_ema=use_ema)
        self.evaluations = 0

    @property
    def image_shape(self) -> Tuple[int, int]:
        return (self.checkpoint.denoiser.height, self.checkpoint.denoiser.width)

    def with_config(self, **updates) -> "FlowSampler":
        """Same weights, different sampling settings."""
        other = object.__new__(FlowSampler)
        other.__dict__.update(self.__dict__)
        other.config = self.config.model_copy(update=updates)
        other.evaluations = 0
        return other

    def _velocity(self, x_t, t, cond, null_mask):
        self.evaluations += 1
        return self.model(x_t, t, cond, null_mask)

    def sample(self, instance: TaskInstance, input_image: RasterImage, seed: int) -> SampleResult:
        if instance.kind != self.checkpoint.kind:
            raise KindMismatch(self.checkpoint.kind.value, instance.kind.value)
        condition = encode_condition(input_image, self.image_shape, self.codec)
        config = self.config.model_copy(update={"seed": seed})
        with torch.no_grad():
            return euler_sample(self._velocity, condition, config, self.codec, stream=f"euler-{instance.id}")


class OracleStub:
    """Renders the ground-truth solution: a perfect sampler."""

    name = "oracle"

    def __init__(self, spec: RenderSpec = DEFAULT_SPEC):
        self.spec = spec

    def sample(self, instance: TaskInstance, input_image: RasterImage, seed: int) -> SampleResult:
        return render_solution(instance, ground_truth(instance), self.spec), None


class BlankStub:
    """Always returns an all-white image of the right size."""

    name = "blank"

    def __init__(self, spec: RenderSpec = DEFAULT_SPEC):
        self.spec = spec

    def sample(self, instance: TaskInstance, input_image: RasterImage, seed: int) -> SampleResult:
        height, width = self.spec.image_shape(instance.kind, instance.level)
        return RasterImage.blank(height, width, self.spec.palette.background), None


class NoisyStub:
    """Ground truth with probability p per draw, blank otherwise; the coin is keyed by (seed, instance id)."""

    def __init__(self, p: float, spec: RenderSpec = DEFAULT_SPEC):
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        self.p = p
        self.oracle = OracleStub(spec)
        self.blank = BlankStub(spec)
        self.name = f"noisy({p:g})"

    def sample(self, instance: TaskInstance, input_image: RasterImage, seed: int) -> SampleResult:
        if split_rng(seed, f"noisy-{instance.id}").random() < self.p:
            return self.oracle.sample(instance, input_image, seed)
        return self.blank.sample(instance, input_image, seed)


def parse_stub(text: str, spec: RenderSpec = DEFAULT_SPEC):
    """'oracle', 'blank' or 'noisy(p)'."""
    text = text.strip().lower()
    if text == "oracle":
        return OracleStub(spec)
    if text == "blank":
        return BlankStub(spec)
    if text.startswith("noisy(") and text.endswith(")"):
        return NoisyStub(float(text[len("noisy("):-1]), spec)
    raise ValueError(f"Unknown stub {text!r}; expected oracle, blank or noisy(p)")
