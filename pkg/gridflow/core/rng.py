"""
Deterministic, splittable random streams.

Every stream is a Philox counter-based generator keyed by a hash of
(seed, label), so any worker can open any stream without coordination.
"""

import hashlib

import numpy as np
import torch

SEED_MASK = (1 << 64) - 1


def stream_key(seed: int, stream_label: str) -> int:
    """128-bit Philox key for (seed, label)."""
    digest = hashlib.blake2b(
        (seed & SEED_MASK).to_bytes(8, "little") + stream_label.encode("utf-8"),
        digest_size=16,
        person=b"gridflow-rng",
    ).digest()
    return int.from_bytes(digest, "little")


def split_rng(seed: int, stream_label: str) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=stream_key(seed, stream_label)))


def derive_seed(seed: int, stream_label: str) -> int:
    """A 63-bit integer seed derived from (seed, label), for APIs that take plain ints."""
    return stream_key(seed, stream_label) & ((1 << 63) - 1)


def torch_generator(seed: int, stream_label: str) -> torch.Generator:
    generator = torch.Generator(device="cpu")
    generator.manual_seed(derive_seed(seed, stream_label))
    return generator


def state_digest(generator: torch.Generator) -> str:
    return hashlib.sha256(generator.get_state().numpy().tobytes()).hexdigest()
