from .euler import Trajectory, cfg_velocity, estimate_x0, euler_sample, integrate
from .samplers import BlankStub, FlowSampler, NoisyStub, OracleStub, Sampler, parse_stub
from .trajectory import dump_trajectory, montage

__all__ = [
    "cfg_velocity",
    "estimate_x0",
    "integrate",
    "euler_sample",
    "Trajectory",
    "dump_trajectory",
    "montage",
    "Sampler",
    "FlowSampler",
    "OracleStub",
    "BlankStub",
    "NoisyStub",
    "parse_stub",
]
