from enum import Enum
from typing import Annotated, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from gridflow.core.levels import Level, format_level, is_published_level

Cell = Tuple[int, int]


class TaskKind(str, Enum):
    VSP = "vsp"
    MAZE = "maze"
    TSP = "tsp"
    SUDOKU = "sudoku"
    JIGSAW = "jigsaw"


class Move(str, Enum):
    U = "U"
    D = "D"
    L = "L"
    R = "R"


MOVE_DELTAS = {Move.U: (-1, 0), Move.D: (1, 0), Move.L: (0, -1), Move.R: (0, 1)}


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


# --- Instance payloads ---

class VspPayload(_Frozen):
    kind: Literal["vsp"] = "vsp"
    size: int = Field(..., ge=2, description="Grid side length")
    holes: List[List[bool]] = Field(..., description="Row-major hole mask")
    start: Cell
    goal: Cell

    @model_validator(mode="after")
    def check_grid(self):
        if len(self.holes) != self.size or any(len(row) != self.size for row in self.holes):
            raise ValueError("hole mask must be size x size")
        if self.start == self.goal:
            raise ValueError("start and goal must differ")
        for r, c in (self.start, self.goal):
            if self.holes[r][c]:
                raise ValueError("start and goal must be ice")
        return self


# Maze wall bits: set bit = wall present on that side of the cell.
WALL_N, WALL_E, WALL_S, WALL_W = 1, 2, 4, 8
ALL_WALLS = WALL_N | WALL_E | WALL_S | WALL_W
MOVE_WALLS = {Move.U: WALL_N, Move.R: WALL_E, Move.D: WALL_S, Move.L: WALL_W}


class MazePayload(_Frozen):
    kind: Literal["maze"] = "maze"
    size: int = Field(..., ge=2)
    walls: List[List[int]] = Field(..., description="Per-cell wall bitmask (N=1, E=2, S=4, W=8)")
    start: Cell
    goal: Cell

    @model_validator(mode="after")
    def check_grid(self):
        if len(self.walls) != self.size or any(len(row) != self.size for row in self.walls):
            raise ValueError("wall grid must be size x size")
        if self.start == self.goal:
            raise ValueError("start and goal must differ")
        return self


class TspPayload(_Frozen):
    kind: Literal["tsp"] = "tsp"
    cities: List[Tuple[float, float]] = Field(..., min_length=3, description="Coordinates in [0,1]^2")
    start: int = 0

    @model_validator(mode="after")
    def check_cities(self):
        if not 0 <= self.start < len(self.cities):
            raise ValueError("start index out of range")
        if len(set(self.cities)) != len(self.cities):
            raise ValueError("city coordinates must be pairwise distinct")
        return self


class SudokuPayload(_Frozen):
    kind: Literal["sudoku"] = "sudoku"
    puzzle: List[int] = Field(..., min_length=81, max_length=81, description="Row-major digits, 0 = blank")

    @field_validator("puzzle")
    def check_digits(cls, v):
        if any(d < 0 or d > 9 for d in v):
            raise ValueError("digits must lie in 0..9")
        return v

    @property
    def clues(self) -> int:
        return sum(1 for d in self.puzzle if d)


class JigsawPayload(_Frozen):
    kind: Literal["jigsaw"] = "jigsaw"
    rows: int = Field(..., ge=1, le=4)
    cols: int = Field(..., ge=1, le=4)
    shuffle: List[int] = Field(..., description="shuffle[slot] = source patch shown in that input slot")
    texture_seed: int = Field(..., ge=0)

    @model_validator(mode="after")
    def check_shuffle(self):
        if sorted(self.shuffle) != list(range(self.rows * self.cols)):
            raise ValueError("shuffle must be a permutation of the patch indices")
        return self


Payload = Annotated[
    Union[VspPayload, MazePayload, TspPayload, SudokuPayload, JigsawPayload],
    Field(discriminator="kind"),
]


class TaskInstance(_Frozen):
    id: str = Field(..., min_length=1)
    kind: TaskKind
    level: Level
    seed: int = Field(..., ge=0, lt=1 << 64)
    payload: Payload

    @model_validator(mode="after")
    def check_kind(self):
        if self.payload.kind != self.kind.value:
            raise ValueError(f"payload kind {self.payload.kind} does not match {self.kind.value}")
        return self

    @property
    def level_token(self) -> str:
        return format_level(self.level)


# --- Solutions ---

class ActionSequence(_Frozen):
    type: Literal["actions"] = "actions"
    moves: List[Move] = Field(default_factory=list)


class Tour(_Frozen):
    type: Literal["tour"] = "tour"
    order: List[int] = Field(..., description="City indices, starting at the start city, not closed")


class SudokuGrid(_Frozen):
    type: Literal["sudoku"] = "sudoku"
    digits: List[int] = Field(..., min_length=81, max_length=81)

    @field_validator("digits")
    def check_digits(cls, v):
        if any(d < 1 or d > 9 for d in v):
            raise ValueError("solution digits must lie in 1..9")
        return v


class Permutation(_Frozen):
    type: Literal["permutation"] = "permutation"
    mapping: List[int] = Field(..., description="mapping[board slot] = input piece placed there")
    low_confidence: bool = False

    @field_validator("mapping")
    def check_bijective(cls, v):
        if sorted(v) != list(range(len(v))):
            raise ValueError("mapping must be bijective")
        return v


SymbolicSolution = Annotated[
    Union[ActionSequence, Tour, SudokuGrid, Permutation],
    Field(discriminator="type"),
]

SOLUTION_TYPES = {
    TaskKind.VSP: ActionSequence,
    TaskKind.MAZE: ActionSequence,
    TaskKind.TSP: Tour,
    TaskKind.SUDOKU: SudokuGrid,
    TaskKind.JIGSAW: Permutation,
}


class ManifestRecord(_Frozen):
    id: str = Field(..., min_length=1)
    kind: TaskKind
    level: Level
    seed: int = Field(..., ge=0, lt=1 << 64)
    input_png_path: str
    target_png_path: str
    solution: SymbolicSolution
    payload: Payload

    def to_instance(self) -> TaskInstance:
        return TaskInstance(id=self.id, kind=self.kind, level=self.level, seed=self.seed, payload=self.payload)


class Verdict(_Frozen):
    correct: bool
    partial_reward: float = Field(..., ge=0.0, le=1.0)
    reason: str = ""

    @model_validator(mode="after")
    def check_reward(self):
        if self.correct and self.partial_reward != 1.0:
            raise ValueError("a correct verdict carries reward 1.0")
        return self


# --- Configuration ---

class GenConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: TaskKind = TaskKind.VSP
    level: Level = 3
    count: int = Field(100, ge=1, description="Number of instances to generate")
    base_seed: int = Field(0, ge=0, lt=1 << 64)

    @model_validator(mode="after")
    def check_level(self):
        if isinstance(self.level, list):
            self.level = tuple(self.level)
        if not is_published_level(self.kind.value, self.level):
            raise ValueError(f"level {format_level(self.level)} is not admissible for {self.kind.value}")
        return self


class DenoiserConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    height: int = Field(..., ge=1)
    width: int = Field(..., ge=1)
    channels: int = 3
    base_width: int = Field(64, ge=1)
    channel_mults: Tuple[int, ...] = (1, 2, 4)
    time_dim: int = Field(128, ge=2)
    groups: int = Field(8, ge=1)

    @field_validator("time_dim")
    def check_even(cls, v):
        if v % 2:
            raise ValueError("time_dim must be even")
        return v


class TrainConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    batch_size: int = Field(8, ge=1)
    learning_rate: float = Field(1e-4, gt=0)
    steps: Optional[int] = Field(None, ge=1, description="Overrides epochs when set")
    epochs: int = Field(5, ge=1)
    p_uncond: float = Field(0.1, ge=0.0, lt=1.0, description="Condition dropout probability")
    logit_mean: float = 0.0
    logit_std: float = Field(1.0, gt=0.0)
    ema_decay: float = Field(0.999, ge=0.0, le=1.0)
    seed: int = Field(0, ge=0)
    base_width: int = Field(64, ge=1)
    channel_mults: Tuple[int, ...] = (1, 2, 4)
    time_dim: int = Field(128, ge=2)
    groups: int = Field(8, ge=1)
    checkpoint_every: int = Field(500, ge=1)
    log_every: int = Field(50, ge=1)
    smoothing: float = Field(0.98, ge=0.0, lt=1.0, description="Smoothing factor of the ema_loss column")
    device: str = Field("cpu", description="torch device for parameters and batches")

    def total_steps(self, n_samples: int) -> int:
        if self.steps is not None:
            return self.steps
        per_epoch = -(-n_samples // self.batch_size)
        return max(1, per_epoch * self.epochs)


class SampleConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    steps: int = Field(20, ge=1, description="Euler steps T")
    cfg_scale: float = Field(4.0, ge=0.0, description="Guidance scale w")
    seed: int = Field(0, ge=0)
    record_trajectory: bool = False
    strict: bool = Field(False, description="Require shortest VSP paths")


class EvalConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    best_of_n: List[int] = Field(default_factory=lambda: [1, 2, 4, 8])
    steps_list: List[int] = Field(default_factory=lambda: [5, 10, 20, 30, 40])
    cfg_list: List[float] = Field(default_factory=lambda: [1, 2, 3, 4, 5, 6, 7])
    sizes_list: List[int] = Field(default_factory=lambda: [64, 512, 4096])
    test_count: int = Field(100, ge=1)
    montage_instances: int = Field(4, ge=1)

    @field_validator("best_of_n", "steps_list", "sizes_list")
    def check_positive(cls, v):
        if not v or any(x < 1 for x in v):
            raise ValueError("values must be positive integers")
        return v

    @field_validator("cfg_list")
    def check_scales(cls, v):
        if not v or any(w < 0 for w in v):
            raise ValueError("guidance scales must be non-negative")
        return v


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    gen: GenConfig = Field(default_factory=GenConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    sample: SampleConfig = Field(default_factory=SampleConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)


# --- Reports ---

class EvalRow(BaseModel):
    kind: TaskKind
    level: Level
    n_samples: int
    accuracy: float = Field(..., ge=0.0, le=1.0)
    mean_reward: float = Field(..., ge=0.0, le=1.0)
    parse_error_rate: float = Field(..., ge=0.0, le=1.0)
    mean_wall_ms: float


class EvalReport(BaseModel):
    rows: List[EvalRow]
    steps: int
    cfg_scale: float
    checkpoint_id: str
    seed: int
    sampler: str
    verifier: str = "oracle"
