"""Jigsaw instances: a procedural texture cut into a grid and shuffled."""

from gridflow.core.exceptions import InvalidLevel
from gridflow.core.rng import split_rng
from gridflow.schemas import JigsawPayload, Permutation, TaskKind
from gridflow.tasks.base import Generated, TaskGenerator

MAX_SIDE = 4


def invert(permutation):
    inverse = [0] * len(permutation)
    for index, value in enumerate(permutation):
        inverse[value] = index
    return inverse


class JigsawGenerator(TaskGenerator):
    kind = TaskKind.JIGSAW

    def generate(self, seed: int, level) -> Generated:
        rows, cols = (int(v) for v in level)
        if not (1 <= rows <= MAX_SIDE and 1 <= cols <= MAX_SIDE) or rows * cols < 2:
            raise InvalidLevel(self.kind.value, level)

        rng = split_rng(seed, "jigsaw")
        n = rows * cols
        identity = list(range(n))
        shuffle = identity
        while shuffle == identity:
            shuffle = [int(v) for v in rng.permutation(n)]
        texture_seed = int(rng.integers(0, 1 << 63))

        payload = JigsawPayload(rows=rows, cols=cols, shuffle=shuffle, texture_seed=texture_seed)
        # Input piece j shows source patch shuffle[j]; board slot s needs the piece showing patch s.
        solution = Permutation(mapping=invert(shuffle))
        return self.make_instance(seed, (rows, cols), payload), solution


def gen_jigsaw(seed: int, layout) -> Generated:
    return JigsawGenerator().generate(seed, layout)
