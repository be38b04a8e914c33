"""Euclidean TSP instances in the unit square, solved exactly."""

import numpy as np
import structlog

from gridflow.core.exceptions import GenerationStuck, InvalidLevel, ParseError
from gridflow.core.rng import split_rng
from gridflow.oracle.tsp import held_karp
from gridflow.parse.tour import parse_tour
from gridflow.render.renderer import render_solution
from gridflow.render.spec import DEFAULT_SPEC, RenderSpec
from gridflow.schemas import TaskKind, TspPayload
from gridflow.tasks.base import MAX_ATTEMPTS, Generated, TaskGenerator

logger = structlog.get_logger(__name__)

MIN_CITIES, MAX_CITIES = 3, 20
MIN_CITY_DISTANCE = 0.04
PLACEMENT_TRIES = 1000


def place_cities(n: int, rng, min_distance: float = MIN_CITY_DISTANCE):
    """Uniform points with a minimum pairwise distance, or None if placement stalls."""
    points = []
    while len(points) < n:
        for _ in range(PLACEMENT_TRIES):
            candidate = rng.random(2)
            if all(np.hypot(*(candidate - p)) >= min_distance for p in points):
                points.append(candidate)
                break
        else:
            return None
    return [(float(x), float(y)) for x, y in points]


class TspGenerator(TaskGenerator):
    kind = TaskKind.TSP

    def __init__(self, spec: RenderSpec = DEFAULT_SPEC):
        self.spec = spec

    def legible(self, instance, tour) -> bool:
        """The rendered optimal tour must parse back to itself."""
        try:
            image = render_solution(instance, tour, self.spec)
            return parse_tour(image, instance, self.spec).order == tour.order
        except ParseError:
            return False

    def generate(self, seed: int, level: int) -> Generated:
        n = int(level)
        if not MIN_CITIES <= n <= MAX_CITIES:
            raise InvalidLevel(self.kind.value, level)

        rng = split_rng(seed, "tsp")
        for attempt in range(1, MAX_ATTEMPTS + 1):
            cities = place_cities(n, rng)
            if cities is None:
                continue
            payload = TspPayload(cities=cities, start=0)
            instance = self.make_instance(seed, n, payload)
            tour = held_karp(cities, 0)
            if not self.legible(instance, tour):
                logger.debug("generation_resampled", kind=self.kind.value, seed=seed, attempt=attempt, reason="illegible")
                continue
            return instance, tour

        raise GenerationStuck(self.kind.value, seed, MAX_ATTEMPTS)


def gen_tsp(seed: int, n_cities: int, spec: RenderSpec = DEFAULT_SPEC) -> Generated:
    return TspGenerator(spec).generate(seed, n_cities)
