import itertools

import numpy as np
import pytest

from gridflow.core.exceptions import InvalidLevel
from gridflow.core.levels import PUBLISHED_TEST_LEVELS, PUBLISHED_TRAIN_COUNTS, VSP_LEVELS, format_level
from gridflow.core.manifest import MANIFEST_NAME, read_manifest
from gridflow.flow.trainer import train
from gridflow.oracle import count_solutions
from gridflow.oracle.paths import step_function
from gridflow.schemas import ALL_WALLS, MOVE_DELTAS, GenConfig, Move, TaskKind, Tour, TrainConfig, TspPayload
from gridflow.tasks import GENERATORS, gen_jigsaw, gen_maze, gen_sudoku, gen_tsp, gen_vsp, generate
from gridflow.tasks.dataset import TEST_SEED_BASE, _alternate_seed, gen_dataset, gen_suite, generate_records, payload_digest
from gridflow.tasks.tsp import MIN_CITY_DISTANCE, TspGenerator

from conftest import SMALL_LEVELS


@pytest.mark.parametrize("kind", list(TaskKind))
def test_generation_is_deterministic(kind):
    level = SMALL_LEVELS[kind]
    first = generate(kind, level, 11)
    second = generate(kind, level, 11)
    assert first == second
    assert first[0].id == f"{kind.value}-{first[0].level_token}-11"


@pytest.mark.parametrize("kind", list(TaskKind))
def test_different_seeds_differ(kind):
    level = SMALL_LEVELS[kind]
    payloads = {payload_digest(generate(kind, level, seed)[0].payload) for seed in range(5)}
    assert len(payloads) > 1


class TestVsp:
    def test_hole_count_and_quadrant(self):
        for seed in range(10):
            instance, _ = gen_vsp(seed, 6)
            payload = instance.payload
            holes = sum(sum(row) for row in payload.holes)
            assert 3 <= holes <= 12
            assert payload.start[0] < 3 and payload.start[1] < 3
            assert payload.start != payload.goal

    def test_solution_reaches_goal(self, small_instances):
        for instance, solution in small_instances[TaskKind.VSP]:
            step = step_function(instance.payload)
            cell = tuple(instance.payload.start)
            for move in solution.moves:
                cell = step(cell, move)
                assert cell is not None
            assert cell == tuple(instance.payload.goal)

    def test_custom_density(self):
        instance, _ = gen_vsp(0, 8, hole_density=0.0)
        assert not any(any(row) for row in instance.payload.holes)

    def test_hole_count_varies_on_small_grids(self):
        counts = {sum(sum(row) for row in gen_vsp(seed, 3)[0].payload.holes) for seed in range(40)}
        assert counts == {1, 2, 3}

    @pytest.mark.parametrize("level", [1, 33])
    def test_invalid_size(self, level):
        with pytest.raises(InvalidLevel):
            gen_vsp(0, level)


class TestMaze:
    def _passages(self, payload):
        step = step_function(payload)
        count = 0
        for r, c in itertools.product(range(payload.size), repeat=2):
            for move in (Move.R, Move.D):
                if step((r, c), move) is not None:
                    count += 1
        return count

    def test_spanning_tree(self):
        for seed in range(5):
            instance, _ = gen_maze(seed, 8)
            payload = instance.payload
            assert self._passages(payload) == 8 * 8 - 1
            assert all(bits != ALL_WALLS for row in payload.walls for bits in row)

    def test_walls_are_symmetric(self):
        instance, _ = gen_maze(3, 8)
        payload = instance.payload
        step = step_function(payload)
        for r, c in itertools.product(range(8), repeat=2):
            for move, back in ((Move.R, Move.L), (Move.D, Move.U)):
                nxt = step((r, c), move)
                if nxt is not None:
                    assert step(nxt, back) == (r, c)

    def test_start_goal_separation(self):
        for seed in range(10):
            instance, solution = gen_maze(seed, 8)
            (sr, sc), (gr, gc) = instance.payload.start, instance.payload.goal
            assert abs(sr - gr) + abs(sc - gc) >= 8
            assert len(solution.moves) >= 8

    def test_invalid_size(self):
        with pytest.raises(InvalidLevel):
            gen_maze(0, 1)


class TestTsp:
    def test_minimum_city_distance(self):
        instance, tour = gen_tsp(4, 12)
        cities = np.asarray(instance.payload.cities)
        gaps = np.hypot(*(cities[:, None, :] - cities[None, :, :]).transpose(2, 0, 1))
        np.fill_diagonal(gaps, np.inf)
        assert gaps.min() >= MIN_CITY_DISTANCE
        assert ((cities >= 0) & (cities <= 1)).all()
        assert tour.order[0] == 0
        assert sorted(tour.order) == list(range(12))

    @pytest.mark.parametrize("level", [2, 21])
    def test_invalid_count(self, level):
        with pytest.raises(InvalidLevel):
            gen_tsp(0, level)

    def test_generated_tours_are_legible(self):
        generator = TspGenerator()
        for seed in range(3):
            instance, tour = generator.generate(seed, 12)
            assert generator.legible(instance, tour)

    def test_edge_through_a_city_is_illegible(self):
        generator = TspGenerator()
        square = TspPayload(cities=[(0.2, 0.2), (0.8, 0.2), (0.8, 0.8), (0.2, 0.8)], start=0)
        assert generator.legible(generator.make_instance(0, 4, square), Tour(order=[0, 1, 2, 3]))
        # 0-1-2 on one line reads as an extra 0-2 edge.
        collinear = TspPayload(cities=[(0.1, 0.5), (0.5, 0.5), (0.9, 0.5), (0.5, 0.9)], start=0)
        assert not generator.legible(generator.make_instance(0, 4, collinear), Tour(order=[0, 1, 2, 3]))


class TestSudoku:
    def test_clue_count_and_uniqueness(self):
        for seed in range(3):
            instance, solution = gen_sudoku(seed, 35)
            puzzle = instance.payload.puzzle
            assert instance.payload.clues == 35
            assert count_solutions(puzzle) == 1
            assert all(given in (0, digit) for given, digit in zip(puzzle, solution.digits))

    @pytest.mark.slow
    @pytest.mark.parametrize("clues", [30, 35, 40, 45])
    def test_every_published_clue_level_is_unique(self, clues):
        for seed in range(100):
            instance, solution = gen_sudoku(seed, clues)
            assert instance.payload.clues == clues
            assert count_solutions(instance.payload.puzzle) == 1

    @pytest.mark.parametrize("level", [16, 81])
    def test_invalid_clues(self, level):
        with pytest.raises(InvalidLevel):
            gen_sudoku(0, level)


class TestJigsaw:
    def test_shuffle_is_not_identity(self):
        for seed in range(20):
            instance, solution = gen_jigsaw(seed, (1, 2))
            assert instance.payload.shuffle == [1, 0]
            assert solution.mapping == [1, 0]

    def test_solution_inverts_shuffle(self):
        instance, solution = gen_jigsaw(5, (3, 3))
        shuffle = instance.payload.shuffle
        assert [shuffle[solution.mapping[slot]] for slot in range(9)] == list(range(9))

    @pytest.mark.parametrize("level", [(1, 1), (5, 5), (0, 3)])
    def test_invalid_layout(self, level):
        with pytest.raises(InvalidLevel):
            gen_jigsaw(0, level)


def test_registry_covers_every_kind():
    assert set(GENERATORS) == set(TaskKind)


class TestDataset:
    def test_manifest_and_images(self, vsp_dataset):
        records = read_manifest(vsp_dataset / MANIFEST_NAME)
        assert len(records) == 8
        assert len({r.id for r in records}) == 8
        assert len({payload_digest(r.payload) for r in records}) == 8
        for record in records:
            assert (vsp_dataset / record.input_png_path).is_file()
            assert (vsp_dataset / record.target_png_path).is_file()
            assert record.level == 3

    def test_rerun_is_byte_identical(self, tmp_path):
        config = GenConfig(kind=TaskKind.SUDOKU, level=45, count=2, base_seed=1)
        gen_dataset(config, tmp_path / "a")
        gen_dataset(config, tmp_path / "b")
        for name in (MANIFEST_NAME, "inputs", "targets"):
            a, b = tmp_path / "a" / name, tmp_path / "b" / name
            if a.is_file():
                assert a.read_bytes() == b.read_bytes()
            else:
                files = sorted(p.name for p in a.iterdir())
                assert files == sorted(p.name for p in b.iterdir())
                for f in files:
                    assert (a / f).read_bytes() == (b / f).read_bytes()

    def test_parallel_matches_serial(self, tmp_path):
        config = GenConfig(kind=TaskKind.JIGSAW, level=(2, 2), count=3, base_seed=0)
        gen_dataset(config, tmp_path / "serial", jobs=1)
        gen_dataset(config, tmp_path / "parallel", jobs=2)
        serial = (tmp_path / "serial" / MANIFEST_NAME).read_bytes()
        assert serial == (tmp_path / "parallel" / MANIFEST_NAME).read_bytes()

    def test_level_outside_published_grid_is_rejected(self):
        with pytest.raises(ValueError):
            GenConfig(kind=TaskKind.TSP, level=7)

    @pytest.mark.parametrize("seed", [0, 5, TEST_SEED_BASE - 1, TEST_SEED_BASE, TEST_SEED_BASE + 9])
    def test_alternate_seeds_stay_in_their_band(self, seed):
        for attempt in range(1, 20):
            alt = _alternate_seed(seed, attempt)
            assert (alt >= TEST_SEED_BASE) == (seed >= TEST_SEED_BASE)
            assert alt < 2 * TEST_SEED_BASE

    def test_three_by_three_vsp_fills_train_and_test(self, tmp_path):
        seen = {}
        train_records = generate_records(GenConfig(kind=TaskKind.VSP, level=3, count=500), tmp_path / "train", seen=seen)
        test_records = generate_records(
            GenConfig(kind=TaskKind.VSP, level=3, count=100, base_seed=TEST_SEED_BASE), tmp_path / "test", seen=seen
        )
        assert len(train_records) == 500 and len(test_records) == 100
        assert len(seen) == 600
        assert all(r.seed < TEST_SEED_BASE for r in train_records)
        assert all(r.seed >= TEST_SEED_BASE for r in test_records)

    @pytest.mark.slow
    @pytest.mark.parametrize(
        "kind,level",
        [(TaskKind(kind), level) for kind, counts in PUBLISHED_TRAIN_COUNTS.items() for level in counts],
    )
    def test_every_published_train_count_generates(self, tmp_path, kind, level):
        count = PUBLISHED_TRAIN_COUNTS[kind.value][level]
        records = gen_dataset(GenConfig(kind=kind, level=level, count=count), tmp_path, jobs=4)
        assert len(records) == count
        assert len({payload_digest(r.payload) for r in records}) == count


TINY_TRAIN = TrainConfig(steps=1, batch_size=1, base_width=8, channel_mults=(1, 2), time_dim=16, groups=4, log_every=1)


class TestSuite:
    def test_vsp_suite_has_one_train_manifest_per_shape(self, tmp_path, spec):
        splits = gen_suite(TaskKind.VSP, tmp_path, spec, scale=0.0002, test_count=1)
        shapes = {f"train/{s}x{s}" for s in (50, 66, 82, 98, 258, 514)}
        tests = {f"test/{format_level(level)}" for level in VSP_LEVELS}
        assert set(splits) == shapes | tests
        for name, records in splits.items():
            on_disk = read_manifest(tmp_path / name / MANIFEST_NAME)
            assert [r.id for r in on_disk] == [r.id for r in records]
        assert all(r.seed >= TEST_SEED_BASE for name in tests for r in splits[name])

    def test_suite_train_manifest_feeds_training(self, tmp_path, spec):
        gen_suite(TaskKind.VSP, tmp_path / "data", spec, scale=0.0002, test_count=1)
        checkpoint = train(TINY_TRAIN, tmp_path / "data" / "train" / "50x50", tmp_path / "run", spec)
        assert checkpoint.step == 1
        assert (checkpoint.denoiser.height, checkpoint.denoiser.width) == (50, 50)

    def test_sudoku_levels_share_one_train_manifest(self, tmp_path, spec):
        splits = gen_suite(TaskKind.SUDOKU, tmp_path / "data", spec, scale=0.0002, test_count=1)
        train_names = [name for name in splits if name.startswith("train/")]
        assert train_names == ["train/290x290"]
        assert sorted(r.level for r in splits["train/290x290"]) == sorted(PUBLISHED_TRAIN_COUNTS["sudoku"])
        assert {name for name in splits if name.startswith("test/")} == {
            f"test/{level}" for level in PUBLISHED_TEST_LEVELS["sudoku"]
        }
        checkpoint = train(TINY_TRAIN, tmp_path / "data" / "train" / "290x290", tmp_path / "run", spec)
        assert checkpoint.step == 1
