import json

import numpy as np
import pytest

from gridflow.core.exceptions import (
    EXIT_FAILURE,
    EXIT_USAGE,
    ConfigError,
    DuplicateId,
    EmptyManifest,
    InvalidLevel,
    ManifestParseError,
    NoPath,
    ParseError,
    ShapeMismatch,
)
from gridflow.core.levels import PUBLISHED_LEVELS, TEST_SEED_BASE, format_level, is_published_level, parse_level
from gridflow.core.manifest import read_manifest, record_to_line, write_manifest
from gridflow.core.raster import RasterImage
from gridflow.core.rng import derive_seed, split_rng
from gridflow.schemas import GenConfig, ManifestRecord, TaskKind
from gridflow.tasks import generate


def _record(seed=0):
    instance, solution = generate(TaskKind.VSP, 3, seed)
    return ManifestRecord(
        id=instance.id,
        kind=instance.kind,
        level=instance.level,
        seed=instance.seed,
        input_png_path=f"inputs/{instance.id}.png",
        target_png_path=f"targets/{instance.id}.png",
        solution=solution,
        payload=instance.payload,
    )


class TestRng:
    def test_same_stream_same_draws(self):
        a = split_rng(42, "vsp").integers(0, 1 << 30, size=16)
        b = split_rng(42, "vsp").integers(0, 1 << 30, size=16)
        assert np.array_equal(a, b)

    def test_labels_and_seeds_separate_streams(self):
        base = split_rng(42, "vsp").integers(0, 1 << 30, size=16)
        assert not np.array_equal(base, split_rng(42, "maze").integers(0, 1 << 30, size=16))
        assert not np.array_equal(base, split_rng(43, "vsp").integers(0, 1 << 30, size=16))

    def test_derived_seed_fits_63_bits(self):
        for seed in (0, 1, (1 << 64) - 1):
            assert 0 <= derive_seed(seed, "x") < (1 << 63)


class TestLevels:
    def test_format_and_parse(self):
        assert format_level(8) == "8"
        assert format_level((2, 3)) == "2x3"
        assert parse_level("jigsaw", "3x3") == (3, 3)
        assert parse_level("maze", "16") == 16

    def test_malformed_jigsaw_level(self):
        with pytest.raises(ValueError):
            parse_level("jigsaw", "4")

    def test_published_levels(self):
        assert is_published_level("vsp", 32)
        assert is_published_level("jigsaw", [4, 4])
        assert not is_published_level("sudoku", 9)
        assert PUBLISHED_LEVELS["maze"] == [8, 16, 32]

    def test_test_seed_range_is_above_training(self):
        assert TEST_SEED_BASE == 2 ** 40


class TestRaster:
    def test_blank_and_pixels(self):
        image = RasterImage.blank(2, 3, (1, 2, 3))
        assert image.shape == (2, 3)
        assert image.pixels == bytes([1, 2, 3] * 6)
        assert RasterImage.from_pixels(3, 2, image.pixels) == image

    def test_array_is_read_only(self):
        image = RasterImage.blank(2, 2)
        with pytest.raises(ValueError):
            image.array[0, 0, 0] = 0

    def test_rejects_bad_shape(self):
        with pytest.raises(ValueError):
            RasterImage(np.zeros((4, 4), dtype=np.uint8))
        with pytest.raises(ValueError):
            RasterImage.from_pixels(2, 2, b"\x00" * 5)


class TestManifest:
    def test_write_then_read(self, tmp_path):
        records = [_record(s) for s in range(3)]
        write_manifest(records, tmp_path / "manifest.jsonl")
        assert read_manifest(tmp_path) == records

    def test_lines_have_sorted_keys(self, tmp_path):
        line = record_to_line(_record())
        keys = list(json.loads(line).keys())
        assert keys == sorted(keys)

    def test_empty_manifest(self, tmp_path):
        with pytest.raises(EmptyManifest):
            write_manifest([], tmp_path / "m.jsonl")
        (tmp_path / "blank.jsonl").write_text("\n", encoding="utf-8")
        with pytest.raises(EmptyManifest):
            read_manifest(tmp_path / "blank.jsonl")

    def test_duplicate_id(self, tmp_path):
        record = _record()
        with pytest.raises(DuplicateId):
            write_manifest([record, record], tmp_path / "m.jsonl")

    def test_malformed_line_reports_line_number(self, tmp_path):
        path = tmp_path / "m.jsonl"
        path.write_text(record_to_line(_record()) + "\n{not json\n", encoding="utf-8")
        with pytest.raises(ManifestParseError) as exc:
            read_manifest(path)
        assert exc.value.line == 2

    def test_invalid_record_reports_line_number(self, tmp_path):
        path = tmp_path / "m.jsonl"
        path.write_text('{"id": "x"}\n', encoding="utf-8")
        with pytest.raises(ManifestParseError) as exc:
            read_manifest(path)
        assert exc.value.line == 1


class TestErrors:
    def test_exit_codes(self):
        assert ConfigError("x").exit_code == EXIT_USAGE
        assert InvalidLevel("maze", 1).exit_code == EXIT_USAGE
        assert ShapeMismatch("x").exit_code == EXIT_FAILURE

    def test_no_path_is_a_parse_error(self):
        assert issubclass(NoPath, ParseError)


class TestGenConfig:
    def test_rejects_unpublished_level(self):
        with pytest.raises(ValueError):
            GenConfig(kind=TaskKind.SUDOKU, level=9)

    def test_rejects_unknown_keys(self):
        with pytest.raises(ValueError):
            GenConfig.model_validate({"kind": "vsp", "level": 3, "colour": "red"})

    def test_jigsaw_level_from_json_list(self):
        config = GenConfig.model_validate({"kind": "jigsaw", "level": [2, 2]})
        assert config.level == (2, 2)
