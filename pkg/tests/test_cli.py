import json

import pytest

import gridflow.cli as cli
from gridflow.cli import RESOLVED_CONFIG_NAME, main
from gridflow.core.manifest import MANIFEST_NAME, read_manifest
from gridflow.eval import read_csv
from gridflow.flow.trainer import CHECKPOINT_NAME, LOG_NAME
from gridflow.sampler.trajectory import MONTAGE_NAME
from gridflow.schemas import TaskKind


@pytest.fixture(autouse=True)
def single_job(monkeypatch):
    monkeypatch.setenv("GRIDFLOW_JOBS", "1")


@pytest.fixture(scope="module")
def trained(tmp_path_factory, vsp_dataset):
    out = tmp_path_factory.mktemp("cli-train")
    code = main([
        "train", "--manifest", str(vsp_dataset), "--out", str(out),
        "--steps", "2", "--batch-size", "2", "--base-width", "8", "--seed", "0",
    ])
    assert code == 0
    return out / CHECKPOINT_NAME


class TestGen:
    def test_writes_dataset_and_resolved_config(self, tmp_path):
        out = tmp_path / "vsp3"
        assert main(["gen", "--task", "vsp", "--level", "3", "--count", "4", "--seed", "1", "--out", str(out)]) == 0
        assert len(read_manifest(out / MANIFEST_NAME)) == 4
        resolved = json.loads((out / RESOLVED_CONFIG_NAME).read_text())
        assert resolved["gen"] == {"kind": "vsp", "level": 3, "count": 4, "base_seed": 1}

    def test_rerun_is_identical(self, tmp_path):
        args = ["gen", "--task", "jigsaw", "--level", "2x2", "--count", "2"]
        assert main(args + ["--out", str(tmp_path / "a")]) == 0
        assert main(args + ["--out", str(tmp_path / "b")]) == 0
        assert (tmp_path / "a" / MANIFEST_NAME).read_bytes() == (tmp_path / "b" / MANIFEST_NAME).read_bytes()

    def test_config_file_with_flag_override(self, tmp_path):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"gen": {"kind": "maze", "level": 8, "count": 5}}))
        out = tmp_path / "maze"
        assert main(["gen", "--config", str(config), "--count", "2", "--out", str(out)]) == 0
        records = read_manifest(out)
        assert len(records) == 2
        assert records[0].kind.value == "maze"

    def test_unknown_task_is_a_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            main(["gen", "--task", "sudoku-invalid", "--level", "9", "--out", str(tmp_path)])
        assert info.value.code == 2

    def test_inadmissible_level(self, tmp_path):
        assert main(["gen", "--task", "sudoku", "--level", "9", "--out", str(tmp_path)]) == 2

    def test_malformed_level(self, tmp_path):
        assert main(["gen", "--task", "jigsaw", "--level", "22", "--out", str(tmp_path)]) == 2

    def test_unknown_config_key(self, tmp_path):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"gen": {"kind": "vsp", "colour": "blue"}}))
        assert main(["gen", "--config", str(config), "--out", str(tmp_path / "out")]) == 2

    def test_unreadable_config(self, tmp_path):
        config = tmp_path / "run.json"
        config.write_text("{not json")
        assert main(["gen", "--config", str(config), "--out", str(tmp_path / "out")]) == 2

    def test_suite_needs_task(self, tmp_path):
        assert main(["gen", "--suite", "--out", str(tmp_path)]) == 2

    def test_suite_writes_train_and_test_manifests(self, tmp_path):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"eval": {"test_count": 1}}))
        out = tmp_path / "suite"
        args = ["gen", "--task", "jigsaw", "--suite", "--scale", "0.0002", "--config", str(config), "--out", str(out)]
        assert main(args) == 0
        assert len(read_manifest(out / "train" / "194x194")) == 7
        for level in ("2x2", "3x3", "4x4"):
            assert len(read_manifest(out / "test" / level)) == 1

    def test_library_value_error_is_a_runtime_failure(self, tmp_path, monkeypatch):
        def broken(*args, **kwargs):
            raise ValueError("internal")

        monkeypatch.setattr(cli, "gen_dataset", broken)
        assert main(["gen", "--task", "vsp", "--level", "3", "--count", "1", "--out", str(tmp_path)]) == 1


@pytest.mark.parametrize("command", ["gen", "train", "sample", "eval", "ablate", "viz"])
def test_help(command, capsys):
    with pytest.raises(SystemExit) as info:
        main([command, "--help"])
    assert info.value.code == 0
    assert "--out" in capsys.readouterr().out


class TestEval:
    def test_oracle_stub(self, vsp_dataset, tmp_path):
        assert main(["eval", "--manifest", str(vsp_dataset), "--stub", "oracle", "--out", str(tmp_path)]) == 0
        rows = read_csv(tmp_path / "report.csv")
        assert rows[0]["accuracy"] == "1.0000"
        assert rows[0]["n"] == "8"
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["sampler"] == "oracle"
        assert report["steps"] == 20 and report["cfg_scale"] == 4.0

    def test_blank_stub_with_best_of(self, vsp_dataset, tmp_path):
        args = ["eval", "--manifest", str(vsp_dataset), "--stub", "blank", "--best-of", "1,2", "--out", str(tmp_path)]
        assert main(args) == 0
        assert read_csv(tmp_path / "report.csv")[0]["parse_error_rate"] == "1.0000"
        assert [r["n_candidates"] for r in read_csv(tmp_path / "best_of_n.csv")] == ["1", "2"]

    def test_random_walks(self, vsp_dataset, tmp_path):
        assert main(["eval", "--manifest", str(vsp_dataset), "--random-walks", "5", "--out", str(tmp_path)]) == 0
        assert read_csv(tmp_path / "random_walk.csv")[0]["walks"] == "5"

    def test_malformed_candidate_list(self, vsp_dataset, tmp_path):
        args = ["eval", "--manifest", str(vsp_dataset), "--stub", "oracle", "--best-of", "1,x", "--out", str(tmp_path)]
        assert main(args) == 2

    def test_random_walks_need_a_navigation_task(self, datasets, tmp_path):
        args = ["eval", "--manifest", str(datasets[TaskKind.TSP]), "--random-walks", "5", "--out", str(tmp_path)]
        assert main(args) == 2

    def test_unknown_stub(self, vsp_dataset, tmp_path):
        assert main(["eval", "--manifest", str(vsp_dataset), "--stub", "perfect", "--out", str(tmp_path)]) == 2

    def test_checkpoint_required(self, vsp_dataset, tmp_path):
        assert main(["eval", "--manifest", str(vsp_dataset), "--out", str(tmp_path)]) == 2

    def test_missing_checkpoint(self, vsp_dataset, tmp_path, capsys):
        args = ["eval", "--manifest", str(vsp_dataset), "--checkpoint", str(tmp_path / "nope.dftk"), "--out", str(tmp_path)]
        assert main(args) == 1
        assert "Checkpoint not found" in capsys.readouterr().err


class TestModelCommands:
    def test_train_outputs(self, trained):
        assert trained.is_file()
        assert (trained.parent / LOG_NAME).is_file()
        resolved = json.loads((trained.parent / RESOLVED_CONFIG_NAME).read_text())
        assert resolved["train"]["steps"] == 2

    def test_sample_with_trajectory(self, trained, vsp_dataset, tmp_path):
        record = read_manifest(vsp_dataset)[1]
        args = [
            "sample", "--manifest", str(vsp_dataset), "--instance", record.id, "--checkpoint", str(trained),
            "--steps", "2", "--cfg", "1", "--trajectory", "--out", str(tmp_path),
        ]
        assert main(args) == 0
        assert (tmp_path / f"{record.id}.png").is_file()
        assert len(list((tmp_path / "trajectory").glob("*.png"))) == 3

    def test_sample_unknown_instance(self, trained, vsp_dataset, tmp_path):
        args = ["sample", "--manifest", str(vsp_dataset), "--instance", "vsp-3-x", "--checkpoint", str(trained),
                "--out", str(tmp_path)]
        assert main(args) == 2

    def test_viz(self, trained, vsp_dataset, tmp_path):
        assert main(["viz", "--manifest", str(vsp_dataset), "--checkpoint", str(trained), "--steps", "3",
                     "--out", str(tmp_path)]) == 0
        assert (tmp_path / MONTAGE_NAME).is_file()
        assert len(list(tmp_path.glob("step_*.png"))) == 3

    def test_eval_checkpoint(self, trained, vsp_dataset, tmp_path):
        assert main(["eval", "--manifest", str(vsp_dataset), "--checkpoint", str(trained), "--steps", "1",
                     "--out", str(tmp_path)]) == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["sampler"] == "flow"
        assert len(report["checkpoint_id"]) == 16

    def test_ablate_steps(self, trained, vsp_dataset, tmp_path):
        assert main(["ablate", "--manifest", str(vsp_dataset), "--checkpoint", str(trained), "--steps-list", "1,2",
                     "--cfg", "1", "--out", str(tmp_path)]) == 0
        rows = read_csv(tmp_path / "steps.csv")
        assert [r["denoiser_evals"] for r in rows] == ["1.0000", "2.0000"]

    def test_ablate_needs_a_sweep(self, trained, vsp_dataset, tmp_path):
        assert main(["ablate", "--manifest", str(vsp_dataset), "--checkpoint", str(trained), "--out", str(tmp_path)]) == 2
