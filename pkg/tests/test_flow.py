import numpy as np
import pytest
import torch

import gridflow.flow.trainer as trainer_module
from gridflow.core.exceptions import CheckpointError, ConfigError, EmptyManifest, ShapeMismatch, TrainingDiverged
from gridflow.core.levels import TEST_SEED_BASE
from gridflow.core.manifest import MANIFEST_NAME, read_manifest, write_manifest
from gridflow.core.raster import RasterImage
from gridflow.eval import evaluate, random_walk_baseline
from gridflow.flow import (
    IDENTITY_CODEC,
    Denoiser,
    DenoiserCheckpoint,
    encode_condition,
    flow_mse,
    fm_loss,
    interpolate,
    null_condition,
    sample_flow_batch,
    sample_timestep,
    target_velocity,
    train,
)
from gridflow.flow.checkpoint import FORMAT_VERSION
from gridflow.flow.matching import FlowBatch
from gridflow.flow.trainer import CHECKPOINT_NAME, LOG_NAME, read_loss_log, update_ema
from gridflow.render import render_instance
from gridflow.sampler import FlowSampler
from gridflow.schemas import DenoiserConfig, GenConfig, SampleConfig, TaskKind, TrainConfig
from gridflow.tasks.dataset import gen_dataset, generate_records


def _gen(seed):
    return torch.Generator().manual_seed(seed)


class TestInterpolation:
    def test_endpoints(self):
        x0, x1 = torch.randn(2, 3, 4, 4), torch.randn(2, 3, 4, 4)
        assert torch.equal(interpolate(x0, x1, 0.0), x1)
        assert torch.equal(interpolate(x0, x1, 1.0), x0)

    def test_midpoint(self):
        assert torch.equal(interpolate(torch.tensor([2.0]), torch.tensor([0.0]), 0.5), torch.tensor([1.0]))

    def test_velocity(self):
        assert torch.equal(target_velocity(torch.tensor([1.0]), torch.tensor([0.0])), torch.tensor([1.0]))
        x = torch.randn(5)
        assert torch.equal(target_velocity(x, x), torch.zeros(5))

    def test_identity_recovers_data(self):
        x0, x1 = torch.randn(4, 3, 6, 6), torch.randn(4, 3, 6, 6)
        t = torch.rand(4)
        recovered = interpolate(x0, x1, t) + (1 - t).view(-1, 1, 1, 1) * target_velocity(x0, x1)
        assert torch.allclose(recovered, x0, atol=1e-6)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            interpolate(torch.zeros(3), torch.zeros(4), 0.5)
        with pytest.raises(ShapeMismatch):
            target_velocity(torch.zeros(3), torch.zeros(4))


class TestTimesteps:
    def test_strictly_inside_unit_interval(self):
        t = sample_timestep(_gen(0), 10_000)
        assert bool((t > 0).all()) and bool((t < 1).all())

    @pytest.mark.parametrize("mean,median", [(0.0, 0.5), (3.0, 0.9526)])
    def test_median(self, mean, median):
        t = sample_timestep(_gen(1), 100_000, mean=mean, std=1.0)
        assert float(t.median()) == pytest.approx(median, abs=0.01)

    def test_std_must_be_positive(self):
        with pytest.raises(ValueError):
            sample_timestep(_gen(0), 4, std=0.0)


class TestLoss:
    def test_oracle_velocity_has_zero_loss(self):
        x0 = torch.randn(6, 3, 5, 5, dtype=torch.float64)
        cond = torch.randn_like(x0)
        config = TrainConfig(p_uncond=0.5)

        def oracle(x_t, t, c, null_mask):
            return (x0 - x_t) / (1 - t).view(-1, 1, 1, 1)

        loss = fm_loss(oracle, x0, cond, _gen(2), config)
        assert float(loss) == pytest.approx(0.0, abs=1e-12)

    def test_zero_prediction_on_zero_data(self):
        x0 = torch.zeros(64, 3, 16, 16)
        loss = fm_loss(lambda x_t, t, c, m: torch.zeros_like(x_t), x0, torch.zeros_like(x0), _gen(3), TrainConfig())
        assert float(loss) == pytest.approx(1.0, abs=0.05)

    def test_batch_permutation_invariance(self):
        x0 = torch.randn(8, 3, 4, 4, dtype=torch.float64)
        batch = sample_flow_batch(x0, torch.randn_like(x0), _gen(4), TrainConfig())

        def velocity(x_t, t, c, m):
            return 0.5 * x_t + t.view(-1, 1, 1, 1) - c

        perm = torch.randperm(8, generator=_gen(5))
        shuffled = FlowBatch(
            x_t=batch.x_t[perm],
            t=batch.t[perm],
            target=batch.target[perm],
            cond=batch.cond[perm],
            null_mask=batch.null_mask[perm],
        )
        assert float(flow_mse(velocity, shuffled)) == pytest.approx(float(flow_mse(velocity, batch)), rel=1e-12)

    def test_condition_dropout_zeroes_condition(self):
        x0 = torch.zeros(200, 3, 2, 2)
        cond = torch.ones_like(x0)
        batch = sample_flow_batch(x0, cond, _gen(6), TrainConfig(p_uncond=0.1))
        dropped = batch.null_mask
        assert 0 < int(dropped.sum()) < 60
        assert torch.equal(batch.cond[dropped], torch.zeros_like(batch.cond[dropped]))
        assert torch.equal(batch.cond[~dropped], torch.ones_like(batch.cond[~dropped]))

    def test_empty_batch(self):
        with pytest.raises(ValueError):
            sample_flow_batch(torch.zeros(0, 3, 2, 2), torch.zeros(0, 3, 2, 2), _gen(0), TrainConfig())


def _small_denoiser(height=10, width=14, dtype=torch.float32):
    torch.manual_seed(0)
    config = DenoiserConfig(height=height, width=width, base_width=4, channel_mults=(1, 2, 4), time_dim=8, groups=2)
    return Denoiser(config).to(dtype)


class TestDenoiser:
    def test_output_shape_with_padding(self):
        model = _small_denoiser()
        x = torch.randn(2, 3, 10, 14)
        out = model(x, torch.rand(2), torch.randn_like(x), torch.tensor([False, True]))
        assert out.shape == x.shape
        assert bool(torch.isfinite(out).all())

    def test_deterministic(self):
        model = _small_denoiser().eval()
        x = torch.randn(1, 3, 10, 14)
        args = (x, torch.tensor([0.3]), torch.randn_like(x), torch.tensor([False]))
        assert torch.equal(model(*args), model(*args))

    def test_null_flag_changes_output(self):
        model = _small_denoiser()
        with torch.no_grad():
            model.null_embedding.fill_(1.0)
        x = torch.randn(1, 3, 10, 14)
        cond = torch.zeros_like(x)
        t = torch.tensor([0.5])
        assert not torch.equal(model(x, t, cond, torch.tensor([False])), model(x, t, cond, torch.tensor([True])))

    def test_shape_mismatch(self):
        model = _small_denoiser()
        x = torch.randn(1, 3, 12, 14)
        with pytest.raises(ShapeMismatch):
            model(x, torch.rand(1), x, torch.tensor([False]))

    def test_gradients_match_finite_differences(self):
        model = _small_denoiser(height=4, width=4, dtype=torch.float64)
        x = torch.randn(2, 3, 4, 4, dtype=torch.float64, generator=_gen(7))
        cond = torch.randn(2, 3, 4, 4, dtype=torch.float64, generator=_gen(8))
        target = torch.randn(2, 3, 4, 4, dtype=torch.float64, generator=_gen(9))
        t = torch.tensor([0.2, 0.7], dtype=torch.float64)
        mask = torch.tensor([False, True])

        def loss():
            return torch.mean((model(x, t, cond, mask) - target) ** 2)

        model.zero_grad()
        loss().backward()
        params = [p for p in model.parameters() if p.grad is not None and p.numel() > 1]
        picker = np.random.default_rng(0)
        h = 1e-3
        for _ in range(10):
            param = params[int(picker.integers(len(params)))]
            index = tuple(int(picker.integers(s)) for s in param.shape)
            analytic = float(param.grad[index])
            with torch.no_grad():
                original = float(param[index])
                param[index] = original + h
                plus = float(loss())
                param[index] = original - h
                minus = float(loss())
                param[index] = original
            numeric = (plus - minus) / (2 * h)
            assert abs(analytic - numeric) <= 1e-2 * max(abs(analytic), abs(numeric)) + 1e-5


class TestCodec:
    def test_white_and_black(self):
        assert torch.equal(IDENTITY_CODEC.encode(RasterImage.blank(3, 4)), torch.ones(3, 3, 4))
        assert torch.equal(IDENTITY_CODEC.encode(RasterImage.blank(3, 4, (0, 0, 0))), -torch.ones(3, 3, 4))

    def test_decode_clamps_and_quantizes(self):
        latent = torch.tensor([-3.0, -1.0, 0.0, 1.0, 7.0]).view(1, 1, 5).expand(3, 1, 5)
        image = IDENTITY_CODEC.decode(latent)
        assert image.array[0, :, 0].tolist() == [0, 0, 128, 255, 255]

    def test_decode_inverts_encode(self, small_instances):
        image = render_instance(small_instances[TaskKind.JIGSAW][0][0])
        assert IDENTITY_CODEC.decode(IDENTITY_CODEC.encode(image)) == image

    def test_null_condition_differs_from_rendered(self, small_instances):
        for pairs in small_instances.values():
            image = render_instance(pairs[0][0])
            condition = encode_condition(image)
            null = null_condition(*image.shape)
            assert null.null and not condition.null
            assert not torch.equal(condition.image, null.image)

    def test_condition_size_check(self):
        with pytest.raises(ShapeMismatch):
            encode_condition(RasterImage.blank(4, 4), expected_shape=(5, 5))


class TestCheckpoint:
    def test_round_trip(self, tiny_checkpoint, tmp_path):
        path = tiny_checkpoint.save(tmp_path / "model.dftk")
        loaded = DenoiserCheckpoint.load(path)
        assert loaded.kind == tiny_checkpoint.kind
        assert loaded.denoiser == tiny_checkpoint.denoiser
        assert loaded.train == tiny_checkpoint.train
        assert loaded.render == tiny_checkpoint.render
        assert set(loaded.model_state) == set(tiny_checkpoint.model_state)
        for name, array in tiny_checkpoint.model_state.items():
            assert np.array_equal(loaded.model_state[name], array)
        assert loaded.checkpoint_id == tiny_checkpoint.checkpoint_id

    def test_rebuilt_model_matches(self, tiny_checkpoint):
        model = DenoiserCheckpoint.from_bytes(tiny_checkpoint.to_bytes()).build_model()
        reference = tiny_checkpoint.build_model()
        x = torch.randn(1, 3, 50, 50)
        args = (x, torch.tensor([0.4]), x, torch.tensor([False]))
        with torch.no_grad():
            assert torch.equal(model(*args), reference(*args))

    def test_bad_magic(self, tiny_checkpoint):
        with pytest.raises(CheckpointError, match="magic"):
            DenoiserCheckpoint.from_bytes(b"NOPE" + tiny_checkpoint.to_bytes()[4:])

    def test_version_gate(self, tiny_checkpoint):
        data = bytearray(tiny_checkpoint.to_bytes())
        data[4:6] = (FORMAT_VERSION + 1).to_bytes(2, "little")
        with pytest.raises(CheckpointError, match="version"):
            DenoiserCheckpoint.from_bytes(bytes(data))

    def test_truncated(self, tiny_checkpoint):
        with pytest.raises(CheckpointError):
            DenoiserCheckpoint.from_bytes(tiny_checkpoint.to_bytes()[:-10])

    def test_missing_file(self, tmp_path):
        with pytest.raises(CheckpointError):
            DenoiserCheckpoint.load(tmp_path / "absent.dftk")


class TestTraining:
    def test_ema_with_zero_decay_copies_weights(self):
        model, ema = _small_denoiser(), _small_denoiser()
        with torch.no_grad():
            for p in model.parameters():
                p.add_(1.0)
        update_ema(ema, model, 0.0)
        for a, b in zip(ema.parameters(), model.parameters()):
            assert torch.equal(a, b)

    def test_outputs(self, vsp_dataset, tiny_train_config, tmp_path):
        checkpoint = train(tiny_train_config, vsp_dataset, tmp_path)
        assert checkpoint.step == 4
        assert checkpoint.kind == TaskKind.VSP
        assert (tmp_path / CHECKPOINT_NAME).is_file()
        assert (tmp_path / "checkpoint_2.dftk").is_file()
        log = read_loss_log(tmp_path / LOG_NAME)
        assert [row[0] for row in log] == [1, 2, 3, 4]
        assert all(np.isfinite(row[1]) for row in log)

    def test_seeded_runs_are_identical(self, vsp_dataset, tiny_train_config, tmp_path):
        first = train(tiny_train_config, vsp_dataset, tmp_path / "a")
        second = train(tiny_train_config, vsp_dataset, tmp_path / "b")
        assert (tmp_path / "a" / LOG_NAME).read_bytes() == (tmp_path / "b" / LOG_NAME).read_bytes()
        assert first.to_bytes() == second.to_bytes()

    def test_zero_decay_ema_equals_raw(self, vsp_dataset, tiny_train_config, tmp_path):
        config = tiny_train_config.model_copy(update={"ema_decay": 0.0})
        checkpoint = train(config, vsp_dataset, tmp_path)
        for name, array in checkpoint.model_state.items():
            assert np.array_equal(checkpoint.ema_state[name], array)

    def test_max_steps_caps_schedule(self, vsp_dataset, tiny_train_config, tmp_path):
        assert train(tiny_train_config, vsp_dataset, tmp_path, max_steps=1).step == 1

    def test_empty_manifest(self, tiny_train_config, tmp_path):
        (tmp_path / MANIFEST_NAME).write_text("", encoding="utf-8")
        with pytest.raises(EmptyManifest):
            train(tiny_train_config, tmp_path, tmp_path / "out")

    def test_mixed_kinds(self, vsp_dataset, datasets, tiny_train_config, tmp_path):
        records = read_manifest(vsp_dataset)[:2] + read_manifest(datasets[TaskKind.SUDOKU])[:2]
        write_manifest(records, tmp_path / MANIFEST_NAME)
        with pytest.raises(ConfigError):
            train(tiny_train_config, tmp_path, tmp_path / "out")

    def test_levels_with_different_shapes(self, tiny_train_config, tmp_path):
        records = generate_records(GenConfig(kind=TaskKind.VSP, level=3, count=2), tmp_path)
        records += generate_records(GenConfig(kind=TaskKind.VSP, level=4, count=2), tmp_path)
        write_manifest(records, tmp_path / MANIFEST_NAME)
        with pytest.raises(ShapeMismatch):
            train(tiny_train_config, tmp_path, tmp_path / "out")

    def test_levels_sharing_a_shape(self, tiny_train_config, tmp_path):
        records = generate_records(GenConfig(kind=TaskKind.SUDOKU, level=45, count=1), tmp_path)
        records += generate_records(GenConfig(kind=TaskKind.SUDOKU, level=40, count=1), tmp_path)
        write_manifest(records, tmp_path / MANIFEST_NAME)
        config = tiny_train_config.model_copy(update={"steps": 1})
        assert train(config, tmp_path, tmp_path / "out").denoiser.height == 290

    def test_divergence_reports_gradient_of_failing_step(self, vsp_dataset, tiny_train_config, tmp_path, monkeypatch):
        monkeypatch.setattr(trainer_module, "flow_mse", lambda model, batch: flow_mse(model, batch) + float("inf"))
        with pytest.raises(TrainingDiverged) as info:
            train(tiny_train_config, vsp_dataset, tmp_path)
        assert info.value.step == 1
        assert np.isfinite(info.value.diagnostics["grad_norm"])
        assert info.value.diagnostics["grad_norm"] > 0

    @pytest.mark.slow
    def test_loss_decreases(self, tmp_path):
        data = tmp_path / "data"
        gen_dataset(GenConfig(kind=TaskKind.VSP, level=3, count=64, base_seed=0), data)
        config = TrainConfig(
            batch_size=8, steps=200, learning_rate=1e-3, base_width=16, channel_mults=(1, 2),
            time_dim=32, groups=4, checkpoint_every=1000, log_every=50, seed=0,
        )
        train(config, data, tmp_path / "run")
        log = read_loss_log(tmp_path / "run" / LOG_NAME)
        assert log[-1][2] < log[10][2]

    @pytest.mark.slow
    def test_overfits_small_vsp_set(self, tmp_path):
        data = tmp_path / "data"
        gen_dataset(GenConfig(kind=TaskKind.VSP, level=3, count=64, base_seed=0), data)
        config = TrainConfig(
            batch_size=8, steps=2000, learning_rate=1e-3, base_width=32, channel_mults=(1, 2),
            time_dim=64, groups=8, checkpoint_every=10_000, log_every=200, seed=0,
        )
        checkpoint = train(config, data, tmp_path / "run")
        assert checkpoint.step <= 2000
        report = evaluate(FlowSampler(checkpoint, SampleConfig(steps=20)), data, SampleConfig(steps=20))
        assert report.rows[0].accuracy >= 0.9

    @pytest.mark.slow
    def test_generalizes_to_held_out_vsp(self, tmp_path):
        gen_dataset(GenConfig(kind=TaskKind.VSP, level=4, count=5000, base_seed=0), tmp_path / "train", jobs=4)
        test_config = GenConfig(kind=TaskKind.VSP, level=4, count=100, base_seed=TEST_SEED_BASE)
        gen_dataset(test_config, tmp_path / "test", jobs=4)
        config = TrainConfig(
            batch_size=16, steps=20_000, learning_rate=3e-4, base_width=32, channel_mults=(1, 2, 2),
            time_dim=64, groups=8, checkpoint_every=100_000, log_every=1000, seed=0,
        )
        checkpoint = train(config, tmp_path / "train", tmp_path / "run")
        sample_config = SampleConfig(steps=20)
        accuracy = evaluate(FlowSampler(checkpoint, sample_config), tmp_path / "test", sample_config).rows[0].accuracy
        baseline = random_walk_baseline(read_manifest(tmp_path / "test"), walks=100, seed=0)[0]["accuracy"]
        assert accuracy >= 0.5
        assert accuracy > baseline
