import numpy as np
import pytest

from csgi.errors import ConfigInvalidError, TooShortError
from csgi.nn import Tensor
from csgi.nn import autodiff as ad
from csgi.taci import (
    TaciConfig,
    build_model,
    desk_config,
    evaluate_pair,
    load_model_set,
    save_model_set,
    train_pair,
)
from csgi.timeseries import TimeSeries


def tiny_config(**over):
    base = dict(
        nb_filters=4,
        kernel_size=3,
        dilations=(1, 2),
        seq_length=10,
        lag=10,
        latent_sample_rate=2,
        encoder_widths=(8, 4),
        decoder_widths=(4, 8),
        epochs=3,
        batch_size=128,
        learning_rate=2e-3,
        noise_sigma=0.01,
        train_stride=3,
        window_len=500,
        early_stop_patience=5,
        plateau_patience=3,
    )
    base.update(over)
    return TaciConfig(**base)


def toy_pair(n=6000, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    y = np.roll(x, 10)
    y[:10] = rng.standard_normal(10)
    return TimeSeries(x, label="x"), TimeSeries(y, label="y")


class TestConfigValidation:
    def test_defaults_are_valid(self):
        cfg = TaciConfig()
        assert cfg.nb_filters == 32
        assert cfg.kernel_size == 32
        assert cfg.dilations == (1, 2, 4, 8, 16, 32)
        assert cfg.nb_stacks == 1
        assert cfg.latent_sample_rate == 2
        assert cfg.epochs == 300
        assert cfg.batch_size == 512

    def test_sample_rate_must_divide_seq_length(self):
        with pytest.raises(ConfigInvalidError):
            tiny_config(seq_length=10, latent_sample_rate=3)

    def test_seq_length_range(self):
        with pytest.raises(ConfigInvalidError):
            tiny_config(seq_length=8)
        with pytest.raises(ConfigInvalidError):
            tiny_config(seq_length=102)

    def test_lag_range(self):
        with pytest.raises(ConfigInvalidError):
            tiny_config(lag=5)

    def test_encoder_widths_must_shrink(self):
        with pytest.raises(ConfigInvalidError):
            tiny_config(encoder_widths=(8, 16))

    def test_round_trip_dict(self):
        cfg = tiny_config()
        assert TaciConfig.from_dict(cfg.to_dict()) == cfg


class TestBuildModel:
    @pytest.mark.parametrize("seq_length", [20, 50, 100])
    def test_output_shape_matches_input(self, seq_length):
        cfg = tiny_config(seq_length=seq_length, train_stride=1)
        net = build_model(cfg, seed=0)
        batch = 3
        driver = Tensor(np.random.default_rng(1).standard_normal((batch, seq_length, 1)))
        target = Tensor(np.random.default_rng(2).standard_normal((batch, seq_length, 1)))
        out = net.forward_pair(driver, target)
        assert out.data.shape == (batch, seq_length, 1)

    def test_parameter_count_deterministic(self):
        cfg = tiny_config()
        a = build_model(cfg, seed=5)
        b = build_model(cfg, seed=5)
        assert a.parameter_count() == b.parameter_count()
        for (na, pa), (nb, pb) in zip(a.named_parameters(), b.named_parameters()):
            assert na == nb
            np.testing.assert_array_equal(pa.data, pb.data)

    def test_bottleneck_multiplicative_identity(self):
        # force one head's latent to all ones: output equals the decoder
        # applied to the other head's latent alone
        cfg = tiny_config()
        net = build_model(cfg, seed=3)
        rng = np.random.default_rng(4)
        driver = Tensor(rng.standard_normal((2, cfg.seq_length, 1)))
        target = Tensor(rng.standard_normal((2, cfg.seq_length, 1)))
        z_target = net.enc_target(target)
        via_ones = net.decoder(ad.mul(Tensor(np.ones_like(z_target.data)), z_target))
        direct = net.decoder(z_target)
        np.testing.assert_array_equal(via_ones.data, direct.data)


class TestTrainPair:
    def test_learns_delayed_copy(self):
        x, y = toy_pair(n=20_000, seed=5)
        cfg = tiny_config(
            nb_filters=8, encoder_widths=(32, 16), decoder_widths=(16, 32),
            epochs=30, train_stride=2,
        )
        models = train_pair(x, y, cfg, seed=1)
        hist = models.histories["full_xy"]
        # the x -> y full network sees the copy source, so its validation
        # error must drop well below the unpredictable-baseline variance
        assert min(hist.val_loss) < 0.3
        assert min(models.histories["surr_xy"].val_loss) > 0.8

    def test_deterministic_loss_curves(self):
        x, y = toy_pair(n=4000, seed=6)
        cfg = tiny_config(epochs=2)
        a = train_pair(x, y, cfg, seed=9)
        b = train_pair(x, y, cfg, seed=9)
        assert a.histories["full_xy"].train_loss == b.histories["full_xy"].train_loss
        assert a.histories["surr_yx"].val_loss == b.histories["surr_yx"].val_loss

    def test_rejects_short_series(self):
        x, y = toy_pair(n=150)
        with pytest.raises(TooShortError):
            train_pair(x, y, tiny_config(), seed=0)

    @pytest.mark.slow
    def test_desk_scale_copy_reaches_high_r2(self):
        # exactly realizable mapping: the full network must reach training
        # R^2 > 0.95 within 50 epochs at desk scale
        x, y = toy_pair(n=20_000, seed=8)
        cfg = desk_config(epochs=50, early_stop_patience=50, plateau_patience=10)
        models = train_pair(x, y, cfg, seed=4)
        assert min(models.histories["full_xy"].train_loss) < 0.05

    @pytest.mark.slow
    def test_white_noise_pair_predicts_nothing(self):
        rng = np.random.default_rng(9)
        x = TimeSeries(rng.standard_normal(12_000), label="x")
        y = TimeSeries(rng.standard_normal(12_000), label="y")
        cfg = tiny_config(epochs=8, train_stride=2)
        models = train_pair(x, y, cfg, seed=6)
        # nothing is predictable beyond the mean: held-out explained
        # variance of every network stays within +/- 0.12 of zero
        for hist in models.histories.values():
            best_val = min(hist.val_loss)
            assert 0.88 < best_val < 1.12


@pytest.fixture(scope="module")
def trained():
    x, y = toy_pair(n=8000, seed=7)
    cfg = tiny_config(epochs=4)
    models = train_pair(x, y, cfg, seed=2)
    return models, x, y


class TestEvaluatePair:

    def test_evaluation_deterministic(self, trained):
        models, x, y = trained
        a = evaluate_pair(models, x, y, window_len=500, n_bootstrap=10, seed=3)
        b = evaluate_pair(models, x, y, window_len=500, n_bootstrap=10, seed=3)
        np.testing.assert_array_equal(a.chi_xy, b.chi_xy)
        np.testing.assert_array_equal(a.std_yx, b.std_yx)

    def test_window_starts_offset_by_lag(self, trained):
        models, x, y = trained
        tc = evaluate_pair(models, x, y, window_len=500, n_bootstrap=5, seed=4)
        assert tc.window_starts[0] == models.cfg.lag
        assert tc.window_starts[1] - tc.window_starts[0] == 500

    def test_checkpoint_round_trip_bitwise(self, trained, tmp_path):
        models, x, y = trained
        before = evaluate_pair(models, x, y, window_len=500, n_bootstrap=5, seed=5)
        save_model_set(models, tmp_path / "modelset")
        loaded = load_model_set(tmp_path / "modelset")
        after = evaluate_pair(loaded, x, y, window_len=500, n_bootstrap=5, seed=5)
        np.testing.assert_array_equal(before.chi_xy, after.chi_xy)
        np.testing.assert_array_equal(before.chi_yx, after.chi_yx)
        np.testing.assert_array_equal(before.std_xy, after.std_xy)

    def test_manifest_contents(self, trained, tmp_path):
        import json

        models, x, y = trained
        save_model_set(models, tmp_path / "ms")
        manifest = json.loads((tmp_path / "ms" / "manifest.json").read_text())
        assert manifest["config"]["seq_length"] == models.cfg.seq_length
        assert manifest["seed"] == models.seed
        assert set(manifest["histories"]) == {"full_xy", "surr_xy", "full_yx", "surr_yx"}
