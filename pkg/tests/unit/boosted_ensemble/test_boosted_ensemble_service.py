"""
Boosted Ensemble Service Tests
==============================

Unit tests for stage training, weight updates, inference and the single
autoencoder baseline, on the 4 -> 2 dense fixture networks.
"""

import numpy as np
import pytest

from src.services.boosted_ensemble import (
    BoostConfig,
    EnsembleModel,
    StageOrderError,
    UntrainedModelError,
    as_ensemble,
    average_encoding,
    check_autoencoder_specs,
    encode,
    init_ensemble,
    init_sample_weights,
    reconstruct,
    reconstruction_errors,
    train_boosted,
    train_single_ae,
    train_stage,
    update_sample_weights,
    validation_mse,
)
from src.services.boosted_ensemble import boosted_ensemble_service as service
from src.services.boosted_ensemble.boosted_ensemble_service import _autoencoder_step
from src.services.nn_core import AdamConfig, ShapeMismatchError, mse_loss, predict
from src.services.nn_core.nn_core_gradcheck import FD_STEP, REL_TOLERANCE, relative_error


def _params(net):
    return [a.copy() for a in net.parameter_arrays()]


def _same(a, b) -> bool:
    return all(np.array_equal(x, y) for x, y in zip(a, b))


@pytest.fixture
def config():
    return BoostConfig(M=3, I=15, Q=8, seed=4, init_scheme="scaled", validate_every=5)


@pytest.fixture
def trained(tiny_encoder, tiny_decoder, tiny_data, config):
    return train_boosted(tiny_encoder, tiny_decoder, tiny_data[:30], tiny_data[30:], config)


class TestEnsembleModel:
    """Tests for EnsembleModel construction."""

    def test_spec_mismatch(self, tiny_encoder):
        """Test a decoder that does not mirror the encoder is rejected."""
        with pytest.raises(ShapeMismatchError):
            check_autoencoder_specs(tiny_encoder, tiny_encoder)

    def test_trained_stage_range(self, tiny_encoder, tiny_decoder):
        """Test trained_stages must lie in 0..M."""
        model = init_ensemble(tiny_encoder, tiny_decoder, M=2)
        with pytest.raises(StageOrderError):
            EnsembleModel(encoders=model.encoders, decoder=model.decoder, trained_stages=3)

    def test_as_ensemble(self, tiny_encoder, tiny_decoder):
        """Test a single pair wraps as a trained one-encoder ensemble."""
        model = init_ensemble(tiny_encoder, tiny_decoder, M=1)
        wrapped = as_ensemble(model.encoders[0], model.decoder)
        assert wrapped.M == 1
        assert wrapped.is_trained

    def test_init_seeded(self, tiny_encoder, tiny_decoder):
        """Test initialization depends only on the seed."""
        a = init_ensemble(tiny_encoder, tiny_decoder, M=2, seed=1)
        b = init_ensemble(tiny_encoder, tiny_decoder, M=2, seed=1)
        assert _same(_params(a.encoders[1]), _params(b.encoders[1]))
        assert not _same(_params(a.encoders[0]), _params(a.encoders[1]))


class TestInference:
    """Tests for average_encoding, encode and reconstruct."""

    def test_average_is_mean_of_encoders(self, tiny_encoder, tiny_decoder, tiny_data):
        """Test the latent code is the mean of the first m encoder outputs."""
        model = init_ensemble(tiny_encoder, tiny_decoder, M=3, seed=0)
        outputs = [predict(enc, tiny_data) for enc in model.encoders]
        pair = (outputs[0] + outputs[1]) / 2
        np.testing.assert_allclose(average_encoding(model, 2, tiny_data), pair)
        np.testing.assert_allclose(average_encoding(model, 3, tiny_data), sum(outputs) / 3)

    def test_stage_index_range(self, tiny_encoder, tiny_decoder, tiny_data):
        """Test stage indices outside 1..M are rejected."""
        model = init_ensemble(tiny_encoder, tiny_decoder, M=2)
        with pytest.raises(StageOrderError):
            average_encoding(model, 3, tiny_data)

    def test_untrained_encode(self, tiny_encoder, tiny_decoder, tiny_data):
        """Test encode needs every stage trained."""
        model = init_ensemble(tiny_encoder, tiny_decoder, M=2)
        with pytest.raises(UntrainedModelError):
            encode(model, tiny_data)

    def test_latent_shape_independent_of_m(self, trained, tiny_data):
        """Test the ensemble latent has the single-encoder latent shape."""
        model, _ = trained
        assert encode(model, tiny_data).shape == (len(tiny_data), 2)
        assert encode(model, tiny_data[0]).shape == (2,)
        assert reconstruct(model, tiny_data).shape == tiny_data.shape

    def test_validation_mse_matches_errors(self, trained, tiny_data):
        """Test validation MSE is the summed per-sample error over every element."""
        model, _ = trained
        errors = reconstruction_errors(model, 3, tiny_data)
        assert validation_mse(model, 3, tiny_data) == pytest.approx(errors.sum() / tiny_data.size)

    def test_errors_shape_check(self, trained):
        """Test samples of the wrong shape are rejected."""
        model, _ = trained
        with pytest.raises(ShapeMismatchError):
            reconstruction_errors(model, 1, np.zeros((2, 5)))


class TestTrainStage:
    """Tests for train_stage and update_sample_weights."""

    def test_out_of_order(self, tiny_encoder, tiny_decoder, tiny_data, config, rng):
        """Test stage 2 cannot be trained before stage 1."""
        model = init_ensemble(tiny_encoder, tiny_decoder, M=3)
        with pytest.raises(StageOrderError):
            train_stage(model, 2, tiny_data, init_sample_weights(len(tiny_data)), config, rng)

    def test_earlier_encoders_frozen(self, tiny_encoder, tiny_decoder, tiny_data, config, rng):
        """Test training stage 2 leaves encoder 1 untouched but moves encoder 2 and the decoder."""
        model = init_ensemble(tiny_encoder, tiny_decoder, M=3, seed=0, scheme="scaled")
        weights = init_sample_weights(len(tiny_data))
        train_stage(model, 1, tiny_data, weights, config, rng)
        enc1 = _params(model.encoders[0])
        enc2 = _params(model.encoders[1])
        enc3 = _params(model.encoders[2])
        dec = _params(model.decoder)
        version = model.encoders[0].version

        train_stage(model, 2, tiny_data, update_sample_weights(model, 1, tiny_data), config, rng)

        assert _same(_params(model.encoders[0]), enc1)
        assert model.encoders[0].version == version
        assert _same(_params(model.encoders[2]), enc3)
        assert not _same(_params(model.encoders[1]), enc2)
        assert not _same(_params(model.decoder), dec)
        assert model.trained_stages == 2

    def test_decoder_adam_state_carries_over(
        self, tiny_encoder, tiny_decoder, tiny_data, config, rng
    ):
        """Test the shared decoder keeps counting Adam steps across stages."""
        model = init_ensemble(tiny_encoder, tiny_decoder, M=2, seed=0, scheme="scaled")
        weights = init_sample_weights(len(tiny_data))
        train_stage(model, 1, tiny_data, weights, config, rng)
        train_stage(model, 2, tiny_data, weights, config, rng)
        assert model.decoder.adam_state.step == 2 * config.I
        assert model.encoders[1].adam_state.step == config.I

    def test_weights_proportional_to_errors(self, trained, tiny_data):
        """Test updated weights are errors normalized to sum to one."""
        model, _ = trained
        errors = reconstruction_errors(model, 2, tiny_data)
        weights = update_sample_weights(model, 2, tiny_data)
        np.testing.assert_allclose(weights.w, errors / errors.sum())

    def test_weights_need_trained_stage(self, tiny_encoder, tiny_decoder, tiny_data):
        """Test weights cannot be computed for an untrained stage."""
        model = init_ensemble(tiny_encoder, tiny_decoder, M=2)
        with pytest.raises(StageOrderError):
            update_sample_weights(model, 1, tiny_data)


class TestAutoencoderStep:
    """Tests for the shared encoder/decoder update used by every stage."""

    def test_encoder_gradient_is_scaled_by_stage(
        self, tiny_encoder, tiny_decoder, tiny_data, monkeypatch
    ):
        """Test stage 3 backprop matches finite differences through the averaged latent."""
        model = init_ensemble(tiny_encoder, tiny_decoder, M=3, seed=0, scheme="scaled")
        xb = tiny_data[:6]
        frozen = predict(model.encoders[0], xb) + predict(model.encoders[1], xb)
        encoder = model.encoders[2]

        captured = {}

        def record(net, grads, config):
            captured[id(net)] = grads
            return net

        monkeypatch.setattr(service, "adam_step", record)

        def loss() -> float:
            latent = (frozen + predict(encoder, xb)) / 3
            return mse_loss(xb, predict(model.decoder, latent))

        before = loss()
        returned = _autoencoder_step(
            encoder, model.decoder, xb, AdamConfig(), frozen_sum=frozen, divisor=3
        )
        assert returned == pytest.approx(before)

        analytic = captured[id(encoder)].params
        for layer, params in enumerate(encoder.params):
            for name, value in params.items():
                numeric = np.zeros_like(value)
                it = np.nditer(value, flags=["multi_index"])
                for _ in it:
                    idx = it.multi_index
                    original = value[idx]
                    value[idx] = original + FD_STEP
                    plus = loss()
                    value[idx] = original - FD_STEP
                    minus = loss()
                    value[idx] = original
                    numeric[idx] = (plus - minus) / (2 * FD_STEP)
                assert relative_error(analytic[layer][name], numeric) < REL_TOLERANCE


class TestTrainBoosted:
    """Tests for train_boosted."""

    def test_trace_layout(self, trained, config):
        """Test one trace row per iteration with cumulative presentations."""
        model, trace = trained
        assert model.is_trained
        assert len(trace) == config.M * config.I
        assert trace.rows[-1].samples_seen == config.M * config.I * config.Q
        assert [r.stage for r in trace.rows][:: config.I] == [1, 2, 3]

    def test_validation_schedule(self, trained, config):
        """Test validation runs every validate_every iterations and at stage end."""
        _, trace = trained
        val_keys = [r.key for r in trace.validation_rows()]
        assert val_keys == [(m, i) for m in (1, 2, 3) for i in (5, 10, 15)]

    def test_deterministic(self, tiny_encoder, tiny_decoder, tiny_data, config, trained):
        """Test the same seed reproduces the model bit for bit."""
        again, trace = train_boosted(
            tiny_encoder, tiny_decoder, tiny_data[:30], tiny_data[30:], config
        )
        model, first_trace = trained
        for a, b in zip(model.encoders + [model.decoder], again.encoders + [again.decoder]):
            assert _same(_params(a), _params(b))
        assert [r.train_mse for r in trace.rows] == [r.train_mse for r in first_trace.rows]

    def test_training_reduces_error(self, tiny_encoder, tiny_decoder, tiny_data):
        """Test boosting lowers the validation MSE below its starting value."""
        adam = AdamConfig(learning_rate=1e-2)
        config = BoostConfig(M=2, I=150, Q=8, seed=0, init_scheme="scaled", adam=adam)
        untrained = init_ensemble(tiny_encoder, tiny_decoder, 2, 0, "scaled")
        start = validation_mse(untrained, 1, tiny_data)
        model, _ = train_boosted(tiny_encoder, tiny_decoder, tiny_data, None, config)
        assert validation_mse(model, 2, tiny_data) < start

    def test_wrong_sample_shape(self, tiny_encoder, tiny_decoder, config):
        """Test training data must match the encoder input."""
        with pytest.raises(ShapeMismatchError):
            train_boosted(tiny_encoder, tiny_decoder, np.zeros((5, 3)), None, config)


class TestTrainSingleAe:
    """Tests for the single autoencoder baseline."""

    def test_starts_like_one_stage_boosting(self, tiny_encoder, tiny_decoder, tiny_data):
        """Test a single AE starts from the same parameters as M=1 boosting."""
        (enc, dec), trace = train_single_ae(
            tiny_encoder, tiny_decoder, tiny_data, None, epochs=0, batch_size=8, seed=6
        )
        model = init_ensemble(tiny_encoder, tiny_decoder, M=1, seed=6)
        assert len(trace) == 0
        assert _same(_params(enc), _params(model.encoders[0]))
        assert _same(_params(dec), _params(model.decoder))

    def test_epoch_trace(self, tiny_encoder, tiny_decoder, tiny_data):
        """Test each epoch covers the data once, with a final short batch."""
        _, trace = train_single_ae(
            tiny_encoder, tiny_decoder, tiny_data, tiny_data, epochs=2, batch_size=16, seed=0
        )
        assert [r.key for r in trace.rows] == [(e, b) for e in (1, 2) for b in (1, 2, 3)]
        assert trace.rows[-1].samples_seen == 2 * len(tiny_data)
        assert trace.stage_rows(1)[-1].val_mse is not None

    def test_invalid_batch_size(self, tiny_encoder, tiny_decoder, tiny_data):
        """Test the batch size must be positive."""
        with pytest.raises(ValueError):
            train_single_ae(tiny_encoder, tiny_decoder, tiny_data, None, epochs=1, batch_size=0)

    def test_matches_one_stage_boosting(self, tiny_encoder, tiny_decoder):
        """Test equal sample budgets give single AE and M=1 boosting similar validation MSE."""
        data_rng = np.random.default_rng(21)
        train = data_rng.uniform(0.0, 1.0, size=(200, 4))
        val = data_rng.uniform(0.0, 1.0, size=(50, 4))
        adam = AdamConfig(learning_rate=1e-2)
        single, boosted = [], []
        for seed in range(3):
            (enc, dec), _ = train_single_ae(
                tiny_encoder,
                tiny_decoder,
                train,
                None,
                epochs=20,
                batch_size=10,
                adam=adam,
                seed=seed,
                init_scheme="scaled",
            )
            single.append(mse_loss(val, predict(dec, predict(enc, val))))
            config = BoostConfig(M=1, I=400, Q=10, adam=adam, seed=seed, init_scheme="scaled")
            model, _ = train_boosted(tiny_encoder, tiny_decoder, train, None, config)
            boosted.append(validation_mse(model, 1, val))
        assert abs(np.mean(single) - np.mean(boosted)) <= 0.2 * np.mean(boosted)
