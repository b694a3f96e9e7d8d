"""
Preset and Gradcheck Tests
==========================

Unit tests for the architecture presets, mirror_decoder and the
finite-difference gradient check.
"""

import numpy as np
import pytest

from src.services.nn_core import (
    LAYER_KINDS,
    PRESETS,
    ActivationSpec,
    Conv2dSpec,
    DenseSpec,
    MaxPool2x2Spec,
    NetworkSpec,
    Upsample2x2Spec,
    get_preset,
    gradcheck,
    init_network,
    mirror_decoder,
    predict,
)


class TestPresets:
    """Tests for the preset registry."""

    def test_cifar_conv_latent(self):
        """Test the CIFAR conv preset encodes to 16x4x4."""
        assert get_preset("cifar-conv-paper").encoder.output_shape == (16, 4, 4)

    def test_fmnist_conv_latent(self):
        """Test the F-MNIST conv preset encodes to 8x2x2."""
        assert get_preset("fmnist-conv-paper").encoder.output_shape == (8, 2, 2)

    def test_fmnist_dense_latent(self):
        """Test the dense F-MNIST preset ends in 50 units."""
        assert get_preset("fmnist-dense-paper").encoder.output_shape == (50,)

    def test_desk_presets_are_small(self):
        """Test the desk presets take 1x8x8 inputs."""
        assert get_preset("desk-dense").encoder.input_shape == (1, 8, 8)
        assert get_preset("desk-dense").encoder.output_shape == (4,)
        assert get_preset("desk-conv").encoder.input_shape == (1, 8, 8)

    def test_unknown_preset_lists_names(self):
        """Test unknown names list the known presets."""
        with pytest.raises(KeyError) as exc_info:
            get_preset("imagenet")
        assert "desk-dense" in str(exc_info.value)

    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_every_preset_mirrors(self, name):
        """Test every preset's decoder maps the latent back to the input shape."""
        preset = PRESETS[name]
        decoder = mirror_decoder(preset.encoder, preset.hidden_activation)
        assert decoder.input_shape == preset.encoder.output_shape
        assert decoder.output_shape == preset.encoder.input_shape


class TestMirrorDecoder:
    """Tests for mirror_decoder."""

    def test_dense_mirror(self, tiny_encoder, tiny_decoder):
        """Test dense layers are reversed and the output is a sigmoid."""
        kinds = [layer.kind for layer in tiny_decoder.layers]
        assert kinds == ["dense", "activation", "dense", "activation"]
        assert tiny_decoder.layers[0] == DenseSpec(in_units=2, out_units=3)
        assert tiny_decoder.layers[-1] == ActivationSpec(function="sigmoid")
        assert tiny_decoder.output_shape == tiny_encoder.input_shape

    def test_decoder_output_in_unit_interval(self, tiny_decoder, rng):
        """Test decoder outputs land in [0, 1]."""
        net = init_network(tiny_decoder, seed=0)
        y = predict(net, rng.normal(scale=10.0, size=(20, 2)))
        assert np.all((y >= 0) & (y <= 1))

    def test_pool_becomes_upsample(self):
        """Test max-pooling mirrors to upsampling."""
        encoder = NetworkSpec(
            layers=[
                Conv2dSpec(in_channels=1, out_channels=2, kernel=3, padding=1),
                MaxPool2x2Spec(),
            ],
            input_shape=(1, 4, 4),
        )
        decoder = mirror_decoder(encoder)
        assert isinstance(decoder.layers[0], Upsample2x2Spec)
        assert decoder.output_shape == (1, 4, 4)

    def test_no_parametric_layer(self):
        """Test an encoder without parameters cannot be mirrored."""
        encoder = NetworkSpec(layers=[MaxPool2x2Spec()], input_shape=(1, 4, 4))
        with pytest.raises(ValueError):
            mirror_decoder(encoder)


class TestGradcheck:
    """Tests for the finite-difference gradient check."""

    def test_all_kinds_pass(self):
        """Test backprop matches finite differences for every layer kind."""
        records = gradcheck(configurations=3, seed=0)
        assert len(records) == 3 * len(LAYER_KINDS)
        assert {r.layer_kind for r in records} == set(LAYER_KINDS)
        assert all(r.passed for r in records)

    def test_subset_of_kinds(self):
        """Test checking only selected kinds."""
        records = gradcheck(kinds=["dense"], configurations=2, seed=1)
        assert [r.layer_kind for r in records] == ["dense", "dense"]

    def test_unknown_kind(self):
        """Test an unknown layer kind is rejected."""
        with pytest.raises(ValueError):
            gradcheck(kinds=["lstm"], configurations=1)
