"""
Model Archive Tests
===================

Unit tests for encode_archive/decode_archive and save_model/load_model,
including corruption, version and truncation handling.
"""

import struct

import numpy as np
import pytest

from src.services.boosted_ensemble import BoostConfig, encode, init_ensemble, train_boosted
from src.services.nn_core import DenseSpec, NetworkSpec
from src.services.persistence import (
    ARCHIVE_MAGIC,
    ArchiveChecksumError,
    ArchiveTruncatedError,
    ArchiveVersionError,
    PersistenceError,
    decode_archive,
    encode_archive,
    load_model,
    save_model,
)
from src.services.persistence.persistence_constants import PREAMBLE_BYTES


@pytest.fixture
def model(tiny_encoder, tiny_decoder, tiny_data):
    config = BoostConfig(M=2, I=10, Q=8, seed=3, init_scheme="scaled")
    trained, _ = train_boosted(tiny_encoder, tiny_decoder, tiny_data, None, config)
    trained.label = "tiny"
    return trained


class TestRoundTrip:
    """Tests for lossless save and load."""

    def test_parameters_bitwise(self, model, temp_output_dir):
        """Test every parameter survives a save/load cycle bit for bit."""
        path = save_model(model, temp_output_dir / "nested" / "model.bae")
        loaded = load_model(path)
        originals = [a for net in model.encoders + [model.decoder] for a in net.parameter_arrays()]
        restored = [a for net in loaded.encoders + [loaded.decoder] for a in net.parameter_arrays()]
        assert len(originals) == len(restored)
        for a, b in zip(originals, restored):
            assert a.tobytes() == b.tobytes()

    def test_metadata(self, model):
        """Test specs, stage count, label and Adam step counters are restored."""
        loaded = decode_archive(encode_archive(model))
        assert loaded.encoder_spec == model.encoder_spec
        assert loaded.decoder_spec == model.decoder_spec
        assert loaded.trained_stages == 2
        assert loaded.label == "tiny"
        assert loaded.decoder.adam_state.step == model.decoder.adam_state.step
        assert loaded.encoders[1].adam_state.step == model.encoders[1].adam_state.step

    def test_same_latent_codes(self, model, tiny_data):
        """Test a reloaded model encodes identically."""
        loaded = decode_archive(encode_archive(model))
        np.testing.assert_array_equal(encode(loaded, tiny_data), encode(model, tiny_data))

    def test_encoding_deterministic(self, model):
        """Test the same model always encodes to the same bytes."""
        assert encode_archive(model) == encode_archive(model)

    def test_untrained_model(self, tiny_encoder, tiny_decoder):
        """Test partially trained ensembles round-trip with their stage count."""
        fresh = init_ensemble(tiny_encoder, tiny_decoder, M=3, seed=0)
        assert decode_archive(encode_archive(fresh)).trained_stages == 0

    def test_expected_spec_matches(self, model, tiny_encoder, tiny_decoder):
        """Test loading with the matching expected specs succeeds."""
        loaded = decode_archive(encode_archive(model), tiny_encoder, tiny_decoder)
        assert loaded.M == 2


class TestCorruption:
    """Tests for rejected archives."""

    def test_flipped_payload_byte(self, model):
        """Test a changed tensor byte fails the checksum."""
        raw = bytearray(encode_archive(model))
        raw[-40] ^= 0xFF
        with pytest.raises(ArchiveChecksumError):
            decode_archive(bytes(raw))

    def test_flipped_tensor_dim_byte(self, model):
        """Test a changed dim in a full-length file fails the checksum, not as truncation."""
        raw = bytearray(encode_archive(model))
        (header_len,) = struct.unpack_from("<I", raw, 8)
        first_dim = PREAMBLE_BYTES + header_len + 4
        raw[first_dim] ^= 0x40
        with pytest.raises(ArchiveChecksumError):
            decode_archive(bytes(raw))

    def test_flipped_trailer_byte(self, model):
        """Test a changed checksum byte fails the checksum."""
        raw = bytearray(encode_archive(model))
        raw[-1] ^= 0x01
        with pytest.raises(ArchiveChecksumError):
            decode_archive(bytes(raw))

    def test_other_version(self, model):
        """Test another format version is rejected before the checksum is read."""
        raw = bytearray(encode_archive(model))
        struct.pack_into("<H", raw, 4, 2)
        with pytest.raises(ArchiveVersionError):
            decode_archive(bytes(raw))

    def test_truncated_tensors(self, model):
        """Test a file cut inside its tensors is reported as truncated."""
        raw = encode_archive(model)
        with pytest.raises(ArchiveTruncatedError):
            decode_archive(raw[:-100])

    def test_truncated_preamble(self, model):
        """Test a file shorter than the preamble is reported as truncated."""
        with pytest.raises(ArchiveTruncatedError):
            decode_archive(encode_archive(model)[:8])

    def test_bad_magic(self, model):
        """Test a file with another magic is not an archive."""
        raw = encode_archive(model)
        assert raw[:4] == ARCHIVE_MAGIC
        with pytest.raises(PersistenceError):
            decode_archive(b"NOPE" + raw[4:])

    def test_unexpected_spec(self, model, tiny_decoder):
        """Test an archive whose spec differs from the expected one is rejected."""
        other = NetworkSpec(layers=[DenseSpec(in_units=4, out_units=2)], input_shape=(4,))
        with pytest.raises(ArchiveVersionError):
            decode_archive(encode_archive(model), other, tiny_decoder)

    def test_missing_file(self, temp_output_dir):
        """Test loading a missing archive raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            load_model(temp_output_dir / "absent.bae")
