"""Checkpoint files: exact round trips and every rejection branch."""

import struct

import numpy as np
import pytest

from hiverank.checkpoint import MAGIC, load_checkpoint, save_checkpoint
from hiverank.encoding import dimension, flatten
from hiverank.errors import CheckpointError
from hiverank.params import ModelConfig, PolicyParams


def test_round_trip_is_bitwise(tmp_path, tiny_cfg):
    params = PolicyParams.glorot(tiny_cfg, np.random.default_rng(1))
    path = str(tmp_path / "w.ckpt")
    save_checkpoint(params, tiny_cfg, path, config_hash="abc123")
    back, header = load_checkpoint(path)
    np.testing.assert_array_equal(flatten(back), flatten(params))
    assert header["config_hash"] == "abc123"
    assert header["dimension"] == dimension(tiny_cfg)
    assert ModelConfig.from_dict(header["model"]) == tiny_cfg


def test_accepts_flat_vector_input(tmp_path, tiny_cfg):
    vec = np.random.default_rng(2).normal(size=dimension(tiny_cfg))
    path = str(tmp_path / "w.ckpt")
    save_checkpoint(vec, tiny_cfg, path)
    back, _ = load_checkpoint(path)
    np.testing.assert_array_equal(flatten(back), vec)


def test_file_size_is_header_plus_weights(tmp_path, tiny_cfg):
    path = str(tmp_path / "w.ckpt")
    save_checkpoint(PolicyParams.zeros(tiny_cfg), tiny_cfg, path)
    raw = (tmp_path / "w.ckpt").read_bytes()
    (header_len,) = struct.unpack("<I", raw[len(MAGIC):len(MAGIC) + 4])
    assert len(raw) == len(MAGIC) + 4 + header_len + 8 * dimension(tiny_cfg)


def test_save_rejects_wrong_vector_length(tmp_path, tiny_cfg):
    with pytest.raises(CheckpointError):
        save_checkpoint(np.zeros(dimension(tiny_cfg) - 1), tiny_cfg,
                        str(tmp_path / "w.ckpt"))


class TestLoadRejections:
    def path_with(self, tmp_path, raw):
        p = tmp_path / "bad.ckpt"
        p.write_bytes(raw)
        return str(p)

    def good_bytes(self, tmp_path, tiny_cfg):
        path = tmp_path / "good.ckpt"
        save_checkpoint(PolicyParams.zeros(tiny_cfg), tiny_cfg, str(path),
                        config_hash="h1")
        return path.read_bytes()

    def test_bad_magic(self, tmp_path):
        with pytest.raises(CheckpointError, match="magic"):
            load_checkpoint(self.path_with(tmp_path, b"NOPE====\x00"))

    def test_truncated_header_length(self, tmp_path):
        with pytest.raises(CheckpointError, match="truncated"):
            load_checkpoint(self.path_with(tmp_path, MAGIC + b"\x01"))

    def test_truncated_header_body(self, tmp_path):
        raw = MAGIC + struct.pack("<I", 500) + b"{}"
        with pytest.raises(CheckpointError, match="truncated"):
            load_checkpoint(self.path_with(tmp_path, raw))

    def test_unreadable_header_json(self, tmp_path):
        blob = b"not json at all"
        raw = MAGIC + struct.pack("<I", len(blob)) + blob
        with pytest.raises(CheckpointError, match="header"):
            load_checkpoint(self.path_with(tmp_path, raw))

    def test_truncated_payload(self, tmp_path, tiny_cfg):
        raw = self.good_bytes(tmp_path, tiny_cfg)
        with pytest.raises(CheckpointError, match="payload"):
            load_checkpoint(self.path_with(tmp_path, raw[:-8]))

    def test_model_mismatch(self, tmp_path, tiny_cfg):
        path = self.path_with(tmp_path, self.good_bytes(tmp_path, tiny_cfg))
        other = ModelConfig(embedding_dim=4, hidden_dim=2, attn_dim=2,
                            dense_hidden=(4,), blstm_layers=1, max_len=6)
        with pytest.raises(CheckpointError, match="incompatible"):
            load_checkpoint(path, expect_model=other)
        load_checkpoint(path, expect_model=tiny_cfg)  # matching dims pass

    def test_hash_mismatch(self, tmp_path, tiny_cfg):
        path = self.path_with(tmp_path, self.good_bytes(tmp_path, tiny_cfg))
        with pytest.raises(CheckpointError, match="hash"):
            load_checkpoint(path, expect_hash="other")
        load_checkpoint(path, expect_hash="h1")
