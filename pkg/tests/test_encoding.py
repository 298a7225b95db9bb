"""Flat-vector encoding: exact round trips and hard length validation."""

import numpy as np
import pytest

from hiverank.encoding import dimension, flatten, unflatten
from hiverank.errors import ShapeError
from hiverank.params import ModelConfig, PolicyParams


def count_by_hand(cfg):
    """Independent parameter count from the architecture dimensions."""
    total = 0
    for layer in range(cfg.blstm_layers):
        infeat = cfg.layer_input_dim(layer)
        per_cell = 4 * (cfg.hidden_dim * infeat      # W
                        + cfg.hidden_dim * cfg.hidden_dim   # U
                        + cfg.hidden_dim)            # b
        total += 2 * per_cell * 2                    # two directions, two sides
    per_attention = cfg.attn_dim * cfg.pooled_dim + 2 * cfg.attn_dim
    total += 2 * per_attention
    dims = cfg.dense_dims
    total += sum(dims[k + 1] * dims[k] + dims[k + 1] for k in range(len(dims) - 1))
    return total


@pytest.mark.parametrize("cfg", [
    ModelConfig(embedding_dim=3, hidden_dim=2, attn_dim=2, dense_hidden=(4,),
                blstm_layers=1, max_len=6),
    ModelConfig(embedding_dim=5, hidden_dim=4, attn_dim=3, dense_hidden=(6, 3),
                blstm_layers=2, max_len=10),
    ModelConfig(),
])
def test_dimension_matches_hand_count(cfg):
    assert dimension(cfg) == count_by_hand(cfg)


def test_round_trip_is_bitwise(tiny_cfg):
    params = PolicyParams.glorot(tiny_cfg, np.random.default_rng(1))
    vec = flatten(params)
    assert vec.shape == (dimension(tiny_cfg),)
    back = unflatten(vec, tiny_cfg)
    for a, b in zip(params.arrays(), back.arrays()):
        np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(flatten(back), vec)


def test_unflatten_preserves_coordinate_order(tiny_cfg):
    # slot i of the vector lands at position i of the canonical read-out,
    # so vectors written by one build stay readable by another
    d = dimension(tiny_cfg)
    probe = np.arange(d, dtype=np.float64)
    params = unflatten(probe, tiny_cfg)
    seen = np.concatenate([a.ravel() for a in params.arrays()])
    np.testing.assert_array_equal(seen, probe)


def test_unflatten_validates_length(tiny_cfg):
    d = dimension(tiny_cfg)
    with pytest.raises(ShapeError):
        unflatten(np.zeros(d - 1), tiny_cfg)
    with pytest.raises(ShapeError):
        unflatten(np.zeros(d + 1), tiny_cfg)
    with pytest.raises(ShapeError):
        unflatten(np.zeros((d, 1)), tiny_cfg)
