"""Central-difference checks for every backward path.

Each analytic gradient is compared against (f(w + e) - f(w - e)) / 2e over
every scalar parameter.  Shapes stay tiny so exhaustive perturbation is
cheap; the tolerances leave room for the O(e^2) truncation term plus
float64 cancellation in f.
"""

import numpy as np
import pytest

from hiverank import policy
from hiverank.encoding import flatten, unflatten
from hiverank.layers import (SequenceBatch, attention_backward, attention_forward,
                             blstm_backward, blstm_forward, dense_backward,
                             dense_forward, lstm_backward, lstm_forward)
from hiverank.params import (AttentionParams, FeedForwardParams, LstmParams,
                             ModelConfig, PolicyParams)
from hiverank.rl import mse_loss_and_gradients

EPS = 1e-6


def fd_over(arrays, f, eps=EPS):
    """Numeric gradient of scalar f() over each array, edited in place."""
    out = []
    for a in arrays:
        g = np.zeros_like(a)
        flat, gf = a.ravel(), g.ravel()
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + eps
            hi = f()
            flat[i] = keep - eps
            lo = f()
            flat[i] = keep
            gf[i] = (hi - lo) / (2.0 * eps)
        out.append(g)
    return out


def check(analytic, numeric):
    for a, n in zip(analytic, numeric):
        np.testing.assert_allclose(a, n, rtol=2e-4, atol=1e-7)


def random_batch(rng, B, Tmax, E):
    seqs = [rng.normal(size=(rng.integers(1, Tmax + 1), E)) for _ in range(B)]
    return SequenceBatch.from_sequences(seqs, Tmax)


def test_lstm_backward():
    rng = np.random.default_rng(50)
    p = LstmParams.glorot(3, 2, rng)
    batch = random_batch(rng, 3, 4, 3)
    R = rng.normal(size=(3, batch.embeddings.shape[1], 2))

    def loss():
        h, _ = lstm_forward(batch.embeddings, batch.mask, p)
        return float((h * R).sum())

    h, cache = lstm_forward(batch.embeddings, batch.mask, p)
    grads = LstmParams.zeros(3, 2)
    dx = lstm_backward(R, cache, grads)
    check(grads.arrays(), fd_over(p.arrays(), loss))
    check([dx], fd_over([batch.embeddings], loss))


def test_blstm_backward():
    rng = np.random.default_rng(51)
    fwd = LstmParams.glorot(2, 3, rng)
    bwd = LstmParams.glorot(2, 3, rng)
    batch = random_batch(rng, 2, 5, 2)
    R = rng.normal(size=(2, batch.embeddings.shape[1], 6))

    def loss():
        h, _ = blstm_forward(batch.embeddings, batch.mask, batch.lengths, fwd, bwd)
        return float((h * R).sum())

    h, cache = blstm_forward(batch.embeddings, batch.mask, batch.lengths, fwd, bwd)
    gf = LstmParams.zeros(2, 3)
    gb = LstmParams.zeros(2, 3)
    dx = blstm_backward(R, cache, gf, gb)
    check(gf.arrays(), fd_over(fwd.arrays(), loss))
    check(gb.arrays(), fd_over(bwd.arrays(), loss))
    check([dx], fd_over([batch.embeddings], loss))


def test_attention_backward():
    rng = np.random.default_rng(52)
    p = AttentionParams.glorot(3, 4, rng)
    h = rng.normal(size=(2, 5, 4))
    mask = np.array([[1, 1, 1, 0, 0], [1] * 5], dtype=np.float64)
    R = rng.normal(size=(2, 4))

    def loss():
        pooled, _ = attention_forward(h, mask, p)
        return float((pooled * R).sum())

    pooled, cache = attention_forward(h, mask, p)
    g = AttentionParams.zeros(3, 4)
    dh = attention_backward(R, cache, p, g)
    check(g.arrays(), fd_over(p.arrays(), loss))
    check([dh], fd_over([h], loss))


def test_dense_backward():
    rng = np.random.default_rng(53)
    p = FeedForwardParams.glorot((4, 3, 2), rng)
    x = rng.normal(size=(5, 4))
    R = rng.normal(size=(5, 2))

    def loss():
        out, _ = dense_forward(x, p)
        return float((out * R).sum())

    out, cache = dense_forward(x, p)
    g = FeedForwardParams.zeros((4, 3, 2))
    dx = dense_backward(R, cache, p, g)
    check(g.arrays(), fd_over(p.arrays(), loss))
    check([dx], fd_over([x], loss))


@pytest.fixture
def policy_setup(tiny_cfg):
    rng = np.random.default_rng(54)
    params = PolicyParams.glorot(tiny_cfg, rng)
    q = random_batch(rng, 3, 4, tiny_cfg.embedding_dim)
    a = random_batch(rng, 3, 5, tiny_cfg.embedding_dim)
    return rng, params, q, a


def test_policy_training_loss_gradient(tiny_cfg, policy_setup):
    rng, params, q, a = policy_setup
    actions = np.array([0, 1, 1])
    targets = rng.normal(size=3)
    vec = flatten(params)

    def loss_at(v):
        loss, _ = policy.loss_and_gradients(unflatten(v, tiny_cfg), tiny_cfg,
                                            q, a, actions, targets)
        return loss

    _, grads = policy.loss_and_gradients(params, tiny_cfg, q, a, actions, targets)
    analytic = flatten(grads)
    numeric = np.zeros_like(vec)
    for i in range(vec.size):
        keep = vec[i]
        vec[i] = keep + EPS
        hi = loss_at(vec)
        vec[i] = keep - EPS
        lo = loss_at(vec)
        vec[i] = keep
        numeric[i] = (hi - lo) / (2.0 * EPS)
    np.testing.assert_allclose(analytic, numeric, rtol=2e-4, atol=1e-7)


def test_mse_loss_gradient(tiny_cfg, policy_setup):
    _, params, q, a = policy_setup
    labels = np.array([1.0, 0.0, 1.0])
    vec = flatten(params)

    def loss_at(v):
        loss, _ = mse_loss_and_gradients(unflatten(v, tiny_cfg), tiny_cfg,
                                         q, a, labels)
        return loss

    _, grads = mse_loss_and_gradients(params, tiny_cfg, q, a, labels)
    analytic = flatten(grads)
    numeric = np.zeros_like(vec)
    for i in range(vec.size):
        keep = vec[i]
        vec[i] = keep + EPS
        hi = loss_at(vec)
        vec[i] = keep - EPS
        lo = loss_at(vec)
        vec[i] = keep
        numeric[i] = (hi - lo) / (2.0 * EPS)
    np.testing.assert_allclose(analytic, numeric, rtol=2e-4, atol=1e-7)
