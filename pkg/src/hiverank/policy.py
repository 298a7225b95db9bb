"""The question-answer scoring network assembled from the layer pieces.

A state is one (question, answer) pair.  Both sentences go through their
own recurrent encoder stack and attention head; the pooled vectors q and a
are joined as [q, a, |q - a|] and the dense head maps that to two action
values: action 0 claims the answer is wrong, action 1 claims it is right.

The four recurrent cells of each stacked layer (question forward and
backward, answer forward and backward) are independent, so forward() runs
them as one block-diagonal fused cell over the longer of the two padded
lengths.  Freeze-masking keeps every cell's states exactly what separate
runs would produce; the payoff is one recurrence loop per layer instead of
four, which is most of the training-time cost at these widths.
"""

from __future__ import annotations

import numpy as np

from .layers import (SequenceBatch, _lstm_run, _lstm_run_backward,
                     _merge_cells, _scatter_cells, attention_backward,
                     attention_forward, dense_backward, dense_forward,
                     reverse_within_length)
from .params import ModelConfig, PolicyParams

Array = np.ndarray


def _pad_time(arr: Array, T: int) -> Array:
    """Zero-extend the time axis (axis 1) to length T."""
    if arr.shape[1] == T:
        return arr
    shape = list(arr.shape)
    shape[1] = T
    out = np.zeros(shape)
    out[:, :arr.shape[1]] = arr
    return out


def forward(params: PolicyParams, questions: SequenceBatch, answers: SequenceBatch):
    """Compute action values for a batch of pairs.

    Returns (q_values (B, 2), cache); pass the cache to backward() when
    training, ignore it otherwise.
    """
    B = questions.embeddings.shape[0]
    H = params.question_layers[0][0].hidden_dim
    T = max(questions.embeddings.shape[1], answers.embeddings.shape[1])
    q_in = _pad_time(questions.embeddings, T)
    a_in = _pad_time(answers.embeddings, T)
    q_mask = _pad_time(questions.mask, T)
    a_mask = _pad_time(answers.mask, T)
    ql, al = questions.lengths, answers.lengths
    # per-column freeze schedule: question cells own the first half of the
    # fused state, answer cells the second
    state_mask = np.empty((B, T, 4 * H))
    state_mask[:, :, :2 * H] = q_mask[:, :, None]
    state_mask[:, :, 2 * H:] = a_mask[:, :, None]

    run_caches = []
    for (qf, qb), (af, ab) in zip(params.question_layers, params.answer_layers):
        W, U, b = _merge_cells([qf, qb, af, ab])
        x_cat = np.concatenate([q_in, reverse_within_length(q_in, ql),
                                a_in, reverse_within_length(a_in, al)], axis=2)
        h_cat, run_cache = _lstm_run(x_cat, state_mask, W, U, b)
        run_caches.append(run_cache)
        q_in = np.concatenate(
            [h_cat[:, :, :H],
             reverse_within_length(h_cat[:, :, H:2 * H], ql)], axis=2)
        a_in = np.concatenate(
            [h_cat[:, :, 2 * H:3 * H],
             reverse_within_length(h_cat[:, :, 3 * H:], al)], axis=2)
    pq, q_att_cache = attention_forward(q_in, q_mask, params.question_attention)
    pa, a_att_cache = attention_forward(a_in, a_mask, params.answer_attention)
    features = np.concatenate([pq, pa, np.abs(pq - pa)], axis=1)
    q_values, head_cache = dense_forward(features, params.head)
    cache = {"runs": run_caches, "q_lengths": ql, "a_lengths": al,
             "q_att": q_att_cache, "a_att": a_att_cache,
             "head": head_cache, "pq": pq, "pa": pa, "H": H}
    return q_values, cache


def q_values(params: PolicyParams, questions: SequenceBatch, answers: SequenceBatch) -> Array:
    out, _ = forward(params, questions, answers)
    return out


def backward(dq: Array, cache, params: PolicyParams, cfg: ModelConfig) -> PolicyParams:
    """Backprop dq (B, 2) through the whole network into a fresh gradient."""
    grads = PolicyParams.zeros(cfg)
    dfeat = dense_backward(dq, cache["head"], params.head, grads.head)
    D = cache["pq"].shape[1]
    dpq = dfeat[:, :D].copy()
    dpa = dfeat[:, D:2 * D].copy()
    dabs = dfeat[:, 2 * D:]
    s = np.sign(cache["pq"] - cache["pa"])
    dpq += dabs * s
    dpa -= dabs * s
    dq_in = attention_backward(dpq, cache["q_att"], params.question_attention,
                               grads.question_attention)
    da_in = attention_backward(dpa, cache["a_att"], params.answer_attention,
                               grads.answer_attention)
    H = cache["H"]
    ql, al = cache["q_lengths"], cache["a_lengths"]
    for l in range(len(params.question_layers) - 1, -1, -1):
        dh_cat = np.concatenate(
            [dq_in[:, :, :H], reverse_within_length(dq_in[:, :, H:], ql),
             da_in[:, :, :H], reverse_within_length(da_in[:, :, H:], al)], axis=2)
        dx_cat, dW, dU, db = _lstm_run_backward(dh_cat, cache["runs"][l])
        gq = grads.question_layers[l]
        ga = grads.answer_layers[l]
        _scatter_cells(dW, dU, db, [gq[0], gq[1], ga[0], ga[1]])
        if l > 0:
            In = params.question_layers[l][0].input_dim
            dq_in = dx_cat[:, :, :In] + reverse_within_length(
                dx_cat[:, :, In:2 * In], ql)
            da_in = dx_cat[:, :, 2 * In:3 * In] + reverse_within_length(
                dx_cat[:, :, 3 * In:], al)
    return grads


def loss_and_gradients(params: PolicyParams, cfg: ModelConfig,
                       questions: SequenceBatch, answers: SequenceBatch,
                       actions: Array, targets: Array):
    """Summed squared error between targets and the taken actions' values.

    loss = sum_b (targets[b] - Q[b, actions[b]])^2, with gradients flowing
    only through Q.  Returns (loss, grads).
    """
    out, cache = forward(params, questions, answers)
    B = out.shape[0]
    picked = out[np.arange(B), actions]
    diff = picked - targets
    loss = float(diff @ diff)
    dq = np.zeros_like(out)
    dq[np.arange(B), actions] = 2.0 * diff
    grads = backward(dq, cache, params, cfg)
    return loss, grads


def relevance_scores(params: PolicyParams, questions: SequenceBatch,
                     answers: SequenceBatch) -> Array:
    """Softmax probability of action 1, used to rank candidate answers."""
    out = q_values(params, questions, answers)
    shifted = out - out.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e[:, 1] / e.sum(axis=1)


def greedy_actions(params: PolicyParams, questions: SequenceBatch,
                   answers: SequenceBatch) -> Array:
    """Argmax over action values; exact ties resolve to action 0."""
    return np.argmax(q_values(params, questions, answers), axis=1)
