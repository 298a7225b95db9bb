"""Numerical core: recurrent encoder, attention pooling, dense head.

Everything here runs batched over padded (batch, time, feature) tensors in
float64.  Padding is handled by freeze-masking: past a sequence's true
length the hidden and cell states simply stop changing, and the attention
softmax zeroes the padded positions, so padded and unpadded runs produce
identical pooled sentence vectors.  Each forward returns a cache consumed
by the matching backward; backwards accumulate into caller-owned gradient
containers and return the gradient w.r.t. their input so layers can be
chained.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .params import AttentionParams, FeedForwardParams, LstmParams

Array = np.ndarray


def sigmoid(x: Array) -> Array:
    # bounding keeps exp() finite for extreme pre-activations; minimum and
    # maximum are plain ufuncs, much cheaper per call than np.clip dispatch
    return 1.0 / (1.0 + np.exp(np.minimum(np.maximum(-x, -500.0), 500.0)))


def relu(x: Array) -> Array:
    return np.maximum(x, 0.0)


@dataclass
class SequenceBatch:
    """Padded batch of embedded sequences.

    embeddings: (B, T, E) float64, zero past each row's length
    lengths:    (B,) int, all >= 1 and <= T
    mask:       (B, T) float64, 1.0 at valid positions
    """

    embeddings: Array
    lengths: Array
    mask: Array

    @classmethod
    def from_sequences(cls, sequences, max_len: int) -> "SequenceBatch":
        """Pad (or right-truncate) a list of (L, E) arrays into one batch."""
        if not sequences:
            raise ShapeError("cannot batch zero sequences")
        dim = sequences[0].shape[1]
        lengths = np.array([min(len(s), max_len) for s in sequences], dtype=np.int64)
        if (lengths < 1).any():
            raise ShapeError("every sequence needs at least one timestep")
        T = int(lengths.max())
        B = len(sequences)
        emb = np.zeros((B, T, dim))
        for b, seq in enumerate(sequences):
            if seq.ndim != 2 or seq.shape[1] != dim:
                raise ShapeError(f"sequence {b} has shape {seq.shape}, expected (*, {dim})")
            L = lengths[b]
            emb[b, :L] = seq[:L]
        mask = (np.arange(T)[None, :] < lengths[:, None]).astype(np.float64)
        return cls(emb, lengths, mask)

    @property
    def batch_size(self) -> int:
        return self.embeddings.shape[0]


def lstm_step(p: LstmParams, x: Array, h_prev: Array, c_prev: Array):
    """One recurrent update for a single timestep of a single sequence.

    Gate equations:
        i = sigmoid(W_i x + U_i h + b_i)        input gate
        f = sigmoid(W_f x + U_f h + b_f)        forget gate
        j = tanh(W_j x + U_j h + b_j)           cell candidate
        c = f * c_prev + i * j
        o = sigmoid(W_o x + U_o h + b_o)        output gate
        h = o * tanh(c)

    The batched path below computes the same thing with stacked weights;
    this form exists as the readable reference and is what the equivalence
    tests check against.
    """
    i = sigmoid(p.W_i @ x + p.U_i @ h_prev + p.b_i)
    f = sigmoid(p.W_f @ x + p.U_f @ h_prev + p.b_f)
    j = np.tanh(p.W_j @ x + p.U_j @ h_prev + p.b_j)
    o = sigmoid(p.W_o @ x + p.U_o @ h_prev + p.b_o)
    c = f * c_prev + i * j
    h = o * np.tanh(c)
    return h, c


def _stacked(p: LstmParams):
    """Gate weights stacked row-wise in [i, f, o, j] order."""
    W = np.concatenate([p.W_i, p.W_f, p.W_o, p.W_j], axis=0)
    U = np.concatenate([p.U_i, p.U_f, p.U_o, p.U_j], axis=0)
    b = np.concatenate([p.b_i, p.b_f, p.b_o, p.b_j])
    return W, U, b


def lstm_forward(x: Array, mask: Array, p: LstmParams):
    """Run one direction over a padded batch.

    x: (B, T, In), mask: (B, T).  Initial hidden and cell states are zero.
    Past a row's length the states freeze, so h_seq[b, t] for t >= length
    repeats the final valid state.

    Returns (h_seq (B, T, H), cache).
    """
    W, U, b = _stacked(p)
    return _lstm_run(x, mask, W, U, b)


def _lstm_run(x: Array, mask: Array, W: Array, U: Array, b: Array):
    """Recurrence over stacked gate weights; W is (4H, In), rows [i, f, o, j].

    The hidden width is read off W, so a block-diagonal W/U runs several
    independent cells in one loop (how blstm_forward fuses its directions).
    mask is (B, T) shared by every hidden column, or (B, T, H) when fused
    cells follow different freeze schedules (the question and answer stacks
    have different sentence lengths).
    """
    B, T, _ = x.shape
    H = W.shape[0] // 4
    Ut = np.ascontiguousarray(U.T)
    xW = x @ W.T + b  # (B, T, 4H), input contribution precomputed

    mcols = mask if mask.ndim == 3 else mask[:, :, None]
    inv_cols = 1.0 - mcols

    h = np.zeros((B, H))
    c = np.zeros((B, H))
    # h_seq[t] doubles as the next step's h_prev; c_seq likewise
    h_seq = np.empty((T, B, H))
    c_seq = np.empty((T, B, H))
    gates = np.empty((T, B, 4 * H))
    tanh_cnew = np.empty((T, B, H))
    # per-step work buffers, reused to keep the loop allocation-free
    cn = np.empty((B, H))
    t1 = np.empty((B, H))
    t2 = np.empty((B, H))

    for t in range(T):
        g = gates[t]
        np.matmul(h, Ut, out=g)
        g += xW[:, t]
        gs = g[:, :3 * H]
        # sigmoid on [i, f, o], in place; bound keeps exp finite
        np.negative(gs, out=gs)
        np.minimum(gs, 500.0, out=gs)
        np.exp(gs, out=gs)
        gs += 1.0
        np.reciprocal(gs, out=gs)
        gj = g[:, 3 * H:]
        np.tanh(gj, out=gj)
        i, f, o = g[:, :H], g[:, H:2 * H], g[:, 2 * H:3 * H]
        np.multiply(f, c, out=cn)
        np.multiply(i, gj, out=t1)
        cn += t1
        tc = tanh_cnew[t]
        np.tanh(cn, out=tc)
        m = mcols[:, t]
        im = inv_cols[:, t]
        # freeze-mask blend, written as m*new + (1-m)*old so that rows with
        # m exactly 1 or 0 take the corresponding operand bit for bit
        np.multiply(cn, m, out=t1)
        np.multiply(c, im, out=t2)
        c = c_seq[t]
        np.add(t1, t2, out=c)
        np.multiply(o, tc, out=t1)   # h_new
        t1 *= m
        np.multiply(h, im, out=t2)
        h = h_seq[t]
        np.add(t1, t2, out=h)

    cache = {"x": x, "mask": mcols, "inv_mask": inv_cols, "gates": gates,
             "tanh_cnew": tanh_cnew, "h_seq": h_seq, "c_seq": c_seq,
             "W": W, "U": U}
    return h_seq.transpose(1, 0, 2), cache


def lstm_backward(dh_seq: Array, cache: Array, grads: LstmParams) -> Array:
    """Backprop through lstm_forward.

    dh_seq: (B, T, H) gradient w.r.t. every output position.  Accumulates
    parameter gradients into ``grads`` and returns dx (B, T, In).
    """
    dx, dW, dU, db = _lstm_run_backward(dh_seq, cache)
    H = dW.shape[0] // 4
    grads.W_i += dW[:H]
    grads.W_f += dW[H:2 * H]
    grads.W_o += dW[2 * H:3 * H]
    grads.W_j += dW[3 * H:]
    grads.U_i += dU[:H]
    grads.U_f += dU[H:2 * H]
    grads.U_o += dU[2 * H:3 * H]
    grads.U_j += dU[3 * H:]
    grads.b_i += db[:H]
    grads.b_f += db[H:2 * H]
    grads.b_o += db[2 * H:3 * H]
    grads.b_j += db[3 * H:]
    return dx


def _lstm_run_backward(dh_seq: Array, cache):
    """Backprop through _lstm_run; returns (dx, dW, dU, db) unscattered."""
    x, mask, inv_mask = cache["x"], cache["mask"], cache["inv_mask"]
    gates, tanh_cnew = cache["gates"], cache["tanh_cnew"]
    h_seq, c_seq = cache["h_seq"], cache["c_seq"]
    W, U = cache["W"], cache["U"]
    B, T, In = x.shape
    H = tanh_cnew.shape[2]

    dW = np.zeros_like(W)
    dU = np.zeros_like(U)
    db = np.zeros(4 * H)
    dx = np.empty_like(x)
    dh = np.zeros((B, H))   # gradient flowing into h_t from the future
    dc = np.zeros((B, H))
    zeros = np.zeros((B, H))

    # reusable work buffers; the loop itself allocates nothing
    dz = np.empty((B, 4 * H))
    dzi, dzf = dz[:, :H], dz[:, H:2 * H]
    dzo, dzj = dz[:, 2 * H:3 * H], dz[:, 3 * H:]
    dht = np.empty((B, H))
    dcn = np.empty((B, H))
    tmp = np.empty((B, H))
    tmp2 = np.empty((B, H))
    pW = np.empty_like(W)
    pU = np.empty_like(U)
    dxt = np.empty((B, In))

    for t in range(T - 1, -1, -1):
        m = mask[:, t]
        im = inv_mask[:, t]
        a = gates[t]
        i, f, o = a[:, :H], a[:, H:2 * H], a[:, 2 * H:3 * H]
        j = a[:, 3 * H:]
        tc = tanh_cnew[t]
        h_prev = h_seq[t - 1] if t > 0 else zeros
        c_prev = c_seq[t - 1] if t > 0 else zeros

        np.add(dh, dh_seq[:, t], out=dht)
        np.multiply(dht, m, out=tmp)            # dh_masked
        np.multiply(tmp, tc, out=dzo)           # do
        np.multiply(tc, tc, out=dcn)
        np.subtract(1.0, dcn, out=dcn)
        dcn *= o
        dcn *= tmp                              # dh_masked * o * (1 - tc^2)
        np.multiply(dc, m, out=tmp2)
        dcn += tmp2                             # + dc_masked
        np.multiply(dcn, c_prev, out=dzf)       # df
        np.multiply(dcn, j, out=dzi)            # di
        np.multiply(dcn, i, out=dzj)            # dj

        dzi *= i
        np.subtract(1.0, i, out=tmp)
        dzi *= tmp
        dzf *= f
        np.subtract(1.0, f, out=tmp)
        dzf *= tmp
        dzo *= o
        np.subtract(1.0, o, out=tmp)
        dzo *= tmp
        np.multiply(j, j, out=tmp)
        np.subtract(1.0, tmp, out=tmp)
        dzj *= tmp

        np.matmul(dz.T, x[:, t], out=pW)
        dW += pW
        np.matmul(dz.T, h_prev, out=pU)
        dU += pU
        db += dz.sum(axis=0)
        np.matmul(dz, W, out=dxt)
        dx[:, t] = dxt
        # frozen rows pass their gradient straight through to t-1
        np.multiply(dht, im, out=tmp)
        np.matmul(dz, U, out=dh)
        dh += tmp
        np.multiply(dc, im, out=tmp)
        np.multiply(dcn, f, out=dc)
        dc += tmp

    return dx, dW, dU, db


def reverse_within_length(x: Array, lengths: Array) -> Array:
    """Reverse each row's first ``length`` timesteps; padding stays put."""
    B, T = x.shape[0], x.shape[1]
    idx = np.arange(T)[None, :]
    L = lengths[:, None]
    rev = np.where(idx < L, L - 1 - idx, idx)
    return x[np.arange(B)[:, None], rev]


def _merge_cells(cells):
    """Block-diagonal gate weights running several independent cells as one.

    ``cells`` is a list of LstmParams.  Within each gate's row block the
    cells sit side by side, so a fused cell of hidden width sum(H_c) keeps
    _lstm_run's [i, f, o, j] slab layout; cell c's rows read only its own
    input columns and hidden columns.  The off blocks stay zero, so the
    fused recurrence computes exactly the independent cells, at a fraction
    of the per-timestep dispatch cost.
    """
    Hf = sum(p.hidden_dim for p in cells)
    In_f = sum(p.input_dim for p in cells)
    W = np.zeros((4 * Hf, In_f))
    U = np.zeros((4 * Hf, Hf))
    b = np.empty(4 * Hf)
    xoff = hoff = 0
    for p in cells:
        H, In = p.hidden_dim, p.input_dim
        Wc, Uc, bc = _stacked(p)
        for g in range(4):
            rows = slice(g * Hf + hoff, g * Hf + hoff + H)
            src = slice(g * H, (g + 1) * H)
            W[rows, xoff:xoff + In] = Wc[src]
            U[rows, hoff:hoff + H] = Uc[src]
            b[rows] = bc[src]
        xoff += In
        hoff += H
    return W, U, b


def _scatter_cells(dW: Array, dU: Array, db: Array, gcells) -> None:
    """Split fused-run weight gradients back into per-cell containers.

    Inverse bookkeeping of _merge_cells: reads each cell's diagonal blocks
    and accumulates them; the off-block entries belong to zero weights and
    are dropped.
    """
    Hf = sum(g.hidden_dim for g in gcells)
    w_fields = ("W_i", "W_f", "W_o", "W_j")
    u_fields = ("U_i", "U_f", "U_o", "U_j")
    b_fields = ("b_i", "b_f", "b_o", "b_j")
    xoff = hoff = 0
    for gp in gcells:
        H, In = gp.hidden_dim, gp.input_dim
        for g in range(4):
            rows = slice(g * Hf + hoff, g * Hf + hoff + H)
            getattr(gp, w_fields[g])[...] += dW[rows, xoff:xoff + In]
            getattr(gp, u_fields[g])[...] += dU[rows, hoff:hoff + H]
            getattr(gp, b_fields[g])[...] += db[rows]
        xoff += In
        hoff += H


def blstm_forward(x: Array, mask: Array, lengths: Array, fwd: LstmParams, bwd: LstmParams):
    """Bidirectional layer: forward pass plus a reversed pass, concatenated.

    Returns (h (B, T, 2H), cache).  h[:, :, :H] reads left to right,
    h[:, :, H:] right to left, both aligned to the original positions.

    Both directions run in one fused recurrence: reversing within the true
    length keeps valid positions at the same indices, so the two cells share
    the mask and the freeze logic, and a block-diagonal weight layout lets a
    single _lstm_run cover them with half the per-timestep dispatch cost.
    """
    In = x.shape[2]
    W, U, b = _merge_cells([fwd, bwd])
    x_rev = reverse_within_length(x, lengths)
    x_cat = np.concatenate([x, x_rev], axis=2)
    h_cat, cache = _lstm_run(x_cat, mask, W, U, b)
    H = fwd.hidden_dim
    h = np.concatenate([h_cat[:, :, :H],
                        reverse_within_length(h_cat[:, :, H:], lengths)], axis=2)
    return h, {"cat": cache, "lengths": lengths, "H": H, "In": In}


def blstm_backward(dh: Array, cache, gfwd: LstmParams, gbwd: LstmParams) -> Array:
    H = cache["H"]
    In = cache["In"]
    lengths = cache["lengths"]
    dh_cat = np.concatenate([dh[:, :, :H],
                             reverse_within_length(dh[:, :, H:], lengths)], axis=2)
    dx_cat, dW, dU, db = _lstm_run_backward(dh_cat, cache["cat"])
    _scatter_cells(dW, dU, db, [gfwd, gbwd])
    return dx_cat[:, :, :In] + reverse_within_length(dx_cat[:, :, In:], lengths)


def encoder_forward(batch: SequenceBatch, layers):
    """Stack of bidirectional layers; layer l+1 consumes layer l's output."""
    h = batch.embeddings
    caches = []
    for fwd, bwd in layers:
        h, cache = blstm_forward(h, batch.mask, batch.lengths, fwd, bwd)
        caches.append(cache)
    return h, caches


def encoder_backward(dh: Array, caches, glayers) -> Array:
    for cache, (gfwd, gbwd) in zip(reversed(caches), reversed(glayers)):
        dh = blstm_backward(dh, cache, gfwd, gbwd)
    return dh


def masked_softmax(scores: Array, mask: Array) -> Array:
    """Softmax over axis 1 restricted to mask == 1 positions."""
    shifted = np.where(mask > 0, scores, -np.inf)
    m = shifted.max(axis=1, keepdims=True)
    e = np.exp(scores - m) * mask
    return e / e.sum(axis=1, keepdims=True)


def attention_forward(h: Array, mask: Array, p: AttentionParams):
    """Score every position, softmax over valid ones, pool the weighted sum.

    score_t = v . tanh(W h_t + b); pooled = sum_t alpha_t h_t.
    Returns (pooled (B, D), cache).
    """
    proj = np.tanh(h @ p.W.T + p.b)           # (B, T, A)
    scores = proj @ p.v                       # (B, T)
    alpha = masked_softmax(scores, mask)
    pooled = np.einsum("bt,btd->bd", alpha, h)
    return pooled, {"h": h, "proj": proj, "alpha": alpha}


def attention_backward(dpooled: Array, cache, p: AttentionParams, g: AttentionParams) -> Array:
    h, proj, alpha = cache["h"], cache["proj"], cache["alpha"]
    dalpha = np.einsum("bd,btd->bt", dpooled, h)
    dh = alpha[:, :, None] * dpooled[:, None, :]
    # softmax backward; padded positions have alpha == 0 so they drop out
    dscores = alpha * (dalpha - (alpha * dalpha).sum(axis=1, keepdims=True))
    g.v += np.einsum("bt,bta->a", dscores, proj)
    dproj = dscores[:, :, None] * p.v[None, None, :]
    dz = dproj * (1.0 - proj * proj)
    g.W += np.einsum("bta,btd->ad", dz, h)
    g.b += dz.sum(axis=(0, 1))
    dh += dz @ p.W
    return dh


def dense_forward(features: Array, p: FeedForwardParams):
    """ReLU hidden layers, linear output.  Returns (out (B, K), cache)."""
    acts = [features]
    pre = []
    a = features
    for k, (W, b) in enumerate(zip(p.weights, p.biases)):
        z = a @ W.T + b
        pre.append(z)
        a = z if k == p.n_layers - 1 else relu(z)
        acts.append(a)
    return a, {"acts": acts, "pre": pre}


def dense_backward(dout: Array, cache, p: FeedForwardParams, g: FeedForwardParams) -> Array:
    acts, pre = cache["acts"], cache["pre"]
    da = dout
    for k in range(p.n_layers - 1, -1, -1):
        dz = da if k == p.n_layers - 1 else da * (pre[k] > 0)
        g.weights[k] += dz.T @ acts[k]
        g.biases[k] += dz.sum(axis=0)
        da = dz @ p.weights[k]
    return da


def attention_pool(hidden_seq: Array, p: AttentionParams):
    """Single-sequence attention pooling.

    hidden_seq: (T, D).  Returns (pooled (D,), weights (T,)); the weights
    are nonnegative and sum to 1.
    """
    h = np.asarray(hidden_seq, dtype=np.float64)
    if h.ndim != 2 or h.shape[0] < 1:
        raise ShapeError(f"expected a (T, D) sequence, got shape {h.shape}")
    mask = np.ones((1, h.shape[0]))
    pooled, cache = attention_forward(h[None], mask, p)
    return pooled[0], cache["alpha"][0]


def similarity_forward(q_pooled: Array, a_pooled: Array, p: FeedForwardParams) -> Array:
    """Action values for one pooled (question, answer) pair.

    The dense head consumes [q, a, |q - a|] and returns the two action
    values (wrong-answer, right-answer).
    """
    q_pooled = np.asarray(q_pooled, dtype=np.float64)
    a_pooled = np.asarray(a_pooled, dtype=np.float64)
    if q_pooled.shape != a_pooled.shape:
        raise ShapeError(
            f"pooled vectors disagree: {q_pooled.shape} vs {a_pooled.shape}")
    feat = np.concatenate([q_pooled, a_pooled, np.abs(q_pooled - a_pooled)])
    out, _ = dense_forward(feat[None], p)
    return out[0]
