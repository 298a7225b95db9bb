"""Parameter containers for the pair-similarity network.

The trainable state is grouped exactly as the architecture is wired: one
recurrent encoder stack per sentence (question and answer), one attention
head per sentence, and a shared dense similarity head.  Every container
knows how to enumerate its arrays in a fixed canonical order, which is what
the flat-vector encoding and the gradient bookkeeping are built on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

Array = np.ndarray


@dataclass(frozen=True)
class ModelConfig:
    """Dimensions of the similarity network."""

    embedding_dim: int = 60
    hidden_dim: int = 16
    attn_dim: int = 16
    dense_hidden: tuple = (8,)
    blstm_layers: int = 2
    max_len: int = 80
    num_actions: int = 2

    def __post_init__(self):
        for name in ("embedding_dim", "hidden_dim", "attn_dim", "blstm_layers", "max_len"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.num_actions != 2:
            raise ConfigError("the similarity head is a two-action classifier")
        if any(w < 1 for w in self.dense_hidden):
            raise ConfigError("dense hidden widths must be >= 1")
        # tuple() so JSON round-trips (lists) compare equal after from_dict
        object.__setattr__(self, "dense_hidden", tuple(int(w) for w in self.dense_hidden))

    @property
    def pooled_dim(self) -> int:
        return 2 * self.hidden_dim

    @property
    def dense_dims(self) -> tuple:
        return (3 * self.pooled_dim, *self.dense_hidden, self.num_actions)

    def layer_input_dim(self, layer: int) -> int:
        return self.embedding_dim if layer == 0 else self.pooled_dim

    def to_dict(self) -> dict:
        return {
            "embedding_dim": self.embedding_dim,
            "hidden_dim": self.hidden_dim,
            "attn_dim": self.attn_dim,
            "dense_hidden": list(self.dense_hidden),
            "blstm_layers": self.blstm_layers,
            "max_len": self.max_len,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(
            embedding_dim=int(d["embedding_dim"]),
            hidden_dim=int(d["hidden_dim"]),
            attn_dim=int(d["attn_dim"]),
            dense_hidden=tuple(d["dense_hidden"]),
            blstm_layers=int(d["blstm_layers"]),
            max_len=int(d["max_len"]),
        )


@dataclass
class LstmParams:
    """Gate weights of one recurrent cell.

    W_* act on the input, U_* on the previous hidden state, b_* are biases;
    the gate order (input, forget, candidate, output) is fixed and is the
    order used when the cell is flattened.
    """

    W_i: Array
    W_f: Array
    W_j: Array
    W_o: Array
    U_i: Array
    U_f: Array
    U_j: Array
    U_o: Array
    b_i: Array
    b_f: Array
    b_j: Array
    b_o: Array

    @classmethod
    def zeros(cls, input_dim: int, hidden_dim: int) -> "LstmParams":
        w = lambda: np.zeros((hidden_dim, input_dim))
        u = lambda: np.zeros((hidden_dim, hidden_dim))
        b = lambda: np.zeros(hidden_dim)
        return cls(w(), w(), w(), w(), u(), u(), u(), u(), b(), b(), b(), b())

    @classmethod
    def glorot(cls, input_dim: int, hidden_dim: int, rng: np.random.Generator) -> "LstmParams":
        lim_w = math.sqrt(6.0 / (input_dim + hidden_dim))
        lim_u = math.sqrt(6.0 / (2 * hidden_dim))
        w = lambda: rng.uniform(-lim_w, lim_w, (hidden_dim, input_dim))
        u = lambda: rng.uniform(-lim_u, lim_u, (hidden_dim, hidden_dim))
        b = lambda: np.zeros(hidden_dim)
        return cls(w(), w(), w(), w(), u(), u(), u(), u(), b(), b(), b(), b())

    @property
    def hidden_dim(self) -> int:
        return self.W_i.shape[0]

    @property
    def input_dim(self) -> int:
        return self.W_i.shape[1]

    def arrays(self):
        yield from (self.W_i, self.W_f, self.W_j, self.W_o,
                    self.U_i, self.U_f, self.U_j, self.U_o,
                    self.b_i, self.b_f, self.b_j, self.b_o)

    def named_arrays(self, prefix: str):
        names = ("W_i", "W_f", "W_j", "W_o", "U_i", "U_f", "U_j", "U_o",
                 "b_i", "b_f", "b_j", "b_o")
        for name, arr in zip(names, self.arrays()):
            yield f"{prefix}.{name}", arr


@dataclass
class AttentionParams:
    """One attention head: projection matrix, bias, and score vector."""

    W: Array  # (attn_dim, 2*hidden)
    b: Array  # (attn_dim,)
    v: Array  # (attn_dim,) reduces the tanh projection to a scalar score

    @classmethod
    def zeros(cls, attn_dim: int, pooled_dim: int) -> "AttentionParams":
        return cls(np.zeros((attn_dim, pooled_dim)), np.zeros(attn_dim), np.zeros(attn_dim))

    @classmethod
    def glorot(cls, attn_dim: int, pooled_dim: int, rng: np.random.Generator) -> "AttentionParams":
        lim = math.sqrt(6.0 / (attn_dim + pooled_dim))
        return cls(rng.uniform(-lim, lim, (attn_dim, pooled_dim)),
                   np.zeros(attn_dim),
                   rng.uniform(-lim, lim, attn_dim))

    def arrays(self):
        yield from (self.W, self.b, self.v)

    def named_arrays(self, prefix: str):
        for name, arr in zip(("W", "b", "v"), self.arrays()):
            yield f"{prefix}.{name}", arr


@dataclass
class FeedForwardParams:
    """Dense similarity head; hidden layers use ReLU, the last is linear."""

    weights: list  # each (out_dim, in_dim)
    biases: list   # each (out_dim,)

    @classmethod
    def zeros(cls, dims) -> "FeedForwardParams":
        ws = [np.zeros((o, i)) for i, o in zip(dims[:-1], dims[1:])]
        bs = [np.zeros(o) for o in dims[1:]]
        return cls(ws, bs)

    @classmethod
    def glorot(cls, dims, rng: np.random.Generator) -> "FeedForwardParams":
        ws = []
        for i, o in zip(dims[:-1], dims[1:]):
            lim = math.sqrt(6.0 / (i + o))
            ws.append(rng.uniform(-lim, lim, (o, i)))
        bs = [np.zeros(o) for o in dims[1:]]
        return cls(ws, bs)

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def arrays(self):
        for w, b in zip(self.weights, self.biases):
            yield w
            yield b

    def named_arrays(self, prefix: str):
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            yield f"{prefix}.layer{k}.W", w
            yield f"{prefix}.layer{k}.b", b


@dataclass
class PolicyParams:
    """Full trainable state of the policy network.

    ``question_layers`` / ``answer_layers`` hold (forward, backward) cell
    pairs, one per stacked recurrent layer.  Gradients reuse this container:
    a gradient is just a PolicyParams whose arrays hold partial derivatives.
    """

    question_layers: list  # [(LstmParams fwd, LstmParams bwd), ...]
    answer_layers: list
    question_attention: AttentionParams
    answer_attention: AttentionParams
    head: FeedForwardParams

    @classmethod
    def zeros(cls, cfg: ModelConfig) -> "PolicyParams":
        def stack():
            return [(LstmParams.zeros(cfg.layer_input_dim(l), cfg.hidden_dim),
                     LstmParams.zeros(cfg.layer_input_dim(l), cfg.hidden_dim))
                    for l in range(cfg.blstm_layers)]
        return cls(stack(), stack(),
                   AttentionParams.zeros(cfg.attn_dim, cfg.pooled_dim),
                   AttentionParams.zeros(cfg.attn_dim, cfg.pooled_dim),
                   FeedForwardParams.zeros(cfg.dense_dims))

    @classmethod
    def glorot(cls, cfg: ModelConfig, rng: np.random.Generator) -> "PolicyParams":
        def stack():
            return [(LstmParams.glorot(cfg.layer_input_dim(l), cfg.hidden_dim, rng),
                     LstmParams.glorot(cfg.layer_input_dim(l), cfg.hidden_dim, rng))
                    for l in range(cfg.blstm_layers)]
        return cls(stack(), stack(),
                   AttentionParams.glorot(cfg.attn_dim, cfg.pooled_dim, rng),
                   AttentionParams.glorot(cfg.attn_dim, cfg.pooled_dim, rng),
                   FeedForwardParams.glorot(cfg.dense_dims, rng))

    def arrays(self):
        for name, arr in self.named_arrays():
            yield arr

    def named_arrays(self):
        """Arrays in flattening order: question stack (forward cell before
        backward, layer by layer), answer stack, question attention, answer
        attention, dense head; matrices are read out row by row."""
        for l, (fwd, bwd) in enumerate(self.question_layers):
            yield from fwd.named_arrays(f"question.layer{l}.forward")
            yield from bwd.named_arrays(f"question.layer{l}.backward")
        for l, (fwd, bwd) in enumerate(self.answer_layers):
            yield from fwd.named_arrays(f"answer.layer{l}.forward")
            yield from bwd.named_arrays(f"answer.layer{l}.backward")
        yield from self.question_attention.named_arrays("question.attention")
        yield from self.answer_attention.named_arrays("answer.attention")
        yield from self.head.named_arrays("head")

    def copy(self) -> "PolicyParams":
        def lcopy(p: LstmParams) -> LstmParams:
            return LstmParams(*(a.copy() for a in p.arrays()))
        return PolicyParams(
            [(lcopy(f), lcopy(b)) for f, b in self.question_layers],
            [(lcopy(f), lcopy(b)) for f, b in self.answer_layers],
            AttentionParams(*(a.copy() for a in self.question_attention.arrays())),
            AttentionParams(*(a.copy() for a in self.answer_attention.arrays())),
            FeedForwardParams([w.copy() for w in self.head.weights],
                              [b.copy() for b in self.head.biases]),
        )


def sgd_step(params: PolicyParams, grads: PolicyParams, learning_rate: float) -> None:
    """In-place gradient-descent update; the caller owns the mutation."""
    for p, g in zip(params.arrays(), grads.arrays()):
        p -= learning_rate * g


def all_finite(params: PolicyParams) -> bool:
    return all(np.isfinite(a).all() for a in params.arrays())
