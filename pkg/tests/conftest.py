"""Shared fixtures: a small model and a hand-sized embedded dataset.

Everything here is deterministic; tests that need randomness build their
own seeded generators so failures replay exactly.
"""

import numpy as np
import pytest

from hiverank.data import Dataset, EmbeddedDataset, EmbeddingStore, QAPair
from hiverank.params import ModelConfig


@pytest.fixture
def tiny_cfg():
    return ModelConfig(embedding_dim=3, hidden_dim=2, attn_dim=2,
                       dense_hidden=(4,), blstm_layers=1, max_len=6)


def make_store(dim=3, seed=0):
    rng = np.random.default_rng(seed)
    tokens = [f"w{i}" for i in range(12)]
    vocab = {tok: i for i, tok in enumerate(tokens)}
    return EmbeddingStore(vocab, rng.normal(0.0, 1.0, (len(tokens), dim)))


def make_dataset():
    """Three questions, four candidates each, one positive per question."""
    pairs = []
    for qi in range(3):
        qid = f"q{qi}"
        question = [f"w{qi}", f"w{qi + 3}"]
        pos = qi % 4
        for slot in range(4):
            answer = [f"w{(qi + slot) % 12}", f"w{(qi + slot + 5) % 12}", "w11"]
            pairs.append(QAPair(qid, question, answer, int(slot == pos)))
    return Dataset(pairs, split="fixture")


@pytest.fixture
def tiny_dataset():
    return make_dataset()


@pytest.fixture
def tiny_embedded(tiny_cfg, tiny_dataset):
    return EmbeddedDataset.build(tiny_dataset, make_store(tiny_cfg.embedding_dim),
                                 tiny_cfg.max_len)
