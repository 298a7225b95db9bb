"""Seeded generator for a desk-scale answer-ranking task.

Each question belongs to one of a fixed set of topics.  Topic words share
a common prototype direction in embedding space (plus jitter), noise words
are unstructured, so "this answer is about the question's topic" is
readable from pooled embeddings.  Difficulty is controlled three ways:
positives carry only a weak topic signal (low answer_topic_fraction), a
slice of negatives borrows a few of the question's topic words
(confusion), and some positives are pure noise by chance.  That mix keeps
recall genuinely contested around the decision threshold instead of
saturating.

Every question group holds exactly one positive at a random slot among its
negatives, which makes the data usable for both classification and
ranking experiments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, EmbeddingStore, QAPair, save_dataset, save_embeddings
from .errors import ConfigError


@dataclass
class SyntheticSpec:
    n_questions: int = 200
    negatives: int = 9
    embedding_dim: int = 8
    n_topics: int = 20
    words_per_topic: int = 25
    n_noise_words: int = 150
    question_len: tuple = (3, 6)
    answer_len: tuple = (5, 10)
    question_topic_fraction: float = 0.6
    answer_topic_fraction: float = 0.25
    confusion: float = 0.10
    confusion_words: int = 2
    word_jitter: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.n_questions < 1 or self.negatives < 1:
            raise ConfigError("need at least one question and one negative")
        if self.n_topics < 2:
            raise ConfigError("need at least two topics to build negatives")
        if not 0.0 <= self.confusion <= 1.0:
            raise ConfigError("confusion must be in [0, 1]")


def _build_embeddings(spec: SyntheticSpec, rng: np.random.Generator) -> EmbeddingStore:
    vocab = {}
    rows = []
    prototypes = rng.normal(0.0, 1.0, (spec.n_topics, spec.embedding_dim))
    for k in range(spec.n_topics):
        for j in range(spec.words_per_topic):
            vocab[f"t{k}w{j}"] = len(rows)
            rows.append(prototypes[k] + spec.word_jitter
                        * rng.normal(0.0, 1.0, spec.embedding_dim))
    for m in range(spec.n_noise_words):
        vocab[f"nz{m}"] = len(rows)
        rows.append(rng.normal(0.0, 1.0, spec.embedding_dim))
    return EmbeddingStore(vocab, np.array(rows), source="random-seeded")


def _draw_tokens(spec: SyntheticSpec, rng: np.random.Generator, topic: int,
                 length_range, topic_fraction: float) -> list:
    lo, hi = length_range
    length = int(rng.integers(lo, hi + 1))
    tokens = []
    for _ in range(length):
        if rng.random() < topic_fraction:
            tokens.append(f"t{topic}w{int(rng.integers(spec.words_per_topic))}")
        else:
            tokens.append(f"nz{int(rng.integers(spec.n_noise_words))}")
    return tokens


def generate(spec: SyntheticSpec):
    """Build the (Dataset, EmbeddingStore) pair for one seed."""
    rng = np.random.default_rng(spec.seed)
    store = _build_embeddings(spec, rng)
    pairs = []
    for qi in range(spec.n_questions):
        qid = f"q{qi:04d}"
        topic = int(rng.integers(spec.n_topics))
        question = _draw_tokens(spec, rng, topic, spec.question_len,
                                spec.question_topic_fraction)
        positive_slot = int(rng.integers(spec.negatives + 1))
        for slot in range(spec.negatives + 1):
            if slot == positive_slot:
                answer = _draw_tokens(spec, rng, topic, spec.answer_len,
                                      spec.answer_topic_fraction)
                pairs.append(QAPair(qid, question, answer, 1))
            else:
                other = int(rng.integers(spec.n_topics - 1))
                if other >= topic:
                    other += 1
                answer = _draw_tokens(spec, rng, other, spec.answer_len,
                                      spec.answer_topic_fraction)
                if rng.random() < spec.confusion:
                    # borrow a few on-topic words so this negative reads
                    # like a weak positive
                    for _ in range(spec.confusion_words):
                        at = int(rng.integers(len(answer)))
                        answer[at] = f"t{topic}w{int(rng.integers(spec.words_per_topic))}"
                pairs.append(QAPair(qid, question, answer, 0))
    return Dataset(pairs, split="synthetic"), store


def generate_files(spec: SyntheticSpec, data_path: str, embeddings_path: str):
    """Generate and write both wire-format files; returns the in-memory pair."""
    dataset, store = generate(spec)
    save_dataset(dataset.pairs, data_path)
    save_embeddings(store, embeddings_path)
    return dataset, store
