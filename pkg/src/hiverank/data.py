"""Dataset and embedding I/O.

Wire formats are deliberately plain text so fixtures stay diffable:

* pair files: UTF-8 tab-separated ``qid<TAB>question<TAB>answer<TAB>label``,
  one pair per line, label 0 or 1;
* embedding files: a ``V D`` header line, then V lines of
  ``token v_1 ... v_D``.

Tokenization is lowercased whitespace splitting.  Positive pairs (label 1)
are the minority class by definition, not by count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataFormatError, ShapeError
from .layers import SequenceBatch

Array = np.ndarray


def tokenize(text: str) -> list:
    return text.lower().split()


@dataclass
class QAPair:
    question_id: str
    question: list
    answer: list
    label: int

    @property
    def minority(self) -> bool:
        return self.label == 1


@dataclass
class Dataset:
    pairs: list
    split: str = "train"
    _groups: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for idx, pair in enumerate(self.pairs):
            self._groups.setdefault(pair.question_id, []).append(idx)

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def labels(self) -> Array:
        return np.array([p.label for p in self.pairs], dtype=np.int64)

    @property
    def positive_fraction(self) -> float:
        if not self.pairs:
            return 0.0
        return sum(p.label for p in self.pairs) / len(self.pairs)

    @property
    def question_ids(self) -> list:
        return list(self._groups.keys())

    def group(self, question_id: str) -> list:
        """Indices of this question's candidate answers, in file order."""
        return list(self._groups[question_id])

    def summary(self) -> str:
        return (f"{len(self.pairs)} pairs, {len(self._groups)} questions, "
                f"{100.0 * self.positive_fraction:.1f}% positive ({self.split})")


def load_dataset(path: str, split: str = "train") -> Dataset:
    """Parse a tab-separated pair file, validating every line."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise DataFormatError(
                    f"expected 4 tab-separated fields, got {len(fields)}",
                    path=path, line=lineno)
            qid, question, answer, label_text = fields
            if label_text not in ("0", "1"):
                raise DataFormatError(
                    f"label must be 0 or 1, got {label_text!r}",
                    path=path, line=lineno)
            q_tokens = tokenize(question)
            a_tokens = tokenize(answer)
            if not q_tokens or not a_tokens:
                raise DataFormatError(
                    "question and answer must each have at least one token",
                    path=path, line=lineno)
            pairs.append(QAPair(qid, q_tokens, a_tokens, int(label_text)))
    if not pairs:
        raise DataFormatError("no pairs found", path=path)
    return Dataset(pairs, split=split)


def save_dataset(pairs, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(f"{pair.question_id}\t{' '.join(pair.question)}\t"
                     f"{' '.join(pair.answer)}\t{pair.label}\n")


@dataclass
class EmbeddingStore:
    """Token -> dense vector lookup; unknown tokens map to the zero vector."""

    vocab: dict
    matrix: Array
    source: str = "file"

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def vector(self, token: str) -> Array:
        idx = self.vocab.get(token)
        if idx is None:
            return np.zeros(self.dim)
        return self.matrix[idx]

    def embed(self, tokens) -> Array:
        """(L, dim) array for a token list; OOV rows are zero."""
        if not tokens:
            raise ShapeError("cannot embed an empty token list")
        out = np.zeros((len(tokens), self.dim))
        for i, tok in enumerate(tokens):
            idx = self.vocab.get(tok)
            if idx is not None:
                out[i] = self.matrix[idx]
        return out


def load_embeddings(path: str) -> EmbeddingStore:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split()
        if len(header) != 2:
            raise DataFormatError("header must be 'V D'", path=path, line=1)
        try:
            vocab_size, dim = int(header[0]), int(header[1])
        except ValueError:
            raise DataFormatError(f"non-integer header {header!r}", path=path, line=1)
        if vocab_size < 1 or dim < 1:
            raise DataFormatError("V and D must be positive", path=path, line=1)
        vocab = {}
        matrix = np.zeros((vocab_size, dim))
        for row in range(vocab_size):
            lineno = row + 2
            line = fh.readline()
            if not line:
                raise DataFormatError(
                    f"expected {vocab_size} vector rows, file ended after {row}",
                    path=path, line=lineno)
            parts = line.split()
            if len(parts) != dim + 1:
                raise DataFormatError(
                    f"expected token plus {dim} values, got {len(parts)} fields",
                    path=path, line=lineno)
            token = parts[0]
            if token in vocab:
                raise DataFormatError(f"duplicate token {token!r}", path=path, line=lineno)
            try:
                matrix[row] = [float(v) for v in parts[1:]]
            except ValueError:
                raise DataFormatError("non-numeric vector value", path=path, line=lineno)
            vocab[token] = row
    return EmbeddingStore(vocab, matrix)


def save_embeddings(store: EmbeddingStore, path: str) -> None:
    tokens = sorted(store.vocab, key=store.vocab.get)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{store.size} {store.dim}\n")
        for token in tokens:
            row = " ".join(repr(float(v)) for v in store.matrix[store.vocab[token]])
            fh.write(f"{token} {row}\n")


def embed_pair(pair: QAPair, store: EmbeddingStore, max_len: int):
    """Embed one pair, truncating both sides at max_len tokens."""
    q = store.embed(pair.question[:max_len])
    a = store.embed(pair.answer[:max_len])
    return q, a


@dataclass
class EmbeddedDataset:
    """The whole dataset pre-embedded into padded tensors.

    Batching then reduces to row indexing, which is what keeps the
    training loop's per-step cost flat.
    """

    q_emb: Array    # (N, Tq, E)
    q_len: Array
    q_mask: Array
    a_emb: Array    # (N, Ta, E)
    a_len: Array
    a_mask: Array
    labels: Array   # (N,) int

    @classmethod
    def build(cls, dataset: Dataset, store: EmbeddingStore, max_len: int) -> "EmbeddedDataset":
        q_seqs = []
        a_seqs = []
        for pair in dataset.pairs:
            q, a = embed_pair(pair, store, max_len)
            q_seqs.append(q)
            a_seqs.append(a)
        qb = SequenceBatch.from_sequences(q_seqs, max_len)
        ab = SequenceBatch.from_sequences(a_seqs, max_len)
        return cls(qb.embeddings, qb.lengths, qb.mask,
                   ab.embeddings, ab.lengths, ab.mask,
                   dataset.labels)

    def __len__(self) -> int:
        return self.labels.shape[0]

    def batch(self, indices) -> tuple:
        """(question SequenceBatch, answer SequenceBatch) for these rows.

        Time axes are trimmed to the longest sequence actually present in
        the batch; freeze-masking makes the encoder's output independent of
        trailing padding, so this only cuts wasted timesteps.
        """
        idx = np.asarray(indices)
        q_len = self.q_len[idx]
        a_len = self.a_len[idx]
        tq = int(q_len.max())
        ta = int(a_len.max())
        qb = SequenceBatch(self.q_emb[idx, :tq], q_len, self.q_mask[idx, :tq])
        ab = SequenceBatch(self.a_emb[idx, :ta], a_len, self.a_mask[idx, :ta])
        return qb, ab
