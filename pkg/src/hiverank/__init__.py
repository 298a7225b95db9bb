"""hiverank: answer-pair ranking with colony pretraining and an
imbalance-aware reinforcement trainer.

The model is a pair of attention-pooled bidirectional LSTM encoders over a
question and a candidate answer, joined through a dense similarity head
that yields two action values.  Weights can be pretrained by a bee-colony
search over the flat parameter vector (with an optional mutual-learning
neighbor rule) and are then trained episode by episode with asymmetric
class rewards, so the rare positive pairs keep their pull against the
majority negatives.  Rankings are scored with MAP and MRR.
"""

from .bees import ColonyConfig, run_abc
from .checkpoint import load_checkpoint, save_checkpoint
from .config import RunConfig
from .data import Dataset, EmbeddedDataset, EmbeddingStore, load_dataset, load_embeddings
from .encoding import dimension, flatten, unflatten
from .fitness import make_training_fitness, pretrain_weights
from .metrics import map_score, mrr_score, rank_dataset
from .params import ModelConfig, PolicyParams
from .policy import q_values, relevance_scores
from .rl import TrainConfig, minority_recall, train, train_mse_baseline
from .synthetic import SyntheticSpec, generate

__version__ = "0.1.0"

__all__ = [
    "ColonyConfig", "run_abc", "load_checkpoint", "save_checkpoint",
    "RunConfig", "Dataset", "EmbeddedDataset", "EmbeddingStore",
    "load_dataset", "load_embeddings", "dimension", "flatten", "unflatten",
    "make_training_fitness", "pretrain_weights", "map_score", "mrr_score",
    "rank_dataset", "ModelConfig", "PolicyParams", "q_values",
    "relevance_scores", "TrainConfig", "minority_recall", "train",
    "train_mse_baseline", "SyntheticSpec", "generate", "__version__",
]
