"""Flat-vector view of the policy parameters.

The colony optimizer searches over plain float vectors; these helpers map
between that view and the structured containers.  The coordinate order is
the canonical array order of PolicyParams.named_arrays(), with each matrix
read out row by row, so a vector written by one build of the package is
readable by another.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError
from .params import ModelConfig, PolicyParams

Array = np.ndarray


def dimension(cfg: ModelConfig) -> int:
    """Number of scalar parameters in a policy with these dimensions."""
    return sum(a.size for a in PolicyParams.zeros(cfg).arrays())


def flatten(params: PolicyParams) -> Array:
    return np.concatenate([a.ravel() for a in params.arrays()])


def unflatten(vector: Array, cfg: ModelConfig) -> PolicyParams:
    """Inverse of flatten(); validates the total length."""
    vector = np.asarray(vector, dtype=np.float64)
    if vector.ndim != 1:
        raise ShapeError(f"expected a flat vector, got shape {vector.shape}")
    params = PolicyParams.zeros(cfg)
    offset = 0
    for a in params.arrays():
        n = a.size
        if offset + n > vector.size:
            raise ShapeError(
                f"vector too short: need {dimension(cfg)}, got {vector.size}")
        a[...] = vector[offset:offset + n].reshape(a.shape)
        offset += n
    if offset != vector.size:
        raise ShapeError(
            f"vector too long: need {offset}, got {vector.size}")
    return params
