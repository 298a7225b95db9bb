"""Weight checkpoint files.

Layout: a magic line, a 4-byte little-endian header length, a canonical
JSON header (model dimensions, vector length, producing config hash), then
the flat weight vector as little-endian 64-bit floats.  Loading verifies
structure and sizes and hands back both the parameters and the header so
callers can check compatibility against their own config.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .encoding import dimension, flatten, unflatten
from .errors import CheckpointError
from .params import ModelConfig, PolicyParams

MAGIC = b"HRWV01\n"
FORMAT_VERSION = 1


def save_checkpoint(params, model_cfg: ModelConfig, path: str,
                    config_hash: str = "") -> None:
    """Write params (a PolicyParams or flat vector) with its metadata."""
    if isinstance(params, PolicyParams):
        vector = flatten(params)
    else:
        vector = np.asarray(params, dtype=np.float64)
    d = dimension(model_cfg)
    if vector.shape != (d,):
        raise CheckpointError(
            f"vector length {vector.shape} does not fit the model (need {d})")
    header = {
        "format_version": FORMAT_VERSION,
        "model": model_cfg.to_dict(),
        "dimension": d,
        "config_hash": config_hash,
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(vector.astype("<f8").tobytes())


def load_checkpoint(path: str, expect_model: ModelConfig | None = None,
                    expect_hash: str | None = None):
    """Read a checkpoint; returns (PolicyParams, header dict).

    When expect_model or expect_hash are given, mismatches raise instead
    of handing back weights that do not fit the caller's run.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if not raw.startswith(MAGIC):
        raise CheckpointError(f"{path}: not a weight checkpoint (bad magic)")
    at = len(MAGIC)
    if len(raw) < at + 4:
        raise CheckpointError(f"{path}: truncated header length")
    (header_len,) = struct.unpack("<I", raw[at:at + 4])
    at += 4
    if len(raw) < at + header_len:
        raise CheckpointError(f"{path}: truncated header")
    try:
        header = json.loads(raw[at:at + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: unreadable header ({exc})")
    at += header_len
    if header.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: unsupported format version {header.get('format_version')}")
    try:
        model_cfg = ModelConfig.from_dict(header["model"])
        d = int(header["dimension"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"{path}: malformed header ({exc})")
    if d != dimension(model_cfg):
        raise CheckpointError(
            f"{path}: header dimension {d} does not match its own model dims")
    payload = raw[at:]
    if len(payload) != 8 * d:
        raise CheckpointError(
            f"{path}: expected {8 * d} payload bytes, found {len(payload)}")
    if expect_model is not None and model_cfg != expect_model:
        raise CheckpointError(
            f"{path}: checkpoint model dims {header['model']} are incompatible "
            f"with the requested model {expect_model.to_dict()}")
    if expect_hash is not None and header.get("config_hash") != expect_hash:
        raise CheckpointError(
            f"{path}: config hash {header.get('config_hash')!r} "
            f"does not match expected {expect_hash!r}")
    vector = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    return unflatten(vector, model_cfg), header
