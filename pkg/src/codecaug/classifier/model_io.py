"""Model persistence: magic "ASCM", version, JSON config block,
little-endian tensor blob, CRC-32 checksum over everything before it.

Tensor dtypes are recorded per array, so a float32 training model and a
float64 test fixture both round-trip bit-exactly.
"""

import json
import struct
import zlib
from dataclasses import asdict

import numpy as np

from ..errors import ModelError
from .model import Model, ModelConfig, build_layers

MAGIC = b"ASCM"
VERSION = 1
_HEAD = struct.Struct("<4sHI")  # magic, version, json length


def _tensors(model: Model):
    arrays = list(model.parameters)
    if model.feature_norm is not None:
        mean, std = model.feature_norm
        arrays.append(np.asarray(mean, dtype=np.float64))
        arrays.append(np.asarray(std, dtype=np.float64))
    return arrays


def save_model(model: Model, path):
    arrays = _tensors(model)
    meta = {
        "config": {**asdict(model.config), "conv_channels": list(model.config.conv_channels)},
        "labels": list(model.labels),
        "has_norm": model.feature_norm is not None,
        "tensors": [{"shape": list(a.shape), "dtype": a.dtype.str} for a in arrays],
    }
    meta_json = json.dumps(meta, sort_keys=True).encode("utf-8")
    parts = [_HEAD.pack(MAGIC, VERSION, len(meta_json)), meta_json]
    for a in arrays:
        parts.append(np.ascontiguousarray(a).tobytes())
    body = b"".join(parts)
    with open(path, "wb") as fh:
        fh.write(body)
        fh.write(struct.pack("<I", zlib.crc32(body)))


def load_model(path, expect_outputs=None) -> Model:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEAD.size + 4:
        raise ModelError(f"{path}: file too short to be a model")
    magic, version, json_len = _HEAD.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ModelError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise ModelError(f"{path}: version mismatch (file {version}, supported {VERSION})")
    body, (stored_crc,) = raw[:-4], struct.unpack("<I", raw[-4:])
    if zlib.crc32(body) != stored_crc:
        raise ModelError(f"{path}: checksum mismatch (corrupt or truncated file)")

    try:
        meta = json.loads(body[_HEAD.size:_HEAD.size + json_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelError(f"{path}: bad config block: {exc}") from exc
    cfg = dict(meta["config"])
    cfg["conv_channels"] = tuple(cfg["conv_channels"])
    config = ModelConfig(**cfg)
    config.validate()
    if expect_outputs is not None and config.n_outputs != expect_outputs:
        raise ModelError(
            f"{path}: model has n_outputs={config.n_outputs}, expected {expect_outputs}"
        )

    layers = build_layers(config)  # zero-weight skeleton, overwritten below
    model = Model(config=config, layers=layers, labels=list(meta["labels"]))
    expected = model.parameters
    specs = meta["tensors"]
    n_params = len(expected)
    n_norm = 2 if meta["has_norm"] else 0
    if len(specs) != n_params + n_norm:
        raise ModelError(
            f"{path}: tensor count {len(specs)} != {n_params + n_norm} for this config"
        )

    offset = _HEAD.size + json_len
    loaded = []
    for spec in specs:
        dtype = np.dtype(spec["dtype"])
        shape = tuple(spec["shape"])
        nbytes = dtype.itemsize * int(np.prod(shape, dtype=np.int64)) if shape else dtype.itemsize
        chunk = body[offset:offset + nbytes]
        if len(chunk) != nbytes:
            raise ModelError(f"{path}: tensor blob truncated")
        loaded.append(np.frombuffer(chunk, dtype=dtype).reshape(shape).copy())
        offset += nbytes

    for idx, value in enumerate(loaded[:n_params]):
        if expected[idx].shape != value.shape:
            raise ModelError(
                f"{path}: tensor shape {value.shape} != expected {expected[idx].shape}"
            )
        # replace the array object inside its layer so the stored dtype wins
        _replace_param(model.layers, idx, value)
    if meta["has_norm"]:
        model.feature_norm = (loaded[n_params], loaded[n_params + 1])
    return model


def _replace_param(layers, flat_index, value):
    i = 0
    for layer in layers:
        for slot in range(len(layer.params)):
            if i == flat_index:
                layer.params[slot] = value
                return
            i += 1
    raise ModelError(f"parameter index {flat_index} out of range")
