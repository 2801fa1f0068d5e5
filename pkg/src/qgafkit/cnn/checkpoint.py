"""Binary checkpoints for a model and its Adam state.

Layout (little-endian)::

    b"QCNN"  version:u8  arch_hash:32 bytes  manifest_len:u32  manifest:JSON
    params:f64[...]  adam_m:f64[...]  adam_v:f64[...]

Blocks follow the parameter order listed in the manifest.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import FormatError
from .model import PARAM_NAMES, CnnModel, architecture_hash, param_shapes
from .optim import AdamState

MAGIC = b"QCNN"
VERSION = 1


def save_checkpoint(model: CnnModel, state: AdamState | None, path, extra: dict | None = None) -> None:
    state = state if state is not None else AdamState.for_model(model)
    manifest = {
        "input_size": model.input_size,
        "params": [[n, list(model.params[n].shape)] for n in PARAM_NAMES],
        "step": int(state.step),
    }
    if extra:
        manifest["extra"] = extra
    blob = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<B", VERSION))
        fh.write(bytes.fromhex(model.arch_hash))
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for block in (model.params, state.m, state.v):
            for n in PARAM_NAMES:
                fh.write(np.ascontiguousarray(block[n], dtype="<f8").tobytes())


def load_checkpoint(path, input_size: int | None = None) -> tuple[CnnModel, AdamState]:
    """Read a checkpoint; ``input_size`` rejects models built for another image width."""
    path = Path(path)
    data = path.read_bytes()
    if data[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic {data[:4]!r}")
    if len(data) < 41:
        raise FormatError(f"{path}: truncated header")
    if data[4] != VERSION:
        raise FormatError(f"{path}: unsupported checkpoint version {data[4]}")
    stored_hash = data[5:37].hex()
    (mlen,) = struct.unpack_from("<I", data, 37)
    off = 41 + mlen
    if len(data) < off:
        raise FormatError(f"{path}: truncated manifest")
    try:
        manifest = json.loads(data[41:off].decode("utf-8"))
        size = int(manifest["input_size"])
    except (ValueError, KeyError) as exc:
        raise FormatError(f"{path}: malformed manifest ({exc})") from None
    if stored_hash != architecture_hash(size):
        raise FormatError(f"{path}: architecture hash does not match this build")
    if input_size is not None and stored_hash != architecture_hash(input_size):
        raise FormatError(f"{path}: checkpoint is for {size}x{size} inputs, pipeline expects {input_size}x{input_size}")
    shapes = param_shapes()
    listed = [(n, tuple(s)) for n, s in manifest["params"]]
    if listed != [(n, shapes[n]) for n in PARAM_NAMES]:
        raise FormatError(f"{path}: parameter manifest does not match the architecture")
    count = sum(int(np.prod(s)) for _, s in listed)
    if len(data) != off + 3 * 8 * count:
        raise FormatError(f"{path}: payload length {len(data) - off} != expected {3 * 8 * count}")
    flat = np.frombuffer(data, dtype="<f8", offset=off).astype(np.float64)
    blocks = []
    pos = 0
    for _ in range(3):
        block = {}
        for n, s in listed:
            k = int(np.prod(s))
            block[n] = flat[pos:pos + k].reshape(s).copy()
            pos += k
        blocks.append(block)
    model = CnnModel(blocks[0], size)
    return model, AdamState(blocks[1], blocks[2], int(manifest["step"]))
