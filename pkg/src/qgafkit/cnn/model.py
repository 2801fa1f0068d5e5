"""Conv -> pool -> conv -> pool -> global-average-pool -> fc -> fc regressor.

Layer sizes are fixed::

    1x30x30 -conv3x3(8)-relu-> 8x30x30 -pool-> 8x15x15
            -conv3x3(16)-relu-> 16x15x15 -pool-> 16x7x7
            -gap-> 16 -fc-> 32 -relu-> 32 -fc-> 1

Parameters follow the (out, in, ...) weight layout.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from . import kernels

ARCHITECTURE = {
    "name": "conv-pool-gap-fc",
    "in_channels": 1,
    "conv_channels": [8, 16],
    "kernel": 3,
    "pad": 1,
    "pool": 2,
    "fc_hidden": 32,
    "outputs": 1,
}
PARAM_NAMES = (
    "conv1.weight", "conv1.bias",
    "conv2.weight", "conv2.bias",
    "fc1.weight", "fc1.bias",
    "fc2.weight", "fc2.bias",
)
LOSS_KINDS = ("MSE", "MAE")


def param_shapes() -> dict[str, tuple[int, ...]]:
    c1, c2 = ARCHITECTURE["conv_channels"]
    k = ARCHITECTURE["kernel"]
    h = ARCHITECTURE["fc_hidden"]
    return {
        "conv1.weight": (c1, ARCHITECTURE["in_channels"], k, k),
        "conv1.bias": (c1,),
        "conv2.weight": (c2, c1, k, k),
        "conv2.bias": (c2,),
        "fc1.weight": (h, c2),
        "fc1.bias": (h,),
        "fc2.weight": (ARCHITECTURE["outputs"], h),
        "fc2.bias": (ARCHITECTURE["outputs"],),
    }


def architecture_hash(input_size: int = 30) -> str:
    desc = dict(ARCHITECTURE, input_size=int(input_size),
                params=[[n, list(s)] for n, s in param_shapes().items()])
    return hashlib.sha256(json.dumps(desc, sort_keys=True).encode()).hexdigest()


def spatial_flow(input_size: int = 30) -> list[int]:
    """Feature-map widths: input, conv1, pool1, conv2, pool2."""
    p1 = input_size // 2
    return [input_size, input_size, p1, p1, p1 // 2]


class CnnModel:
    def __init__(self, params: dict[str, np.ndarray], input_size: int = 30):
        shapes = param_shapes()
        if set(params) != set(shapes):
            raise ValidationError(f"parameter set mismatch: {sorted(params)}")
        for name, shape in shapes.items():
            if tuple(params[name].shape) != shape:
                raise ValidationError(f"{name}: shape {params[name].shape} != {shape}")
        if input_size < 4:
            raise ValidationError("input_size must be >= 4")
        self.params = {n: np.array(params[n], dtype=np.float64) for n in PARAM_NAMES}
        self.input_size = int(input_size)

    @classmethod
    def initialize(cls, seed: int = 0, input_size: int = 30) -> "CnnModel":
        """Glorot-uniform weights, zero biases."""
        rng = np.random.default_rng(seed)
        params = {}
        for name, shape in param_shapes().items():
            if name.endswith("bias"):
                params[name] = np.zeros(shape)
                continue
            receptive = int(np.prod(shape[2:])) if len(shape) > 2 else 1
            fan_in, fan_out = shape[1] * receptive, shape[0] * receptive
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            params[name] = rng.uniform(-limit, limit, size=shape)
        return cls(params, input_size)

    @classmethod
    def zeros(cls, input_size: int = 30) -> "CnnModel":
        return cls({n: np.zeros(s) for n, s in param_shapes().items()}, input_size)

    @property
    def arch_hash(self) -> str:
        return architecture_hash(self.input_size)

    def copy(self) -> "CnnModel":
        return CnnModel({n: p.copy() for n, p in self.params.items()}, self.input_size)

    def num_parameters(self) -> int:
        return sum(p.size for p in self.params.values())

    def __call__(self, batch: np.ndarray) -> np.ndarray:
        return forward(self, batch)


@dataclass
class Cache:
    x: np.ndarray
    z1: np.ndarray
    a1: np.ndarray
    i1: np.ndarray
    p1: np.ndarray
    z2: np.ndarray
    a2: np.ndarray
    i2: np.ndarray
    g: np.ndarray
    h1: np.ndarray
    a3: np.ndarray


def _check_batch(model: CnnModel, batch) -> np.ndarray:
    x = np.ascontiguousarray(batch, dtype=np.float64)
    n = model.input_size
    if x.ndim != 4 or x.shape[1:] != (1, n, n):
        raise ValidationError(f"expected batch of shape (B, 1, {n}, {n}), got {x.shape}")
    if x.shape[0] == 0:
        raise ValidationError("empty batch")
    if not np.all(np.isfinite(x)):
        raise ValidationError("batch contains non-finite values")
    return x


def forward_cached(model: CnnModel, batch) -> tuple[np.ndarray, Cache]:
    k = kernels.backend
    p = model.params
    pad = ARCHITECTURE["pad"]
    x = _check_batch(model, batch)
    z1 = k.conv2d_forward(x, p["conv1.weight"], p["conv1.bias"], pad)
    a1 = np.maximum(z1, 0.0)
    p1, i1 = k.maxpool2_forward(a1)
    z2 = k.conv2d_forward(p1, p["conv2.weight"], p["conv2.bias"], pad)
    a2 = np.maximum(z2, 0.0)
    p2, i2 = k.maxpool2_forward(a2)
    g = p2.mean(axis=(2, 3))
    h1 = g @ p["fc1.weight"].T + p["fc1.bias"]
    a3 = np.maximum(h1, 0.0)
    out = a3 @ p["fc2.weight"].T + p["fc2.bias"]
    return out, Cache(x, z1, a1, i1, p1, z2, a2, i2, g, h1, a3)


def forward(model: CnnModel, batch) -> np.ndarray:
    """Predictions of shape (B, 1)."""
    return forward_cached(model, batch)[0]


def loss(pred, target, kind: str = "MSE") -> tuple[float, np.ndarray]:
    """Mean loss and its gradient with respect to ``pred`` (same shape as ``pred``)."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.size != target.size:
        raise ValidationError(f"pred has {pred.size} entries, target has {target.size}")
    kind = kind.upper()
    r = pred - target.reshape(pred.shape)
    n = r.size
    if kind == "MSE":
        return float(np.mean(r * r)), 2.0 * r / n
    if kind == "MAE":
        return float(np.mean(np.abs(r))), np.sign(r) / n
    raise ValidationError(f"loss kind must be one of {LOSS_KINDS}")


def backward_from_cache(model: CnnModel, cache: Cache, dout: np.ndarray) -> dict[str, np.ndarray]:
    k = kernels.backend
    p = model.params
    pad = ARCHITECTURE["pad"]
    dout = dout.reshape(-1, 1)
    grads = {
        "fc2.weight": dout.T @ cache.a3,
        "fc2.bias": dout.sum(axis=0),
    }
    dh1 = (dout @ p["fc2.weight"]) * (cache.h1 > 0)
    grads["fc1.weight"] = dh1.T @ cache.g
    grads["fc1.bias"] = dh1.sum(axis=0)
    dg = dh1 @ p["fc1.weight"]
    ho, wo = cache.i2.shape[2], cache.i2.shape[3]
    dp2 = np.broadcast_to((dg / (ho * wo))[:, :, None, None], cache.i2.shape)
    da2 = k.maxpool2_backward(np.ascontiguousarray(dp2), cache.i2, cache.a2.shape)
    dz2 = da2 * (cache.z2 > 0)
    dp1, grads["conv2.weight"], grads["conv2.bias"] = k.conv2d_backward(
        dz2, cache.p1, p["conv2.weight"], pad)
    da1 = k.maxpool2_backward(dp1, cache.i1, cache.a1.shape)
    dz1 = da1 * (cache.z1 > 0)
    _, grads["conv1.weight"], grads["conv1.bias"] = k.conv2d_backward(
        dz1, cache.x, p["conv1.weight"], pad, need_dx=False)
    return {n: np.ascontiguousarray(grads[n]) for n in PARAM_NAMES}


def backward(model: CnnModel, batch, targets, kind: str = "MSE") -> tuple[float, dict[str, np.ndarray]]:
    """Loss value and gradients of every parameter for one batch."""
    pred, cache = forward_cached(model, batch)
    value, dpred = loss(pred, targets, kind)
    return value, backward_from_cache(model, cache, dpred)


def activation_pattern(model: CnnModel, batch, targets=None) -> tuple[np.ndarray, ...]:
    """Every piecewise-linear branch decision the forward pass makes.

    Two parameter settings with the same pattern lie on the same linear piece,
    so finite differences between them are free of kink artifacts.
    """
    pred, c = forward_cached(model, batch)
    parts = [c.z1 > 0, c.i1, c.z2 > 0, c.i2, c.h1 > 0]
    if targets is not None:
        parts.append(np.sign(pred.ravel() - np.asarray(targets, dtype=np.float64).ravel()))
    return tuple(parts)
