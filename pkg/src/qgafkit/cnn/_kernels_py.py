"""Pure numpy conv / max-pool kernels (fallback when the extension is not built).

All arrays are float64, NCHW, C-contiguous. Convolutions are stride 1
cross-correlations with symmetric zero padding. Pooling is 2x2 stride 2 with
floor semantics; ties go to the first maximum in row-major window order.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

NAME = "python"


def _pad(x: np.ndarray, pad: int) -> np.ndarray:
    if pad == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))


def conv2d_forward(x, w, b, pad):
    k = w.shape[2]
    win = sliding_window_view(_pad(x, pad), (k, k), axis=(2, 3))
    out = np.tensordot(win, w, axes=([1, 4, 5], [1, 2, 3]))
    out = out.transpose(0, 3, 1, 2) + b[None, :, None, None]
    return np.ascontiguousarray(out)


def conv2d_backward(dout, x, w, pad, need_dx=True):
    k = w.shape[2]
    win = sliding_window_view(_pad(x, pad), (k, k), axis=(2, 3))
    db = dout.sum(axis=(0, 2, 3))
    dw = np.ascontiguousarray(np.tensordot(dout, win, axes=([0, 2, 3], [0, 2, 3])))
    if not need_dx:
        return None, dw, db
    dwin = sliding_window_view(_pad(dout, k - 1), (k, k), axis=(2, 3))
    dxp = np.tensordot(dwin, w[:, :, ::-1, ::-1], axes=([1, 4, 5], [0, 2, 3]))
    dxp = dxp.transpose(0, 3, 1, 2)
    h, wd = x.shape[2], x.shape[3]
    dx = np.ascontiguousarray(dxp[:, :, pad:pad + h, pad:pad + wd])
    return dx, dw, db


def _blocks(x):
    bsz, c, h, w = x.shape
    ho, wo = h // 2, w // 2
    v = x[:, :, :2 * ho, :2 * wo].reshape(bsz, c, ho, 2, wo, 2)
    return v.transpose(0, 1, 2, 4, 3, 5).reshape(bsz, c, ho, wo, 4)


def maxpool2_forward(x):
    blocks = _blocks(x)
    idx = blocks.argmax(axis=-1).astype(np.int8)
    out = np.take_along_axis(blocks, idx[..., None].astype(np.intp), axis=-1)[..., 0]
    return np.ascontiguousarray(out), idx


def maxpool2_backward(dout, idx, in_shape):
    bsz, c, h, w = in_shape
    ho, wo = idx.shape[2], idx.shape[3]
    blocks = np.zeros((bsz, c, ho, wo, 4), dtype=np.float64)
    np.put_along_axis(blocks, idx[..., None].astype(np.intp), dout[..., None], axis=-1)
    dx = np.zeros(in_shape, dtype=np.float64)
    dx[:, :, :2 * ho, :2 * wo] = (
        blocks.reshape(bsz, c, ho, wo, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(bsz, c, 2 * ho, 2 * wo)
    )
    return dx
