"""Batched CNN layer primitives with forward and backward passes.

These are the package's hot kernels: each operation has a loop
implementation compiled by numba when that backend is active, and a
vectorized numpy twin used otherwise.  Both preserve the input dtype, so
training runs in float32 while gradient checks can use float64.

Conventions: activations are (batch, height, width, channels); conv kernels
are (out_channels, kh, kw, in_channels) with valid padding; max pooling is
2x2 stride 2, dropping odd trailing rows/columns, with ties routed to the
first element in row-major window order.
"""

from __future__ import annotations

import numpy as np

from favbot.backend import USE_NUMBA

# ---------------------------------------------------------------- loop twins


def _conv2d_forward_loops(x, k, b):
    n, h, w, cin = x.shape
    cout, kh, kw, _ = k.shape
    ho, wo = h - kh + 1, w - kw + 1
    out = np.zeros((n, ho, wo, cout), dtype=x.dtype)
    for bi in range(n):
        for o in range(cout):
            for i in range(ho):
                for j in range(wo):
                    acc = b[o]
                    for u in range(kh):
                        for v in range(kw):
                            for c in range(cin):
                                acc += x[bi, i + u, j + v, c] * k[o, u, v, c]
                    out[bi, i, j, o] = acc
    return out


def _conv2d_backward_loops(x, k, dy):
    n, h, w, cin = x.shape
    cout, kh, kw, _ = k.shape
    ho, wo = dy.shape[1], dy.shape[2]
    dx = np.zeros_like(x)
    dk = np.zeros_like(k)
    db = np.zeros_like(k[:, 0, 0, 0])
    for bi in range(n):
        for o in range(cout):
            for i in range(ho):
                for j in range(wo):
                    g = dy[bi, i, j, o]
                    db[o] += g
                    for u in range(kh):
                        for v in range(kw):
                            for c in range(cin):
                                dk[o, u, v, c] += g * x[bi, i + u, j + v, c]
                                dx[bi, i + u, j + v, c] += g * k[o, u, v, c]
    return dx, dk, db


def _maxpool2_forward_loops(x):
    n, h, w, c = x.shape
    ho, wo = h // 2, w // 2
    out = np.empty((n, ho, wo, c), dtype=x.dtype)
    idx = np.zeros((n, ho, wo, c), dtype=np.uint8)
    for bi in range(n):
        for i in range(ho):
            for j in range(wo):
                for ch in range(c):
                    best = x[bi, 2 * i, 2 * j, ch]
                    arg = np.uint8(0)
                    pos = 0
                    for u in range(2):
                        for v in range(2):
                            if pos > 0:
                                val = x[bi, 2 * i + u, 2 * j + v, ch]
                                if val > best:
                                    best = val
                                    arg = np.uint8(pos)
                            pos += 1
                    out[bi, i, j, ch] = best
                    idx[bi, i, j, ch] = arg
    return out, idx


def _maxpool2_backward_loops(idx, dy, h, w):
    n, ho, wo, c = dy.shape
    dx = np.zeros((n, h, w, c), dtype=dy.dtype)
    for bi in range(n):
        for i in range(ho):
            for j in range(wo):
                for ch in range(c):
                    a = idx[bi, i, j, ch]
                    dx[bi, 2 * i + a // 2, 2 * j + a % 2, ch] += dy[bi, i, j, ch]
    return dx


def _dense_forward_loops(x, w, b):
    n, din = x.shape
    dout = w.shape[1]
    out = np.zeros((n, dout), dtype=x.dtype)
    for bi in range(n):
        for o in range(dout):
            acc = b[o]
            for i in range(din):
                acc += x[bi, i] * w[i, o]
            out[bi, o] = acc
    return out


def _dense_backward_loops(x, w, dy):
    n, din = x.shape
    dout = w.shape[1]
    dx = np.zeros_like(x)
    dw = np.zeros_like(w)
    db = np.zeros_like(w[0])
    for bi in range(n):
        for o in range(dout):
            g = dy[bi, o]
            db[o] += g
            for i in range(din):
                dw[i, o] += g * x[bi, i]
                dx[bi, i] += g * w[i, o]
    return dx, dw, db


# --------------------------------------------------------------- numpy twins


def _conv2d_forward_numpy(x, k, b):
    win = np.lib.stride_tricks.sliding_window_view(x, (k.shape[1], k.shape[2]), axis=(1, 2))
    return np.einsum("nijcuv,ouvc->nijo", win, k, optimize=True) + b


def _conv2d_backward_numpy(x, k, dy):
    win = np.lib.stride_tricks.sliding_window_view(x, (k.shape[1], k.shape[2]), axis=(1, 2))
    dk = np.einsum("nijcuv,nijo->ouvc", win, dy, optimize=True)
    db = dy.sum(axis=(0, 1, 2))
    dx = np.zeros_like(x)
    ho, wo = dy.shape[1], dy.shape[2]
    for u in range(k.shape[1]):
        for v in range(k.shape[2]):
            dx[:, u : u + ho, v : v + wo, :] += np.tensordot(dy, k[:, u, v, :], axes=([3], [0]))
    return dx, dk, db


def _maxpool2_forward_numpy(x):
    n, h, w, c = x.shape
    ho, wo = h // 2, w // 2
    wins = (
        x[:, : 2 * ho, : 2 * wo, :]
        .reshape(n, ho, 2, wo, 2, c)
        .transpose(0, 1, 3, 5, 2, 4)
        .reshape(n, ho, wo, c, 4)
    )
    idx = wins.argmax(axis=-1).astype(np.uint8)  # first max wins, row-major
    out = np.take_along_axis(wins, idx[..., None].astype(np.int64), axis=-1)[..., 0]
    return out, idx


def _maxpool2_backward_numpy(idx, dy, h, w):
    n, ho, wo, c = dy.shape
    dxw = np.zeros((n, ho, wo, c, 4), dtype=dy.dtype)
    np.put_along_axis(dxw, idx[..., None].astype(np.int64), dy[..., None], axis=-1)
    dx = np.zeros((n, h, w, c), dtype=dy.dtype)
    dx[:, : 2 * ho, : 2 * wo, :] = (
        dxw.reshape(n, ho, wo, c, 2, 2)
        .transpose(0, 1, 4, 2, 5, 3)
        .reshape(n, 2 * ho, 2 * wo, c)
    )
    return dx


def _dense_forward_numpy(x, w, b):
    return x @ w + b


def _dense_backward_numpy(x, w, dy):
    return dy @ w.T, x.T @ dy, dy.sum(axis=0)


# ------------------------------------------------------------------ dispatch

if USE_NUMBA:
    import numba

    _jit = numba.njit(cache=True)
    conv2d_forward = _jit(_conv2d_forward_loops)
    conv2d_backward = _jit(_conv2d_backward_loops)
    maxpool2_forward = _jit(_maxpool2_forward_loops)
    maxpool2_backward = _jit(_maxpool2_backward_loops)
    dense_forward = _jit(_dense_forward_loops)
    dense_backward = _jit(_dense_backward_loops)
else:
    conv2d_forward = _conv2d_forward_numpy
    conv2d_backward = _conv2d_backward_numpy
    maxpool2_forward = _maxpool2_forward_numpy
    maxpool2_backward = _maxpool2_backward_numpy
    dense_forward = _dense_forward_numpy
    dense_backward = _dense_backward_numpy


# ------------------------------------------------- activations and the loss


def relu(x):
    return np.maximum(x, 0)


def relu_backward(x, dy):
    return np.where(x > 0, dy, np.zeros((), dtype=dy.dtype))


def softmax(logits):
    """Row-wise softmax, stable for arbitrary finite logits."""
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(logits, labels):
    """Mean sparse categorical cross-entropy and its gradient w.r.t. logits."""
    n = logits.shape[0]
    p = softmax(logits)
    picked = p[np.arange(n), labels]
    loss = float(-np.log(np.maximum(picked, np.finfo(p.dtype).tiny)).mean())
    dlogits = p.copy()
    dlogits[np.arange(n), labels] -= 1
    dlogits /= np.asarray(n, dtype=p.dtype)
    return loss, dlogits
