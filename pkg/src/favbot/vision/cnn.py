"""Four-class target-zone CNN: definition, training, and inference.

Architecture (valid padding, 2x2 stride-2 max pooling):

    30x40x1 -> conv 3x3 x6 + ReLU -> pool -> 14x19x6
            -> conv 3x3 x4 + ReLU -> pool -> 6x8x4
            -> flatten 192 -> dense 6 + ReLU -> dense 4 + softmax

Training is plain mini-batch Adam on sparse categorical cross-entropy,
written against the layer kernels in this package; given a seed (and a
backend) the whole run is bitwise reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from favbot.vision import kernels as K

INPUT_H = 30
INPUT_W = 40
N_CLASSES = 4
CONV1_FILTERS = 6
CONV2_FILTERS = 4
DENSE1_UNITS = 6
FLAT_DIM = 6 * 8 * CONV2_FILTERS  # 192 after the second pool

PARAM_SHAPES = {
    "conv1_k": (CONV1_FILTERS, 3, 3, 1),
    "conv1_b": (CONV1_FILTERS,),
    "conv2_k": (CONV2_FILTERS, 3, 3, CONV1_FILTERS),
    "conv2_b": (CONV2_FILTERS,),
    "dense1_w": (FLAT_DIM, DENSE1_UNITS),
    "dense1_b": (DENSE1_UNITS,),
    "dense2_w": (DENSE1_UNITS, N_CLASSES),
    "dense2_b": (N_CLASSES,),
}


@dataclass
class CnnParams:
    """All learnable tensors; shapes are fixed by the architecture."""

    conv1_k: np.ndarray
    conv1_b: np.ndarray
    conv2_k: np.ndarray
    conv2_b: np.ndarray
    dense1_w: np.ndarray
    dense1_b: np.ndarray
    dense2_w: np.ndarray
    dense2_b: np.ndarray

    def __post_init__(self):
        for name, shape in PARAM_SHAPES.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
            if not np.isfinite(arr).all():
                raise ValueError(f"{name} contains non-finite values")

    def tensors(self) -> list[tuple[str, np.ndarray]]:
        return [(f.name, getattr(self, f.name)) for f in fields(self)]

    def astype(self, dtype) -> "CnnParams":
        return CnnParams(**{n: a.astype(dtype) for n, a in self.tensors()})

    def copy(self) -> "CnnParams":
        return CnnParams(**{n: a.copy() for n, a in self.tensors()})

    def allclose(self, other: "CnnParams", **kw) -> bool:
        return all(np.allclose(a, getattr(other, n), **kw) for n, a in self.tensors())

    def equal(self, other: "CnnParams") -> bool:
        return all(np.array_equal(a, getattr(other, n)) for n, a in self.tensors())

    @property
    def n_parameters(self) -> int:
        return sum(a.size for _, a in self.tensors())


def zero_params(dtype=np.float32) -> CnnParams:
    return CnnParams(**{n: np.zeros(s, dtype=dtype) for n, s in PARAM_SHAPES.items()})


def init_params(seed: int, dtype=np.float32) -> CnnParams:
    """He-normal weights, zero biases, drawn in a fixed tensor order.

    The fan-in scaled std keeps activation variance roughly constant
    through the ReLU stack, which matters for the short training budgets
    this model is run with.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    out = {}
    for name, shape in PARAM_SHAPES.items():
        if name.endswith("_b"):
            out[name] = np.zeros(shape, dtype=dtype)
            continue
        if name.startswith("conv"):
            fan_in = shape[1] * shape[2] * shape[3]
        else:
            fan_in = shape[0]
        std = math.sqrt(2.0 / fan_in)
        out[name] = rng.normal(0.0, std, size=shape).astype(dtype)
    return CnnParams(**out)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    batch_size: int = 64
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-7
    dataset_size: int = 100_000
    val_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.dataset_size < 1:
            raise ValueError("epochs, batch_size, and dataset_size must be >= 1")
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError(f"val_fraction must be in (0, 1), got {self.val_fraction}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    train_loss: float
    val_accuracy: float


def metrics_to_csv(metrics: list[EpochMetrics]) -> str:
    lines = ["epoch,train_loss,val_acc"]
    lines += [f"{m.epoch},{m.train_loss!r},{m.val_accuracy!r}" for m in metrics]
    return "\n".join(lines) + "\n"


def _as_batch(img) -> np.ndarray:
    """Accepts a CameraImage, a (30,40) array, or a (n,30,40) stack."""
    px = getattr(img, "pixels", img)
    arr = np.asarray(px)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1:] != (INPUT_H, INPUT_W):
        raise ValueError(f"expected {INPUT_H}x{INPUT_W} image(s), got shape {arr.shape}")
    return arr


def _forward_cached(params: CnnParams, x4: np.ndarray) -> tuple[np.ndarray, dict]:
    c1 = K.conv2d_forward(x4, params.conv1_k, params.conv1_b)
    r1 = K.relu(c1)
    p1, i1 = K.maxpool2_forward(r1)
    c2 = K.conv2d_forward(p1, params.conv2_k, params.conv2_b)
    r2 = K.relu(c2)
    p2, i2 = K.maxpool2_forward(r2)
    flat = p2.reshape(p2.shape[0], -1)
    d1 = K.dense_forward(flat, params.dense1_w, params.dense1_b)
    r3 = K.relu(d1)
    logits = K.dense_forward(r3, params.dense2_w, params.dense2_b)
    cache = {
        "x4": x4, "c1": c1, "r1": r1, "i1": i1, "p1": p1,
        "c2": c2, "r2": r2, "i2": i2, "p2": p2,
        "flat": flat, "d1": d1, "r3": r3,
    }
    return logits, cache


def _backward(params: CnnParams, cache: dict, dlogits: np.ndarray) -> dict:
    g = {}
    dr3, g["dense2_w"], g["dense2_b"] = K.dense_backward(
        cache["r3"], params.dense2_w, dlogits
    )
    dd1 = K.relu_backward(cache["d1"], dr3)
    dflat, g["dense1_w"], g["dense1_b"] = K.dense_backward(
        cache["flat"], params.dense1_w, dd1
    )
    dp2 = dflat.reshape(cache["p2"].shape)
    dr2 = K.maxpool2_backward(cache["i2"], dp2, cache["r2"].shape[1], cache["r2"].shape[2])
    dc2 = K.relu_backward(cache["c2"], dr2)
    dp1, g["conv2_k"], g["conv2_b"] = K.conv2d_backward(cache["p1"], params.conv2_k, dc2)
    dr1 = K.maxpool2_backward(cache["i1"], dp1, cache["r1"].shape[1], cache["r1"].shape[2])
    dc1 = K.relu_backward(cache["c1"], dr1)
    g["input"], g["conv1_k"], g["conv1_b"] = K.conv2d_backward(
        cache["x4"], params.conv1_k, dc1
    )
    return g


def forward_batch(params: CnnParams, imgs) -> np.ndarray:
    """Class probabilities, one row per image."""
    x = _as_batch(imgs)
    x4 = x[..., None].astype(params.conv1_k.dtype, copy=False)
    logits, _ = _forward_cached(params, x4)
    return K.softmax(logits)


def forward(params: CnnParams, img) -> np.ndarray:
    probs = forward_batch(params, img)
    if probs.shape[0] != 1:
        raise ValueError("forward takes a single image; use forward_batch for stacks")
    return probs[0]


def classify(params: CnnParams, img) -> int:
    """Zone label: argmax probability, ties toward the lower class index."""
    return int(np.argmax(forward(params, img)))


def evaluate(params: CnnParams, images: np.ndarray, labels: np.ndarray, batch_size: int = 256) -> float:
    """Fraction of images whose argmax matches the label."""
    x = _as_batch(images)
    hits = 0
    for lo in range(0, x.shape[0], batch_size):
        probs = forward_batch(params, x[lo : lo + batch_size])
        hits += int((probs.argmax(axis=1) == labels[lo : lo + batch_size]).sum())
    return hits / x.shape[0]


class _Adam:
    def __init__(self, cfg: TrainConfig, params: CnnParams):
        self.cfg = cfg
        self.t = 0
        dtype = params.conv1_k.dtype
        self.m = {n: np.zeros_like(a) for n, a in params.tensors()}
        self.v = {n: np.zeros_like(a) for n, a in params.tensors()}
        self.dtype = dtype

    def step(self, params: CnnParams, grads: dict) -> None:
        c = self.cfg
        self.t += 1
        lr_t = c.learning_rate * math.sqrt(1 - c.beta2**self.t) / (1 - c.beta1**self.t)
        for name, tensor in params.tensors():
            g = grads[name]
            m = self.m[name]
            v = self.v[name]
            m += (1 - c.beta1) * (g - m)
            v += (1 - c.beta2) * (g * g - v)
            tensor -= np.asarray(lr_t, dtype=tensor.dtype) * m / (
                np.sqrt(v) + np.asarray(c.eps, dtype=tensor.dtype)
            )


def _normalize_data(data) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(data, tuple) and len(data) == 2:
        images, labels = data
    else:
        pairs = list(data)
        if not pairs:
            raise ValueError("training data is empty")
        images = np.stack([np.asarray(getattr(im, "pixels", im)) for im, _ in pairs])
        labels = np.array([lab for _, lab in pairs])
    images = _as_batch(images)
    labels = np.asarray(labels)
    if labels.shape != (images.shape[0],):
        raise ValueError("labels must align one-to-one with images")
    if images.shape[0] == 0:
        raise ValueError("training data is empty")
    if labels.min() < 0 or labels.max() >= N_CLASSES:
        raise ValueError(f"labels must lie in [0, {N_CLASSES})")
    return images, labels.astype(np.int64)


def train(cfg: TrainConfig, data, params: CnnParams | None = None) -> tuple[CnnParams, list[EpochMetrics]]:
    """Mini-batch Adam training; returns final params and per-epoch metrics.

    The seed fixes initialization, the train/validation split, and every
    shuffle, so two runs with the same config, data, and backend produce
    bitwise-identical parameters.
    """
    images, labels = _normalize_data(data)
    n = images.shape[0]
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    perm = rng.permutation(n)
    n_val = max(1, int(round(n * cfg.val_fraction))) if n > 1 else 0
    train_idx, val_idx = perm[: n - n_val], perm[n - n_val :]
    if train_idx.size == 0:
        raise ValueError("validation split leaves no training data")

    dtype = np.float32
    x_train = images[train_idx].astype(dtype)[..., None]
    y_train = labels[train_idx]
    x_val = images[val_idx].astype(dtype)
    y_val = labels[val_idx]

    params = init_params(cfg.seed, dtype) if params is None else params.astype(dtype)
    opt = _Adam(cfg, params)
    metrics = []
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(train_idx.size)
        total_loss = 0.0
        for start in range(0, order.size, cfg.batch_size):
            sel = order[start : start + cfg.batch_size]
            xb = x_train[sel]
            logits, cache = _forward_cached(params, xb)
            loss, dlogits = K.softmax_cross_entropy(logits, y_train[sel])
            if not math.isfinite(loss):
                raise RuntimeError(
                    f"non-finite loss at epoch {epoch}, batch {start // cfg.batch_size}"
                )
            grads = _backward(params, cache, dlogits)
            opt.step(params, grads)
            total_loss += loss * sel.size
        val_acc = evaluate(params, x_val, y_val) if val_idx.size else float("nan")
        metrics.append(EpochMetrics(epoch, total_loss / order.size, val_acc))
    return params, metrics
