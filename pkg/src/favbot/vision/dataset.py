"""Synthetic labeled training data: rendered stars in random poses.

Each sample puts a 5-point star at a random center, scale, spin, and
horizontal shear, rasterized at 120x160 and area-averaged down to 30x40.
The label is the image third containing the star centroid (0 left,
1 middle, 2 right) or 3 when the centroid lies outside the frame; because
centroids commute with affine maps, the centroid is exactly the drawn
center, making the labeling rule pure geometry.

Class balance is exact by construction: sample index i targets class
i mod 4, and every sample draws from its own index-derived RNG stream, so
generation is order-independent and parallelizable.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from favbot.raster import downsample_mean, fill_polygon, star_vertices
from favbot.vision.cnn import INPUT_H, INPUT_W, N_CLASSES

SCALE_RANGE_PX = (3.0, 12.0)
SHEAR_LIMIT = 0.3
SUPERSAMPLE = 4
OUTSIDE_MARGIN_FRAC = 0.4  # class-3 centroids land within 0.4*W of the frame


def zone_of_centroid_x(cx_px: float, width: int = INPUT_W) -> int:
    """Image third containing a centroid x (pixels), or 3 if outside [0, W)."""
    if cx_px < 0 or cx_px >= width:
        return 3
    return min(2, int(3.0 * cx_px / width))


def _centroid_x_for_class(cls: int, rng) -> float:
    third = INPUT_W / 3.0
    if cls < 3:
        return (cls + rng.random()) * third
    margin = OUTSIDE_MARGIN_FRAC * INPUT_W
    u = rng.random() * 2.0 * margin
    return u - margin if u < margin else INPUT_W + (u - margin)


def render_sample(cls: int, rng) -> tuple[np.ndarray, float]:
    """One 30x40 image whose star centroid falls in class ``cls``.

    Returns the image and the centroid x used, for label auditing.
    """
    if not 0 <= cls < N_CLASSES:
        raise ValueError(f"class must be in [0, {N_CLASSES}), got {cls}")
    lo, hi = SCALE_RANGE_PX
    radius = lo + rng.random() * (hi - lo)
    orientation = rng.random() * 2.0 * math.pi
    shear = (rng.random() * 2.0 - 1.0) * SHEAR_LIMIT
    cx = _centroid_x_for_class(cls, rng)
    cy = rng.random() * INPUT_H
    xs, ys = star_vertices(0.0, 0.0, radius, orientation)
    xs = xs + shear * ys  # horizontal shear about the centroid
    s = SUPERSAMPLE
    big = fill_polygon((xs + cx) * s, (ys + cy) * s, INPUT_W * s, INPUT_H * s)
    return downsample_mean(big, s), cx


def sample_rng(seed: int, index: int):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, index))))


def generate_dataset(n: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """n labeled images, float32 (n, 30, 40) in [0, 1] plus int64 labels."""
    if n < 1:
        raise ValueError(f"dataset size must be >= 1, got {n}")
    images = np.empty((n, INPUT_H, INPUT_W), dtype=np.float32)
    labels = np.empty(n, dtype=np.int64)
    for i in range(n):
        cls = i % N_CLASSES
        img, cx = render_sample(cls, sample_rng(seed, i))
        assert zone_of_centroid_x(cx) == cls
        images[i] = img
        labels[i] = cls
    return images, labels


def save_dataset(directory, images: np.ndarray, labels: np.ndarray) -> None:
    """Archive: one raw uint8 30x40 file per image plus labels.csv."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if images.shape[0] != labels.shape[0]:
        raise ValueError("images and labels must align")
    rows = []
    for i, (img, label) in enumerate(zip(images, labels)):
        name = f"img_{i:06d}.raw"
        quantized = np.clip(np.rint(np.asarray(img) * 255.0), 0, 255).astype(np.uint8)
        (directory / name).write_bytes(quantized.tobytes())
        rows.append((name, int(label)))
    with open(directory / "labels.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("filename", "label"))
        writer.writerows(rows)


def load_dataset(directory) -> tuple[np.ndarray, np.ndarray]:
    directory = Path(directory)
    with open(directory / "labels.csv", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["filename", "label"]:
            raise ValueError(f"unexpected labels.csv header: {header}")
        rows = [(name, int(label)) for name, label in reader]
    images = np.empty((len(rows), INPUT_H, INPUT_W), dtype=np.float32)
    labels = np.empty(len(rows), dtype=np.int64)
    for i, (name, label) in enumerate(rows):
        raw = (directory / name).read_bytes()
        if len(raw) != INPUT_H * INPUT_W:
            raise ValueError(f"{name}: expected {INPUT_H * INPUT_W} bytes, got {len(raw)}")
        images[i] = np.frombuffer(raw, dtype=np.uint8).reshape(INPUT_H, INPUT_W) / np.float32(255.0)
        labels[i] = label
    return images, labels
