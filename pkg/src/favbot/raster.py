"""Star-polygon rasterization for the simulated camera.

Coverage is computed with the even-odd (ray crossing) rule at pixel centers
on a supersampled grid, then box-averaged down to the camera resolution so
edges come out anti-aliased.  The fill is one of the package's two hot
kernels: a numba-compiled loop when the numba backend is active, otherwise
a vectorized numpy equivalent.  Both run the same arithmetic per pixel and
produce bit-identical images.
"""

from __future__ import annotations

import math

import numpy as np

from favbot.backend import USE_NUMBA

# Pentagram outline: 10 vertices alternating outer/inner radius; the inner
# radius of a regular 5-point star is cos(72 deg)/cos(36 deg) of the outer.
STAR_POINTS = 5
STAR_INNER_RATIO = math.cos(math.radians(72)) / math.cos(math.radians(36))


def star_vertices(
    cx: float, cy: float, outer_radius: float, orientation: float
) -> tuple[np.ndarray, np.ndarray]:
    """Screen-space pentagram outline (y grows downward).

    At orientation 0 the first spike points straight up in the image;
    positive orientation rotates the star counter-clockwise on screen.
    """
    if outer_radius <= 0:
        raise ValueError(f"outer_radius must be positive, got {outer_radius}")
    n = 2 * STAR_POINTS
    xs = np.empty(n, dtype=np.float64)
    ys = np.empty(n, dtype=np.float64)
    inner = outer_radius * STAR_INNER_RATIO
    for k in range(n):
        r = outer_radius if k % 2 == 0 else inner
        phi = orientation + 0.5 * math.pi + k * math.pi / STAR_POINTS
        xs[k] = cx + r * math.cos(phi)
        ys[k] = cy - r * math.sin(phi)
    return xs, ys


def _fill_polygon_loops(xs, ys, width, height):
    # numba target; numpy fallback uses the vectorized twin below.
    out = np.zeros((height, width), dtype=np.float64)
    inside = np.zeros(width, dtype=np.bool_)
    n = xs.shape[0]
    for iy in range(height):
        inside[:] = False
        pyc = iy + 0.5
        j = n - 1
        for i in range(n):
            yi = ys[i]
            yj = ys[j]
            if (yi > pyc) != (yj > pyc):
                xint = (xs[j] - xs[i]) * (pyc - yi) / (yj - yi) + xs[i]
                for ix in range(width):
                    if ix + 0.5 < xint:
                        inside[ix] = not inside[ix]
            j = i
        for ix in range(width):
            if inside[ix]:
                out[iy, ix] = 1.0
    return out


def _fill_polygon_numpy(xs, ys, width, height):
    px = np.arange(width, dtype=np.float64) + 0.5
    py = np.arange(height, dtype=np.float64) + 0.5
    inside = np.zeros((height, width), dtype=np.bool_)
    n = xs.shape[0]
    j = n - 1
    for i in range(n):
        yi, yj = ys[i], ys[j]
        spans = (yi > py) != (yj > py)
        den = yj - yi
        if den != 0.0:
            xint = (xs[j] - xs[i]) * (py - yi) / den + xs[i]
            inside ^= spans[:, None] & (px[None, :] < xint[:, None])
        j = i
    return inside.astype(np.float64)


if USE_NUMBA:
    import numba

    _fill_polygon_numba = numba.njit(cache=True)(_fill_polygon_loops)
else:
    _fill_polygon_numba = None


def fill_polygon(xs, ys, width: int, height: int) -> np.ndarray:
    """Filled coverage mask (1.0 inside, 0.0 outside) at pixel centers."""
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1 or xs.shape[0] < 3:
        raise ValueError("polygon needs matching 1-D x/y arrays with >= 3 vertices")
    if not (np.isfinite(xs).all() and np.isfinite(ys).all()):
        raise ValueError("polygon vertices must be finite")
    if width <= 0 or height <= 0:
        raise ValueError("raster dimensions must be positive")
    if _fill_polygon_numba is not None:
        return _fill_polygon_numba(xs, ys, width, height)
    return _fill_polygon_numpy(xs, ys, width, height)


def downsample_mean(img: np.ndarray, factor: int) -> np.ndarray:
    """Box-average each factor x factor block to one pixel."""
    h, w = img.shape
    if factor < 1 or h % factor or w % factor:
        raise ValueError(f"image {h}x{w} not divisible by factor {factor}")
    return img.reshape(h // factor, factor, w // factor, factor).mean(axis=(1, 3))


def rasterize_star(
    cx: float,
    cy: float,
    radius_px: float,
    orientation: float,
    width: int,
    height: int,
    supersample: int = 4,
) -> np.ndarray:
    """Anti-aliased white-on-black star; center/radius in output pixel units."""
    s = supersample
    xs, ys = star_vertices(cx * s, cy * s, radius_px * s, orientation)
    big = fill_polygon(xs, ys, width * s, height * s)
    return downsample_mean(big, s)
