"""Race the numba and numpy builds of the hot kernels.

Both builds are imported side by side, so the ``FAVBOT_BACKEND`` flag does
not matter here; the numba variants are compiled fresh from the shared
loop implementations.  Workload shapes mirror real use: classifier layers
at training batch size, the camera rasterizer at its supersampled grid.

Run with ``python3 bench/bench_kernels.py``.
"""

import argparse
import platform
import timeit

import numpy as np

import favbot
from favbot.raster import _fill_polygon_loops, _fill_polygon_numpy, star_vertices
from favbot.vision import kernels

try:
    import numba
except ImportError:
    numba = None


def build_workloads():
    r = np.random.default_rng(0)
    f32 = lambda *shape: r.random(shape, dtype=np.float32)

    # classifier shapes at batch 64: 30x40 input, two conv/pool stages
    x1, k1, b1 = f32(64, 30, 40, 1), f32(6, 3, 3, 1), f32(6)
    dy1 = f32(64, 28, 38, 6)
    x2, k2, b2 = f32(64, 14, 19, 6), f32(4, 3, 3, 6), f32(4)
    dy2 = f32(64, 12, 17, 4)
    p1, dp1 = dy1, f32(64, 14, 19, 6)
    p2, dp2 = dy2, f32(64, 6, 8, 4)
    xd, wd = f32(64, 192), f32(192, 6)
    dyd = f32(64, 6)

    # camera raster: 40x30 frame supersampled 4x, and a 16x variant
    sx, sy = star_vertices(80.0, 60.0, 44.0, 0.35)
    bx, by = star_vertices(320.0, 240.0, 176.0, 0.35)

    loops = {
        "conv2d fwd 64x30x40x1 k6": (kernels._conv2d_forward_loops, (x1, k1, b1)),
        "conv2d fwd 64x14x19x6 k4": (kernels._conv2d_forward_loops, (x2, k2, b2)),
        "conv2d bwd 64x30x40x1 k6": (kernels._conv2d_backward_loops, (x1, k1, dy1)),
        "conv2d bwd 64x14x19x6 k4": (kernels._conv2d_backward_loops, (x2, k2, dy2)),
        "maxpool fwd 64x28x38x6": (kernels._maxpool2_forward_loops, (p1,)),
        "maxpool fwd 64x12x17x4": (kernels._maxpool2_forward_loops, (p2,)),
        "dense fwd 64x192 -> 6": (kernels._dense_forward_loops, (xd, wd, b1)),
        "dense bwd 64x192 -> 6": (kernels._dense_backward_loops, (xd, wd, dyd)),
        "raster 160x120 grid": (_fill_polygon_loops, (sx, sy, 160, 120)),
        "raster 640x480 grid": (_fill_polygon_loops, (bx, by, 640, 480)),
    }
    vectorized = {
        "conv2d fwd 64x30x40x1 k6": (kernels._conv2d_forward_numpy, (x1, k1, b1)),
        "conv2d fwd 64x14x19x6 k4": (kernels._conv2d_forward_numpy, (x2, k2, b2)),
        "conv2d bwd 64x30x40x1 k6": (kernels._conv2d_backward_numpy, (x1, k1, dy1)),
        "conv2d bwd 64x14x19x6 k4": (kernels._conv2d_backward_numpy, (x2, k2, dy2)),
        "maxpool fwd 64x28x38x6": (kernels._maxpool2_forward_numpy, (p1,)),
        "maxpool fwd 64x12x17x4": (kernels._maxpool2_forward_numpy, (p2,)),
        "dense fwd 64x192 -> 6": (kernels._dense_forward_numpy, (xd, wd, b1)),
        "dense bwd 64x192 -> 6": (kernels._dense_backward_numpy, (xd, wd, dyd)),
        "raster 160x120 grid": (_fill_polygon_numpy, (sx, sy, 160, 120)),
        "raster 640x480 grid": (_fill_polygon_numpy, (bx, by, 640, 480)),
    }
    return loops, vectorized


def time_call(fn, args, repeat):
    timer = timeit.Timer(lambda: fn(*args))
    number, _ = timer.autorange()
    return min(timer.repeat(repeat=repeat, number=number)) / number


def fmt(seconds):
    if seconds is None:
        return "-"
    if seconds < 1e-3:
        return f"{seconds * 1e6:8.1f} us"
    if seconds < 1.0:
        return f"{seconds * 1e3:8.2f} ms"
    return f"{seconds:8.3f} s "


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3, help="timing repeats per row")
    args = ap.parse_args()

    print(f"favbot {favbot.__version__}  python {platform.python_version()}  "
          f"numpy {np.__version__}  numba {numba.__version__ if numba else 'absent'}")

    loops, vectorized = build_workloads()
    if numba is not None:
        jit = numba.njit(cache=True)
        loops = {name: (jit(fn), a) for name, (fn, a) in loops.items()}
        for fn, a in loops.values():
            fn(*a)  # compile outside the timed region
    else:
        print("numba unavailable: numpy column only\n")
        loops = None

    width = max(len(name) for name in vectorized)
    print(f"\n{'workload':<{width}}  {'numba':>11}  {'numpy':>11}  {'speedup':>7}")
    for name, (np_fn, np_args) in vectorized.items():
        t_numpy = time_call(np_fn, np_args, args.repeat)
        t_numba = time_call(*loops[name], args.repeat) if loops else None
        ratio = f"{t_numpy / t_numba:6.1f}x" if t_numba else "      -"
        print(f"{name:<{width}}  {fmt(t_numba)}  {fmt(t_numpy)}  {ratio}")


if __name__ == "__main__":
    main()
