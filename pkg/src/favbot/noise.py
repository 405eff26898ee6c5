"""Documented Gaussian draws shared by motion noise and capture latency.

Every stochastic quantity in the package reduces to uniforms from a numpy
Generator (PCG64) pushed through the Box-Muller transform below, so any
draw can be re-derived outside the package from the seed alone.
"""

from __future__ import annotations

import math


def standard_normal_pair(rng) -> tuple[float, float]:
    """Two independent standard normals from two uniforms in [0, 1).

    Box-Muller: with u1, u2 drawn in order from ``rng.random()``,

        n1 = sqrt(-2 ln(1 - u1)) * cos(2 pi u2)
        n2 = sqrt(-2 ln(1 - u1)) * sin(2 pi u2)

    The 1 - u1 keeps the log argument inside (0, 1].
    """
    u1 = rng.random()
    u2 = rng.random()
    r = math.sqrt(-2.0 * math.log(1.0 - u1))
    return r * math.cos(2.0 * math.pi * u2), r * math.sin(2.0 * math.pi * u2)
