"""Kernel backend selection.

Hot numeric kernels (CNN layers, star rasterizer) exist twice: a numba
``@njit`` build and a vectorized pure-numpy build.  ``FAVBOT_BACKEND``
picks one:

* ``auto`` (default) - numba when importable, else numpy
* ``numba``          - require numba, raise if unavailable
* ``numpy``          - force the pure-numpy path

The choice is frozen at import time; ``bench/bench_kernels.py`` times the
two builds against each other irrespective of the flag.
"""

import os

_ENV_VAR = "FAVBOT_BACKEND"
_VALID = ("auto", "numba", "numpy")


def _detect() -> str:
    choice = os.environ.get(_ENV_VAR, "auto").strip().lower()
    if choice not in _VALID:
        raise ValueError(
            f"{_ENV_VAR}={choice!r}: expected one of {', '.join(_VALID)}"
        )
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            raise
        return "numpy"
    return "numba"


ACTIVE: str = _detect()
USE_NUMBA: bool = ACTIVE == "numba"


def njit_if_active(func=None, **options):
    """Wrap ``func`` with numba.njit when the numba backend is active.

    Under the numpy backend the function is returned untouched so modules
    can still reference the loop implementation (the dispatchers then point
    at the vectorized numpy build instead).
    """

    def wrap(f):
        if not USE_NUMBA:
            return f
        import numba

        opts = {"cache": True, **options}
        return numba.njit(**opts)(f)

    if func is not None:
        return wrap(func)
    return wrap
