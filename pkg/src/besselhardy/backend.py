"""Numba-or-numpy backend selection.

Hot numeric kernels (scaled Bessel evaluation, heat-kernel matrix assembly)
are written twice: an ``@njit`` version and a vectorized pure-numpy version.
Setting the environment variable ``BESSELHARDY_NO_NUMBA=1`` before import
selects the numpy path; anything else (including numba being importable)
selects the compiled path.  ``benchmarks/bench_backends.py`` compares the two.
"""

import os

NUMBA_DISABLED_ENV = "BESSELHARDY_NO_NUMBA"


def _numba_requested() -> bool:
    return os.environ.get(NUMBA_DISABLED_ENV, "").strip() not in ("1", "true", "yes")


if _numba_requested():
    try:
        from numba import njit, prange  # noqa: F401

        USING_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USING_NUMBA = False
else:
    USING_NUMBA = False

if not USING_NUMBA:

    def njit(*args, **kwargs):  # type: ignore[misc]
        """No-op stand-in so decorated functions stay plain Python."""
        if args and callable(args[0]) and len(args) == 1 and not kwargs:
            return args[0]

        def deco(fn):
            return fn

        return deco

    prange = range  # type: ignore[assignment]


def backend_name() -> str:
    return "numba" if USING_NUMBA else "numpy"
