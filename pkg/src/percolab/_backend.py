"""Kernel backend selection.

Two interchangeable kernel modules implement the hot inner loops:

* ``_kernels_numba`` -- scalar loops compiled with ``numba.njit``,
* ``_kernels_numpy`` -- vectorized pure-numpy fallbacks.

Both expose the same function names and return bit-identical results.
The active backend is chosen once at import time from the environment
variable ``PERCOLAB_BACKEND``:

    PERCOLAB_BACKEND=auto    use numba if importable, else numpy (default)
    PERCOLAB_BACKEND=numba   require numba, fail loudly if missing
    PERCOLAB_BACKEND=numpy   force the pure-numpy path

``benchmarks/bench_kernels.py`` times one against the other.
"""

import os
import warnings

_choice = os.environ.get("PERCOLAB_BACKEND", "auto").strip().lower()

if _choice not in ("auto", "numba", "numpy"):
    raise RuntimeError(
        f"PERCOLAB_BACKEND={_choice!r} not understood; use auto, numba or numpy"
    )

if _choice == "numpy":
    from . import _kernels_numpy as kernels

    BACKEND = "numpy"
elif _choice == "numba":
    from . import _kernels_numba as kernels

    BACKEND = "numba"
else:
    try:
        from . import _kernels_numba as kernels

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - exercised only without numba
        warnings.warn("numba unavailable, falling back to the numpy kernels")
        from . import _kernels_numpy as kernels

        BACKEND = "numpy"


def get_kernels(name=None):
    """Return a kernel module by name ("numba" or "numpy"); default: active one."""
    if name is None:
        return kernels
    if name == "numba":
        from . import _kernels_numba

        return _kernels_numba
    if name == "numpy":
        from . import _kernels_numpy

        return _kernels_numpy
    raise ValueError(f"unknown backend {name!r}")
