"""Backend selection for the numeric kernels.

``ATRP_BACKEND=numpy`` forces the pure-numpy path; ``ATRP_BACKEND=numba``
(the default when numba imports) uses the compiled kernels.
"""

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is optional
    numba = None
    HAVE_NUMBA = False


def requested_backend():
    name = os.environ.get("ATRP_BACKEND", "").strip().lower()
    if name in ("", "auto"):
        return "numba" if HAVE_NUMBA else "numpy"
    if name not in ("numba", "numpy"):
        raise ValueError(f"ATRP_BACKEND must be 'numba' or 'numpy', got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        return "numpy"
    return name


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity otherwise."""
    if not HAVE_NUMBA:
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn
    return numba.njit(*args, **kwargs)
