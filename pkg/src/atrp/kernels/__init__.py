"""Hot numeric loops, compiled with numba or run as numpy fallbacks.

The active backend is chosen once at import from ``ATRP_BACKEND``; both
implementations stay importable so they can be benchmarked side by side.
"""

from types import SimpleNamespace

from .._accel import HAVE_NUMBA, requested_backend
from . import _numpy

_NAMES = (
    "anchor",
    "capped_masses",
    "capped_sum",
    "greedy_fill",
    "max_confidence",
    "floor_score",
    "grid_search",
    "grid_feasible",
    "pairwise_violation",
)


def _namespace(module):
    return SimpleNamespace(**{n: getattr(module, n) for n in _NAMES})


numpy_backend = _namespace(_numpy)
if HAVE_NUMBA:
    from . import _numba

    numba_backend = _namespace(_numba)
else:  # pragma: no cover
    numba_backend = None

BACKEND = requested_backend()
active = numba_backend if BACKEND == "numba" else numpy_backend


def get(name):
    if name == "numpy":
        return numpy_backend
    if name == "numba":
        if numba_backend is None:
            raise RuntimeError("numba is not installed")
        return numba_backend
    raise ValueError(name)


anchor = active.anchor
capped_masses = active.capped_masses
capped_sum = active.capped_sum
greedy_fill = active.greedy_fill
max_confidence = active.max_confidence
floor_score = active.floor_score
grid_search = active.grid_search
grid_feasible = active.grid_feasible
pairwise_violation = active.pairwise_violation
