"""Kernel backend selection.

The hot loops (lambda root solves, transmit, greedy and ML detection) exist
twice: a numba version and a vectorized numpy version.  ``RQSM_BACKEND``
picks one at import time; ``numba`` is the default when it imports.
"""

import os

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

_requested = os.environ.get("RQSM_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(f"RQSM_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

BACKEND = "numba" if (_requested == "numba" and HAVE_NUMBA) else "numpy"
