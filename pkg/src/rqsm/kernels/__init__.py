"""Hot kernels, dispatched to numba or numpy according to ``RQSM_BACKEND``.

All functions work on blocks of trials (leading axis T).  ``load(name)``
returns a specific backend module, which the tests and the benchmark use to
compare the two paths directly.
"""

import importlib

import numpy as np

from .._backend import BACKEND
from ._common import LAM_HI, LAM_LO, STATUS_DEGENERATE, STATUS_ENDPOINT, STATUS_ROOT  # noqa: F401


def load(name: str):
    if name not in ("numba", "numpy"):
        raise ValueError(name)
    return importlib.import_module(f"{__name__}._{name}")


_impl = load(BACKEND)

solve_lambda = _impl.solve_lambda
transmit_block = _impl.transmit_block
gd_block = _impl.gd_block
ml_block = _impl.ml_block


def delta_classes(pos):
    """Group positive (real, imag) level pairs by their exact magnitude ratio.

    Pairs sharing a ratio share one phase solution in the ML search.
    Returns ``(class_id[K2, K2], class_delta[C])``.
    """
    pos = np.asarray(pos, dtype=float)
    K2 = pos.size
    class_id = np.empty((K2, K2), dtype=np.int64)
    seen = {}
    for pr in range(K2):
        for pi in range(K2):
            delta = abs(float(pos[pr]) / float(pos[pi]))
            class_id[pr, pi] = seen.setdefault(delta, len(seen))
    return class_id, np.array(list(seen), dtype=float)
