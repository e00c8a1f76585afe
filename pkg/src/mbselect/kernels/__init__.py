"""Backend selection for the tree-growing kernels.

The numba implementation is the default; set MBSELECT_NO_NUMBA=1 (or any of
"true"/"yes") before import to force the pure-numpy fallback, which is also
used automatically when numba is not importable. Both backends expose the
same `best_splits` / `predict_forest` contract; `benchmarks/backend_bench.py`
compares them head to head.
"""

from __future__ import annotations

import os

from . import numpy_backend

_DISABLE_VALUES = ("1", "true", "yes")


def _numba_disabled() -> bool:
    return os.environ.get("MBSELECT_NO_NUMBA", "").strip().lower() in _DISABLE_VALUES


if _numba_disabled():
    _impl = numpy_backend
    BACKEND = "numpy"
else:
    try:
        from . import numba_backend as _impl

        BACKEND = "numba"
    except ImportError:
        _impl = numpy_backend
        BACKEND = "numpy"

best_splits = _impl.best_splits
predict_forest = _impl.predict_forest

__all__ = ["BACKEND", "best_splits", "predict_forest", "numpy_backend"]
