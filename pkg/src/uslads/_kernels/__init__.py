"""Hot numeric kernels: a compiled core with a NumPy fallback.

The Cython extension is optional. It is used when importable unless
``USLADS_PURE_PYTHON`` is set to a non-empty value other than ``0``, in
which case the NumPy implementations take over. ``BACKEND`` names the
active implementation ("cython" or "python").
"""

import os

from . import _pykernels

if os.environ.get("USLADS_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _cykernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pykernels

BACKEND = _impl.BACKEND
weighted_log_prob = _impl.weighted_log_prob
estep = _impl.estep
mstep = _impl.mstep
mahalanobis_batch = _impl.mahalanobis_batch

__all__ = ["BACKEND", "weighted_log_prob", "estep", "mstep", "mahalanobis_batch"]
