"""Backend selection for the CHSH search kernels.

The compiled extension is used when it was built; otherwise the numpy
fallback is loaded. Set ``QCAUSAL_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("QCAUSAL_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

chsh_grid_max = _impl.chsh_grid_max
chsh_batch = _impl.chsh_batch
