"""Hot-kernel dispatch: the compiled ``_ckernels`` extension when it was built,
otherwise the numpy/LAPACK fallback. Set ``DEGENHEAT_PURE_PYTHON=1`` to force
the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("DEGENHEAT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        pass

cn_propagate = _impl.cn_propagate
sturm_count = _impl.sturm_count
gegenbauer_table = _impl.gegenbauer_table
oscillation_spacing = _impl.oscillation_spacing

__all__ = ["BACKEND", "cn_propagate", "sturm_count", "gegenbauer_table", "oscillation_spacing"]
