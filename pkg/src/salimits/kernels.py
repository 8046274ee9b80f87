"""Backend selection for the point-cloud kernels.

The compiled module is used when it was built; set SALIMITS_PURE_PYTHON=1 to
force the numpy fallback.
"""

from __future__ import annotations

import os

from . import _pykernels as pure

compiled = None
if os.environ.get("SALIMITS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled
    except ImportError:
        compiled = None

backend = compiled if compiled is not None else pure
BACKEND_NAME = "cython" if compiled is not None else "numpy"

directed_sq_brute = backend.directed_sq_brute
directed_sq_grid = backend.directed_sq_grid
components_grid = backend.components_grid

__all__ = ["BACKEND_NAME", "components_grid", "directed_sq_brute", "directed_sq_grid", "pure", "compiled"]
