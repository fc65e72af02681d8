"""Pick the integration kernel at import time.

The compiled extension is preferred. Set ``SEAKIT_PURE_PYTHON=1`` to force
the fallback, e.g. when comparing the two.
"""

import os

from . import _kernel_py

BACKEND = "python"
integrate = _kernel_py.integrate

if os.environ.get("SEAKIT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernel  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        integrate = _kernel.integrate
        BACKEND = "compiled"

python_integrate = _kernel_py.integrate
OK, DIVERGED, NONFINITE, PRUNED = (_kernel_py.OK, _kernel_py.DIVERGED,
                                   _kernel_py.NONFINITE, _kernel_py.PRUNED)
