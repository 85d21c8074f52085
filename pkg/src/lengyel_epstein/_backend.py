"""Select the flow kernel at import time.

The compiled extension is used when it was built; otherwise the pure-Python
kernel is used.  ``LENGYEL_EPSTEIN_KERNEL=python`` forces the fallback.
"""

import os

from . import _flow_py

try:
    from . import _flow as _compiled
except ImportError:  # extension not built
    _compiled = None


def get_kernel(name=None):
    """Return the kernel module called ``name`` ("compiled" or "python").

    ``None`` picks the compiled kernel when available.
    """
    if name is None:
        name = os.environ.get("LENGYEL_EPSTEIN_KERNEL", "auto")
    if name == "python":
        return _flow_py
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernel lengyel_epstein._flow is not built")
        return _compiled
    if name != "auto":
        raise ValueError(f"unknown kernel {name!r}")
    return _compiled if _compiled is not None else _flow_py


kernel = get_kernel()
BACKEND = "compiled" if kernel is _compiled else "python"
HAVE_COMPILED = _compiled is not None
