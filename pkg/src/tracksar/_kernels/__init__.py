"""Hot conversion loop, compiled when available.

The Cython build is preferred; set ``TRACKSAR_PURE_PYTHON=1`` to force the
pure-Python implementation.
"""

import os

from . import _pykernel

BACKEND = "python"
convert_block = _pykernel.convert_block

if os.environ.get("TRACKSAR_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernel
    except ImportError:
        _ckernel = None
    else:
        BACKEND = "cython"
        convert_block = _ckernel.convert_block


def available_backends():
    backends = {"python": _pykernel.convert_block}
    try:
        from . import _ckernel as ck
    except ImportError:
        pass
    else:
        backends["cython"] = ck.convert_block
    return backends
