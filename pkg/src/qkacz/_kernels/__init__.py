"""Kernel dispatch: compiled Cython sweep when built, numpy fallback otherwise.

Set QKACZ_PURE_PYTHON=1 to force the fallback.
"""

import os

from . import _pykernels

CYCLIC = _pykernels.CYCLIC
UNIFORM = _pykernels.UNIFORM
NORM_WEIGHTED = _pykernels.NORM_WEIGHTED

_impl = _pykernels
if os.environ.get("QKACZ_PURE_PYTHON") != "1":
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

KERNEL_BACKEND = "python" if _impl is _pykernels else "compiled"
kaczmarz_sweep = _impl.kaczmarz_sweep
