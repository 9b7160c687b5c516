"""Kernel selection: compiled polynomial kernels when available, else pure Python.

Set ``SPINCM_FORCE_FALLBACK=1`` to force the pure-Python implementation.
"""

from __future__ import annotations

import os

if os.environ.get("SPINCM_FORCE_FALLBACK") == "1":
    from . import _poly_fallback as _impl
else:
    try:
        from . import _poly_core as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _poly_fallback as _impl  # type: ignore[no-redef]

BACKEND: str = _impl.BACKEND
dict_add = _impl.dict_add
dict_sub = _impl.dict_sub
dict_neg = _impl.dict_neg
dict_scale = _impl.dict_scale
dict_mul = _impl.dict_mul
