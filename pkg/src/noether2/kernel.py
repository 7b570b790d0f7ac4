"""Backend selection for the sparse polynomial kernels.

The compiled ``_ckernel`` extension is used when it was built; otherwise the
pure-Python ``_pykernel`` is loaded.  Setting ``NOETHER2_PURE_PYTHON=1``
forces the fallback (used by the benchmark and the backend parity tests).
"""

import os

if os.environ.get("NOETHER2_PURE_PYTHON"):
    from . import _pykernel as _impl

    BACKEND = "python"
else:
    try:
        from . import _ckernel as _impl

        BACKEND = "cython"
    except ImportError:
        from . import _pykernel as _impl

        BACKEND = "python"

mono_mul = _impl.mono_mul
poly_mul = _impl.poly_mul
poly_add = _impl.poly_add
poly_iadd = _impl.poly_iadd
poly_scale = _impl.poly_scale
poly_partial = _impl.poly_partial
poly_rename = _impl.poly_rename

__all__ = [
    "BACKEND",
    "mono_mul",
    "poly_mul",
    "poly_add",
    "poly_iadd",
    "poly_scale",
    "poly_partial",
    "poly_rename",
]
