"""Kernel backend selection.

The compiled Cython kernels are preferred; the NumPy implementation is the
fallback.  ``ROBUSTTRAJ_BACKEND=python|cython`` forces a choice (the
benchmark and the cross-backend tests use this).
"""

import os

from . import _kernels_py

_requested = os.environ.get("ROBUSTTRAJ_BACKEND", "").strip().lower()

impl = None
BACKEND = "python"
if _requested in ("", "cython"):
    try:
        from . import _kernels as _impl_c

        impl = _impl_c
        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise ImportError(
                "ROBUSTTRAJ_BACKEND=cython but the compiled kernels are not built"
            )
elif _requested != "python":
    raise ValueError(f"unknown ROBUSTTRAJ_BACKEND {_requested!r}")

if impl is None:
    impl = _kernels_py
    BACKEND = "python"
