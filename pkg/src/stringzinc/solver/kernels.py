"""Selects the compiled kernels when built, else the pure-Python ones.

Set ``STRINGZINC_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
regular_filter = _pykernels.regular_filter

if os.environ.get("STRINGZINC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        regular_filter = _kernels.regular_filter  # noqa: F811
        BACKEND = "cython"
