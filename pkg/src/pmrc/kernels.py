"""Kernel selection: the compiled ``_core`` extension when importable, else ``_fallback``.

Set ``PMRC_PURE_PYTHON=1`` to force the fallback.
"""

import os

import numpy as np

from . import _fallback

MAX_MODULUS = 1 << 31

if os.environ.get("PMRC_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"


def _prep(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def matmul(a, b, q, impl=None):
    return (impl or _impl).matmul(_prep(a), _prep(b), q)


def rref(a, q, impl=None):
    return (impl or _impl).rref(_prep(a), q)


def rank(a, q, impl=None):
    return int((impl or _impl).rank(_prep(a), q))


def available_backends():
    out = {"python": _fallback}
    try:
        from . import _core
        out["cython"] = _core
    except ImportError:
        pass
    return out
