"""Kernel backend selection.

The compiled extension is used when importable; setting
``POPAUDIT_PURE_PYTHON=1`` forces the numpy fallback.
"""
import os

from . import _fallback

_force_pure = os.environ.get("POPAUDIT_PURE_PYTHON", "").strip().lower() in ("1", "true", "yes")

try:
    if _force_pure:
        raise ImportError("pure-python backend requested")
    from . import _kernels as compiled
except ImportError:
    compiled = None

kernels = compiled if compiled is not None else _fallback
BACKEND = "cython" if compiled is not None else "python"


def get(name: str = None):
    """Kernel module by name ('cython' or 'python'); default is the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _fallback
    if name == "cython":
        if compiled is None:
            raise ImportError("compiled kernels are not built")
        return compiled
    raise ValueError(f"unknown backend {name!r}")
