"""Pick the compiled FM kernel when available; ``DQCPART_BACKEND=python`` forces the fallback."""
import os

from . import _fm_py

try:
    from . import _fm_kernel as _fm_c
except ImportError:  # extension not built
    _fm_c = None


def kernel_class(name: str | None = None):
    name = name or os.environ.get("DQCPART_BACKEND", "auto")
    if name not in ("auto", "python", "cython"):
        raise ValueError(f"unknown backend {name!r}; expected auto, python or cython")
    if name == "python" or (name == "auto" and _fm_c is None):
        return _fm_py.FMKernel
    if _fm_c is None:
        raise ImportError("compiled kernel requested but dqcpart._fm_kernel is not built")
    return _fm_c.FMKernel


def backend_name() -> str:
    return "python" if kernel_class() is _fm_py.FMKernel else "cython"
