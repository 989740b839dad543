"""Pick the compiled walker when available, else the pure-Python one.

Set ``TRACTLAB_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _walker_py

BACKEND = "python"
ProductWalker = _walker_py.ProductWalker

if os.environ.get("TRACTLAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from ._walker import ProductWalker  # noqa: F811
        BACKEND = "cython"
    except ImportError:  # extension not built
        pass


def walker_class(backend=None):
    """Return the walker class for ``backend`` ("cython", "python" or None for the default)."""
    if backend is None:
        return ProductWalker
    if backend == "python":
        return _walker_py.ProductWalker
    if backend == "cython":
        from ._walker import ProductWalker as compiled
        return compiled
    raise ValueError(f"unknown backend {backend!r}")
