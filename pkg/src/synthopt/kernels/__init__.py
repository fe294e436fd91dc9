"""Hot kernels with a compiled backend and a numpy fallback.

The Cython extension is used when it imports; set
``SYNTHOPT_PURE_PYTHON=1`` to force the fallback. Both backends are
exposed as ``python_backend`` and ``compiled_backend`` (``None`` when
the extension is unavailable) for tests and benchmarks.
"""
import os

from synthopt.kernels import _pykernels as python_backend

try:
    from synthopt.kernels import _ckernels as compiled_backend
except ImportError:  # extension not built
    compiled_backend = None

if compiled_backend is not None and not os.environ.get("SYNTHOPT_PURE_PYTHON"):
    _active = compiled_backend
    BACKEND = "cython"
else:
    _active = python_backend
    BACKEND = "python"

held_karp = _active.held_karp
partition_enumerate = _active.partition_enumerate
partition_mitm = _active.partition_mitm
two_opt = _active.two_opt

__all__ = [
    "BACKEND",
    "compiled_backend",
    "held_karp",
    "partition_enumerate",
    "partition_mitm",
    "python_backend",
    "two_opt",
]
