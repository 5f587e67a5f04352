"""Select the propagation kernel at import time.

The compiled ``_kernels`` extension is used when it can be imported; setting
the environment variable ``SLSPEC_PURE_PYTHON=1`` forces the pure-Python
fallback.  Both expose ``make_program``, ``propagate`` and ``KernelError``.
"""

import os

from . import _pykernels


def _load_native():
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels


_native = _load_native()

if _native is not None and os.environ.get("SLSPEC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    kernel = _native
    NATIVE = True
else:
    kernel = _pykernels
    NATIVE = False

BACKEND = "native" if NATIVE else "python"
KernelErrors = (_pykernels.KernelError,) + ((_native.KernelError,) if _native is not None else ())


def get_kernel(name=None):
    """Return the kernel module named ``"native"`` or ``"python"`` (default: active one)."""
    if name is None:
        return kernel
    if name == "python":
        return _pykernels
    if name == "native":
        if _native is None:
            raise ImportError("the compiled kernel is not built")
        return _native
    raise ValueError(f"unknown backend {name!r}")
