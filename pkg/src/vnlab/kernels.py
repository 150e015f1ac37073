"""Kernel backend selection.

The hot loops (batched polynomial evaluation and gradients) exist twice:
a compiled Cython extension and a NumPy fallback with identical semantics.
The compiled backend is preferred when importable; set VNLAB_KERNELS to
"python" or "cython" to force a choice (forcing an unavailable backend is
an error so benchmarks cannot silently compare a backend against itself).
"""

from __future__ import annotations

import os

from . import _kernels_py

_FORCE = os.environ.get("VNLAB_KERNELS", "").strip().lower()

_impl = None
_backend = "python"
if _FORCE in ("python", "py"):
    _impl = _kernels_py
elif _FORCE in ("cython", "cy"):
    from . import _kernels_cy as _impl  # noqa: F401  (ImportError is the contract)

    _backend = "cython"
elif _FORCE:
    raise ValueError(f"unknown VNLAB_KERNELS value: {_FORCE!r}")
else:
    try:
        from . import _kernels_cy as _impl

        _backend = "cython"
    except ImportError:
        _impl = _kernels_py

poly_eval_batch = _impl.poly_eval_batch
poly_eval_grad_batch = _impl.poly_eval_grad_batch


def backend_name() -> str:
    return _backend


def available_backends() -> dict:
    """Map backend name -> module, for benchmarking both side by side."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels_cy

        out["cython"] = _kernels_cy
    except ImportError:
        pass
    return out
