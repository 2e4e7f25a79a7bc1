"""Hot per-face integral kernels with a compiled core and numpy fallback.

The compiled extension is preferred when importable; set
``HRVEM_KERNELS=python`` (or ``compiled``) to force a backend.
"""

import os

from . import _pykern
from ._pykern import KELVIN_BASIS, face_basis_values

__all__ = [
    "KELVIN_BASIS",
    "backend_name",
    "face_basis_values",
    "face_integrals",
    "face_traction",
    "get_backend",
]

_FORCE = os.environ.get("HRVEM_KERNELS", "auto").lower()

try:
    from . import _corehr
except ImportError:  # pure-python install
    _corehr = None

if _FORCE == "python":
    _impl = _pykern
elif _FORCE == "compiled":
    if _corehr is None:
        raise ImportError("HRVEM_KERNELS=compiled but the extension is not built")
    _impl = _corehr
else:
    _impl = _corehr if _corehr is not None else _pykern


def backend_name() -> str:
    return "compiled" if _impl is _corehr and _corehr is not None else "python"


def get_backend(name: str):
    """Return the kernel module for ``name`` in {'python', 'compiled'}."""
    if name == "python":
        return _pykern
    if name == "compiled":
        if _corehr is None:
            raise ImportError("compiled kernel backend is not available")
        return _corehr
    raise ValueError(f"unknown kernel backend {name!r}")


def _as_c(arr):
    import numpy as np

    return np.ascontiguousarray(arr, dtype=np.float64)


def face_integrals(pts, wts, t1, t2, nrm, x_f):
    if _impl is _pykern:
        return _pykern.face_integrals(pts, wts, t1, t2, nrm, x_f)
    return _corehr.face_integrals(
        _as_c(pts), _as_c(wts), _as_c(t1), _as_c(t2), _as_c(nrm), _as_c(x_f)
    )


def face_traction(pts, coeffs, t1, t2, nrm, x_f):
    if _impl is _pykern:
        return _pykern.face_traction(pts, coeffs, t1, t2, nrm, x_f)
    return _corehr.face_traction(
        _as_c(pts), _as_c(coeffs), _as_c(t1), _as_c(t2), _as_c(nrm), _as_c(x_f)
    )
