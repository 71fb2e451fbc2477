"""Hot finite-field kernels with a selectable backend.

The numba backend is used when numba imports and ``COVLAB_NO_JIT`` is unset
(or ``0``); otherwise the pure-numpy backend runs.  Both backends implement
the same elementwise contracts on int64 element codes, so callers never
branch on the backend.
"""

import os

import numpy as np

from . import _numpy as numpy_backend

try:
    from . import _numba as numba_backend
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_backend = None

_disabled = os.environ.get("COVLAB_NO_JIT", "0") not in ("", "0")

BACKEND = "numba" if numba_backend is not None and not _disabled else "numpy"


def _flat_pair(a, b):
    a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
    return a.shape, np.ascontiguousarray(a).ravel(), np.ascontiguousarray(b).ravel()


if BACKEND == "numba":
    def add(a, b, p, k, mod):
        shape, a, b = _flat_pair(a, b)
        return numba_backend.add_flat(a, b, p, k).reshape(shape)

    def sub(a, b, p, k, mod):
        shape, a, b = _flat_pair(a, b)
        return numba_backend.sub_flat(a, b, p, k).reshape(shape)

    def mul(a, b, p, k, mod):
        shape, a, b = _flat_pair(a, b)
        return numba_backend.mul_flat(a, b, p, k, mod).reshape(shape)

    def power(a, e, p, k, mod):
        a = np.asarray(a, dtype=np.int64)
        return numba_backend.pow_flat(np.ascontiguousarray(a).ravel(), e, p, k, mod).reshape(a.shape)

    def inv(a, p, k, mod):
        return power(a, p ** k - 2, p, k, mod)

    def eval_poly(points, exps, coeffs, p, k, mod):
        return numba_backend.eval_poly(
            np.ascontiguousarray(points, dtype=np.int64), exps, coeffs, p, k, mod
        )

    def batch_rank(mats, p, k, mod):
        return numba_backend.batch_rank(np.ascontiguousarray(mats, dtype=np.int64), p, k, mod)

    def neg(a, p, k, mod):
        return sub(np.zeros_like(np.asarray(a, dtype=np.int64)), a, p, k, mod)

else:
    add = numpy_backend.add
    sub = numpy_backend.sub
    neg = numpy_backend.neg
    mul = numpy_backend.mul
    power = numpy_backend.power
    inv = numpy_backend.inv
    eval_poly = numpy_backend.eval_poly
    batch_rank = numpy_backend.batch_rank


__all__ = [
    "BACKEND", "numpy_backend", "numba_backend",
    "add", "sub", "neg", "mul", "power", "inv", "eval_poly", "batch_rank",
]
