"""Vectorized finite-field kernels in plain numpy.

Field elements are int64 codes ``c0 + c1*p + ... + c_{k-1}*p^(k-1)`` of
their coefficient vectors in the power basis of the modulus root.  ``mod``
holds the low coefficients ``c0..c_{k-1}`` of the monic modulus.
All functions accept arrays of any shape and operate elementwise.
"""

import numpy as np


def _digits(a, p, k):
    a = np.asarray(a, dtype=np.int64)
    out = np.empty(a.shape + (k,), dtype=np.int64)
    x = a.copy()
    for i in range(k):
        out[..., i] = x % p
        x //= p
    return out


def _encode(d, p, k):
    code = np.zeros(d.shape[:-1], dtype=np.int64)
    for i in range(k - 1, -1, -1):
        code = code * p + d[..., i]
    return code


def add(a, b, p, k, mod):
    if k == 1:
        return (np.asarray(a, dtype=np.int64) + b) % p
    return _encode((_digits(a, p, k) + _digits(b, p, k)) % p, p, k)


def sub(a, b, p, k, mod):
    if k == 1:
        return (np.asarray(a, dtype=np.int64) - b) % p
    return _encode((_digits(a, p, k) - _digits(b, p, k)) % p, p, k)


def neg(a, p, k, mod):
    if k == 1:
        return (-np.asarray(a, dtype=np.int64)) % p
    return _encode((-_digits(a, p, k)) % p, p, k)


def mul(a, b, p, k, mod):
    if k == 1:
        return (np.asarray(a, dtype=np.int64) * b) % p
    a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
    da = _digits(a, p, k)
    db = _digits(b, p, k)
    prod = np.zeros(a.shape + (2 * k - 1,), dtype=np.int64)
    for i in range(k):
        for j in range(k):
            prod[..., i + j] = (prod[..., i + j] + da[..., i] * db[..., j]) % p
    mod = np.asarray(mod, dtype=np.int64)
    for d in range(2 * k - 2, k - 1, -1):
        c = prod[..., d]
        prod[..., d - k:d] = (prod[..., d - k:d] - c[..., None] * mod) % p
    return _encode(prod[..., :k], p, k)


def power(a, e, p, k, mod):
    a = np.asarray(a, dtype=np.int64)
    result = np.ones_like(a)
    base = a.copy()
    while e > 0:
        if e & 1:
            result = mul(result, base, p, k, mod)
        e >>= 1
        if e:
            base = mul(base, base, p, k, mod)
    return result


def inv(a, p, k, mod):
    # zero maps to zero
    return power(a, p ** k - 2, p, k, mod)


def eval_poly(points, exps, coeffs, p, k, mod):
    """Evaluate one sparse polynomial at every row of ``points``."""
    points = np.asarray(points, dtype=np.int64)
    n = points.shape[0]
    acc = np.zeros(n, dtype=np.int64)
    cache = {}
    for t in range(exps.shape[0]):
        term = np.full(n, coeffs[t], dtype=np.int64)
        for j in range(exps.shape[1]):
            e = int(exps[t, j])
            if e == 0:
                continue
            key = (j, e)
            if key not in cache:
                cache[key] = power(points[:, j], e, p, k, mod)
            term = mul(term, cache[key], p, k, mod)
        acc = add(acc, term, p, k, mod)
    return acc


def batch_rank(mats, p, k, mod):
    """Rank of each matrix in a stack of shape (n, R, C)."""
    A = np.array(mats, dtype=np.int64, copy=True)
    n, R, C = A.shape
    rank = np.zeros(n, dtype=np.int64)
    if n == 0 or R == 0 or C == 0:
        return rank
    rows = np.arange(R)
    for c in range(C):
        cand = (A[:, :, c] != 0) & (rows[None, :] >= rank[:, None])
        has = cand.any(axis=1)
        if not has.any():
            continue
        sel = np.nonzero(has)[0]
        piv = np.argmax(cand[sel], axis=1)
        rk = rank[sel]
        prow = A[sel, piv, :].copy()
        A[sel, piv, :] = A[sel, rk, :]
        scale = inv(prow[:, c], p, k, mod)
        prow = mul(prow, scale[:, None], p, k, mod)
        A[sel, rk, :] = prow
        below = rows[None, :] > rk[:, None]
        factors = np.where(below, A[sel, :, c], 0)
        A[sel] = sub(A[sel], mul(factors[:, :, None], prow[:, None, :], p, k, mod), p, k, mod)
        rank[sel] += 1
    return rank
