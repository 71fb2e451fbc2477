"""numba-compiled counterparts of the numpy kernels (same contracts)."""

import numpy as np
from numba import njit


@njit(cache=True)
def _mul1(a, b, p, k, mod):
    if k == 1:
        return (a * b) % p
    da = np.empty(k, np.int64)
    db = np.empty(k, np.int64)
    x = a
    y = b
    for i in range(k):
        da[i] = x % p
        x //= p
        db[i] = y % p
        y //= p
    prod = np.zeros(2 * k - 1, np.int64)
    for i in range(k):
        if da[i] == 0:
            continue
        for j in range(k):
            prod[i + j] = (prod[i + j] + da[i] * db[j]) % p
    for d in range(2 * k - 2, k - 1, -1):
        c = prod[d]
        if c == 0:
            continue
        for j in range(k):
            prod[d - k + j] = (prod[d - k + j] - c * mod[j]) % p
    code = 0
    for i in range(k - 1, -1, -1):
        code = code * p + prod[i]
    return code


@njit(cache=True)
def _add1(a, b, p, k):
    if k == 1:
        return (a + b) % p
    code = 0
    scale = 1
    for _ in range(k):
        code += ((a % p + b % p) % p) * scale
        a //= p
        b //= p
        scale *= p
    return code


@njit(cache=True)
def _sub1(a, b, p, k):
    if k == 1:
        return (a - b) % p
    code = 0
    scale = 1
    for _ in range(k):
        code += ((a % p - b % p) % p) * scale
        a //= p
        b //= p
        scale *= p
    return code


@njit(cache=True)
def _pow1(a, e, p, k, mod):
    result = 1
    base = a
    while e > 0:
        if e & 1:
            result = _mul1(result, base, p, k, mod)
        e >>= 1
        if e > 0:
            base = _mul1(base, base, p, k, mod)
    return result


@njit(cache=True)
def mul_flat(a, b, p, k, mod):
    out = np.empty(a.shape[0], np.int64)
    for i in range(a.shape[0]):
        out[i] = _mul1(a[i], b[i], p, k, mod)
    return out


@njit(cache=True)
def add_flat(a, b, p, k):
    out = np.empty(a.shape[0], np.int64)
    for i in range(a.shape[0]):
        out[i] = _add1(a[i], b[i], p, k)
    return out


@njit(cache=True)
def sub_flat(a, b, p, k):
    out = np.empty(a.shape[0], np.int64)
    for i in range(a.shape[0]):
        out[i] = _sub1(a[i], b[i], p, k)
    return out


@njit(cache=True)
def pow_flat(a, e, p, k, mod):
    out = np.empty(a.shape[0], np.int64)
    for i in range(a.shape[0]):
        out[i] = _pow1(a[i], e, p, k, mod)
    return out


@njit(cache=True)
def eval_poly(points, exps, coeffs, p, k, mod):
    n = points.shape[0]
    T = exps.shape[0]
    N = exps.shape[1]
    out = np.zeros(n, np.int64)
    for i in range(n):
        acc = 0
        for t in range(T):
            term = coeffs[t]
            for j in range(N):
                e = exps[t, j]
                if e > 0:
                    term = _mul1(term, _pow1(points[i, j], e, p, k, mod), p, k, mod)
                    if term == 0:
                        break
            acc = _add1(acc, term, p, k)
        out[i] = acc
    return out


@njit(cache=True)
def batch_rank(mats, p, k, mod):
    n = mats.shape[0]
    R = mats.shape[1]
    C = mats.shape[2]
    q = p ** k
    out = np.zeros(n, np.int64)
    A = np.empty((R, C), np.int64)
    for s in range(n):
        for r in range(R):
            for c in range(C):
                A[r, c] = mats[s, r, c]
        rank = 0
        for c in range(C):
            if rank == R:
                break
            piv = -1
            for r in range(rank, R):
                if A[r, c] != 0:
                    piv = r
                    break
            if piv < 0:
                continue
            if piv != rank:
                for cc in range(C):
                    tmp = A[piv, cc]
                    A[piv, cc] = A[rank, cc]
                    A[rank, cc] = tmp
            scale = _pow1(A[rank, c], q - 2, p, k, mod)
            for cc in range(C):
                A[rank, cc] = _mul1(A[rank, cc], scale, p, k, mod)
            for r in range(rank + 1, R):
                f = A[r, c]
                if f == 0:
                    continue
                for cc in range(C):
                    A[r, cc] = _sub1(A[r, cc], _mul1(f, A[rank, cc], p, k, mod), p, k)
            rank += 1
        out[s] = rank
    return out
