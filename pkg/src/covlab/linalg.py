"""Gaussian elimination over a finite field on small matrices of Elements."""

from __future__ import annotations

from typing import Sequence

from .ffield import Element, FieldSpec


def row_reduce(rows: Sequence[Sequence[Element]], field: FieldSpec, ncols: int):
    """Reduced row echelon form.  Returns (matrix, pivot columns)."""
    A = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(A)) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = A[r][c].inverse()
        A[r] = [x * inv for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == len(A):
            break
    return A, pivots


def rank(rows: Sequence[Sequence[Element]], field: FieldSpec, ncols: int) -> int:
    return len(row_reduce(rows, field, ncols)[1])


def nullspace(rows: Sequence[Sequence[Element]], field: FieldSpec, ncols: int) -> list[list[Element]]:
    """Basis of {v : A v = 0}, one vector per free column."""
    R, pivots = row_reduce(rows, field, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [field.zero] * ncols
        v[f] = field.one
        for i, pc in enumerate(pivots):
            v[pc] = -R[i][f]
        basis.append(v)
    return basis
