"""Exact integer linear algebra: Hermite normal form, kernels, membership.

Everything here runs on Python ints, so there is no overflow and results
are exact.  Matrices are lists of lists (rows); the functions never mutate
their arguments.

The HNF convention is the row-style one: the row span is preserved, pivots
are positive, pivot columns strictly increase downwards and every entry
above a pivot is reduced into ``[0, pivot)``.  With zero rows dropped this
form is the unique canonical representative of the row lattice, so lattice
equality is plain matrix equality.
"""

from __future__ import annotations


def _copy(mat):
    return [list(row) for row in mat]


def hermite_normal_form(mat: list[list[int]]) -> list[list[int]]:
    """Canonical row HNF of the lattice spanned by the rows of ``mat``.

    Zero rows are dropped, so the result has exactly ``rank`` rows.
    """
    h, _ = hnf_with_transform(mat)
    return [row for row in h if any(row)]


def hnf_with_transform(mat: list[list[int]]) -> tuple[list[list[int]], list[list[int]]]:
    """Row HNF together with a unimodular transform.

    Returns ``(H, U)`` with ``U @ mat == H``, ``U`` unimodular.  ``H`` has
    the pivot rows first and all zero rows at the bottom.
    """
    m = _copy(mat)
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    u = [[int(i == j) for j in range(nrows)] for i in range(nrows)]

    r = 0
    for c in range(ncols):
        # Clear column c below row r with gcd-style row operations.
        while True:
            nonzero = [i for i in range(r, nrows) if m[i][c] != 0]
            if not nonzero:
                break
            pivot = min(nonzero, key=lambda i: abs(m[i][c]))
            if pivot != r:
                m[r], m[pivot] = m[pivot], m[r]
                u[r], u[pivot] = u[pivot], u[r]
            done = True
            for i in range(r + 1, nrows):
                if m[i][c] == 0:
                    continue
                q = m[i][c] // m[r][c]
                if q:
                    m[i] = [a - q * b for a, b in zip(m[i], m[r])]
                    u[i] = [a - q * b for a, b in zip(u[i], u[r])]
                if m[i][c] != 0:
                    done = False
            if done:
                break
        if r < nrows and m[r][c] != 0:
            if m[r][c] < 0:
                m[r] = [-a for a in m[r]]
                u[r] = [-a for a in u[r]]
            for i in range(r):
                q = m[i][c] // m[r][c]
                if q:
                    m[i] = [a - q * b for a, b in zip(m[i], m[r])]
                    u[i] = [a - q * b for a, b in zip(u[i], u[r])]
            r += 1
        if r == nrows:
            break
    return m, u


def left_kernel_basis(mat: list[list[int]]) -> list[list[int]]:
    """Canonical basis of ``{x : x @ mat == 0}`` over the integers."""
    if not mat:
        return []
    h, u = hnf_with_transform(mat)
    kernel_rows = [u[i] for i in range(len(h)) if not any(h[i])]
    return hermite_normal_form(kernel_rows) if kernel_rows else []


def pivot_columns(hnf_rows: list[list[int]]) -> list[int]:
    """Column index of the leading entry of each HNF row."""
    cols = []
    for row in hnf_rows:
        for c, a in enumerate(row):
            if a != 0:
                cols.append(c)
                break
    return cols


def lattice_contains(hnf_rows: list[list[int]], vec: list[int]) -> bool:
    """Membership of ``vec`` in the row lattice given by canonical HNF rows."""
    v = list(vec)
    for row, c in zip(hnf_rows, pivot_columns(hnf_rows)):
        if v[c] % row[c] != 0:
            return False
        q = v[c] // row[c]
        if q:
            v = [a - q * b for a, b in zip(v, row)]
    return not any(v)
