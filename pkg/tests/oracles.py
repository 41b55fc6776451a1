"""Independent brute-force implementations used as test oracles.

These deliberately avoid the library's truncation-aware kernels: products
are expanded in full and truncated at the end, Jordan decompositions come
from dense eigenspace linear algebra.  Slower, dumber, separately written.
"""

import itertools

import numpy as np


def naive_mul(a: dict, b: dict, n: int, degree: int) -> dict:
    """Full polynomial product of exponent->coeff dicts, truncated last."""
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            key = tuple(x + y for x, y in zip(ea, eb))
            out[key] = out.get(key, 0j) + ca * cb
    return {e: c for e, c in out.items() if sum(e) <= degree and c != 0}


def naive_pow(a: dict, p: int, n: int, degree: int) -> dict:
    out = {tuple([0] * n): 1.0 + 0j}
    for _ in range(p):
        out = naive_mul(out, a, n, degree)
    return out


def naive_compose(f_comps, g_comps, n: int, degree: int):
    """Composition f o g on dicts of exponent->coeff per component."""
    result = []
    for comp in f_comps:
        acc = {}
        for exps, coeff in comp.items():
            term = {tuple([0] * n): coeff}
            for i, e in enumerate(exps):
                if e:
                    term = naive_mul(term, naive_pow(g_comps[i], e, n, degree), n, degree)
            for k, v in term.items():
                acc[k] = acc.get(k, 0j) + v
        result.append({k: v for k, v in acc.items() if v != 0})
    return result


def jet_dict(obj):
    """Library jet -> list of plain dicts (exponents -> coeff)."""
    return [dict(comp.items()) for comp in obj.components]


def matrix_jordan_additive(t: np.ndarray, cluster_rtol: float = 1e-6):
    """Additive Jordan decomposition by generalized eigenspaces.

    Clusters the eigenvalues, extracts each generalized eigenspace as the
    nullspace of (T - c I)^m via SVD, and assembles the semisimple part in
    that basis.  Needs reasonably separated clusters.
    """
    dim = t.shape[0]
    eigs = np.linalg.eigvals(t)
    scale = max(np.max(np.abs(eigs)), 1.0)
    clusters = []
    for e in sorted(eigs, key=lambda z: (round(z.real, 8), round(z.imag, 8))):
        for c in clusters:
            if abs(e - c[0]) < cluster_rtol * scale:
                c[1].append(e)
                break
        else:
            clusters.append([e, [e]])
    basis_cols = []
    values = []
    for center, members in clusters:
        m = len(members)
        mean = sum(members) / m
        power = np.linalg.matrix_power(t - mean * np.eye(dim), m)
        _, sv, vh = np.linalg.svd(power)
        null_dim = sum(1 for s in sv if s < 1e-8 * max(sv.max(), 1.0))
        assert null_dim == m, f"cluster {mean}: nullity {null_dim} != {m}"
        basis_cols.append(vh.conj().T[:, dim - m:])
        values.extend([mean] * m)
    v = np.hstack(basis_cols)
    s = v @ np.diag(values) @ np.linalg.inv(v)
    return s, t - s


def matrix_jordan_multiplicative(t: np.ndarray, cluster_rtol: float = 1e-6):
    s, _ = matrix_jordan_additive(t, cluster_rtol)
    u = np.linalg.solve(s, t)
    return s, u


def brute_force_lattice_box(pairing, n: int, bound: int):
    """All integer vectors in the box with <m, mu> in 2*pi*i*Z, by exact pairing."""
    hits = []
    for m in itertools.product(range(-bound, bound + 1), repeat=n):
        if pairing(m):
            hits.append(m)
    return hits


def adjoint_series_pullback(x, w, bracket_fn, terms: int = 12):
    """Lie-series adjoint: x + [w, x] + [w,[w,x]]/2! + ... (oracle for pullback)."""
    acc = x
    cur = x
    fact = 1.0
    for j in range(1, terms + 1):
        cur = bracket_fn(w, cur)
        fact *= j
        if cur.is_zero:
            break
        acc = acc + cur.scaled(1.0 / fact)
    return acc
