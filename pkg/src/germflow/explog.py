"""Exponential of a vector field and logarithm of a unipotent map, at jet level.

The exponential is the Lie series ``g -> sum_j X^j(g) / j!`` applied to each
coordinate function.  For jet-nilpotent fields (nilpotent linear part) the
series terminates and the result is exact.  Otherwise summation runs until
the terms fall below the context tolerance relative to the partial sum, with
a hard iteration cutoff; hitting the cutoff with non-small terms raises a
diagnostic instead of returning garbage.

The logarithm of a unipotent map inverts the exponential through the shifted
operator ``theta(g) = g o f - g``, which is nilpotent on the jet space, so
``log(id + theta)`` is a finite sum.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ExpSeriesError, NonUnipotentError
from .jets import JetContext, JetField, JetMap, JetSeries, _Composer, compose

#: |eigenvalue - 1| threshold for accepting a linear part as unipotent
UNIPOTENT_EIG_TOL = 1e-8


def _series_cutoff(ctx: JetContext) -> int:
    return 8 * ctx.degree + 40


def exp_field(x: JetField) -> JetMap:
    """Time-1 map of the field ``x``, truncated to the context degree."""
    ctx = x.ctx
    cutoff = _series_cutoff(ctx)
    # Terms can grow before the factorial wins; min_steps delays the
    # small-term exit until past the largest possible jet eigenvalue.
    spectral_bound = ctx.degree * max(
        1.0, float(np.max(np.sum(np.abs(x.linear()), axis=1)))
    )
    min_steps = min(cutoff, 2 * math.ceil(spectral_bound) + 4)

    comps = []
    for i in range(ctx.n):
        term = JetSeries.variable(ctx, i)
        acc = term
        converged = False
        for j in range(1, cutoff + 1):
            term = _apply(x, term).scaled(1.0 / j)
            if term.is_zero:
                converged = True
                break
            acc = acc + term
            if j >= min_steps and term.max_abs() <= ctx.tol * max(acc.max_abs(), 1.0):
                converged = True
                break
        if not converged:
            residual = term.max_abs()
            raise ExpSeriesError(
                f"Lie series for coordinate {i} did not converge within "
                f"{cutoff} terms (last term magnitude {residual:.3e})"
            )
        comps.append(acc)
    return JetMap(ctx, comps).pruned()


def _apply(x: JetField, g: JetSeries) -> JetSeries:
    acc = JetSeries.zero(g.ctx)
    for i, comp in enumerate(x.components):
        if comp.is_zero:
            continue
        const, tail = g.derivative(i)
        if const != 0:
            acc = acc + comp.scaled(const)
        if not tail.is_zero:
            acc = acc + comp * tail
    return acc


def exp_time(x: JetField, t: complex) -> JetMap:
    """Time-``t`` map ``exp(t x)``."""
    t = complex(t)
    if t == 0:
        return JetMap.identity(x.ctx)
    return exp_field(x.scaled(t))


def is_unipotent(f: JetMap, tol: float = UNIPOTENT_EIG_TOL) -> bool:
    eigs = np.linalg.eigvals(f.linear())
    return bool(np.all(np.abs(eigs - 1.0) < tol))


def _deviation(f: JetMap) -> float:
    ident = JetMap.identity(f.ctx)
    return max(
        (a - b).max_abs() for a, b in zip(f.components, ident.components)
    )


def _sqrt_unipotent(f: JetMap) -> JetMap:
    """Compositional square root of a unipotent map, degree by degree.

    The linear part is the binomial series of the matrix square root (finite
    for unipotent matrices).  At each degree the correction solves
    ``R*delta + delta o R = -residual``; the operator is twice the identity
    plus a nilpotent remainder, so a short inner fixed-point iteration with
    the benign divisor 2 converges.
    """
    ctx = f.ctx
    n = ctx.n
    nil = f.linear() - np.eye(n)
    root = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    coeff = 1.0
    for k in range(1, n):
        coeff *= (0.5 - (k - 1)) / k
        term = term @ nil
        root += coeff * term
    h = JetMap.from_linear(ctx, root)
    r_map = JetMap.from_linear(ctx, root)

    for d in range(2, ctx.degree + 1):
        residual = [
            (x - y).homogeneous_part(d)
            for x, y in zip(compose(h, h).components, f.components)
        ]
        if all(c.is_zero for c in residual):
            continue
        delta = [JetSeries.zero(ctx) for _ in range(n)]
        r_composer = _Composer(r_map)
        for _ in range(ctx.jet_dim + 4):
            # L(delta) = R*delta + delta o R; M(delta) = L(delta) - 2*delta
            applied = _linear_image(ctx, root, delta)
            substituted = [
                c if c.is_zero else r_composer.substitute(c) for c in delta
            ]
            m_delta = [
                ap + su - dl.scaled(2.0)
                for ap, su, dl in zip(applied, substituted, delta)
            ]
            new_delta = [
                (res + md).scaled(-0.5) for res, md in zip(residual, m_delta)
            ]
            if all((a - b).is_zero for a, b in zip(new_delta, delta)):
                delta = new_delta
                break
            delta = new_delta
        h = JetMap(ctx, [a + b for a, b in zip(h.components, delta)])
    return h


def _linear_image(ctx: JetContext, mat: np.ndarray, vec) -> list:
    out = []
    for i in range(len(vec)):
        acc = JetSeries.zero(ctx)
        for j in range(len(vec)):
            if mat[i, j] != 0 and not vec[j].is_zero:
                acc = acc + vec[j].scaled(complex(mat[i, j]))
        out.append(acc)
    return out


def log_unipotent(f: JetMap) -> JetField:
    """Infinitesimal generator of a unipotent map.

    Returns the unique jet-nilpotent field with ``exp_field(log) == f``.
    The shifted-operator series ``sum (-1)^(j+1) theta^j(g) / j`` suffers
    catastrophic cancellation when the map is far from the identity (the
    iterates of ``theta(g) = g o f - g`` grow combinatorially before they
    cancel), so the map is first pulled toward the identity by repeated
    compositional square roots and the result is scaled back by the matching
    power of two.
    """
    ctx = f.ctx
    if not is_unipotent(f):
        eigs = np.linalg.eigvals(f.linear())
        worst = max(abs(e - 1.0) for e in eigs)
        raise NonUnipotentError(
            f"linear part has an eigenvalue {worst:.3e} away from 1"
        )

    g = f
    halvings = 0
    while _deviation(g) > 0.125 and halvings < 64:
        g = _sqrt_unipotent(g)
        halvings += 1

    composer = _Composer(g)
    max_iter = ctx.jet_dim + 4

    # theta strictly advances a monomial flag, so with an exactly unipotent
    # linear part the iterates cancel to exact zeros; no pruning inside the
    # loop, or dropped dust would resurface amplified at high degrees.
    comps = []
    for i in range(ctx.n):
        cur = composer.substitute(JetSeries.variable(ctx, i)) - JetSeries.variable(ctx, i)
        acc = cur
        j = 1
        while not cur.is_zero:
            j += 1
            if j > max_iter:
                raise ExpSeriesError(
                    f"theta iteration for coordinate {i} exceeded the "
                    f"nilpotency bound {max_iter}"
                )
            cur = composer.substitute(cur) - cur
            if cur.is_zero:
                break
            sign = 1.0 if j % 2 else -1.0
            acc = acc + cur.scaled(sign / j)
        comps.append(acc)
    return JetField(ctx, comps).scaled(float(2 ** halvings)).pruned()
