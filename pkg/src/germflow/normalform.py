"""Degree-by-degree normalization and Jordan-Chevalley decomposition of jets.

The elimination loop conjugates away removable monomials one degree at a
time.  Which monomials are removable is decided exactly by the spectrum:
for vector fields everything except strongly resonant monomials goes (the
divisor is the additive defect ``mu_j - <mu, a>``), for maps everything
except multiplicatively resonant monomials goes (the divisor is
``exp(mu_j) - prod exp(mu_i)^(a_i)``).

When the linear part carries a nilpotent block the single-division step
leaves a residue inside the same degree (the homological operator is the
semisimple divisor plus a commuting nilpotent), so the loop repeats within
the degree until the removable part is gone; the residue shrinks through a
nilpotent operator, so this terminates.

A numerically tiny divisor on an exactly-nonresonant monomial raises
``SmallDivisorError`` instead of silently dividing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    EliminationError,
    NotSemisimpleError,
    PreconditionError,
    SmallDivisorError,
)
from .explog import exp_field
from .jets import (
    JetContext,
    JetField,
    JetMap,
    JetSeries,
    apply_field,
    basis_monomials,
    compose,
    conjugate_map,
    invert,
    pullback_field,
)
from .spectrum import Spectrum, resonance_class

#: relative threshold below which a divisor counts as numerically unusable
SMALL_DIVISOR_RTOL = 1e-9


@dataclass(frozen=True)
class FieldDecomposition:
    """Additive decomposition ``x = xs + xn`` with ``[xs, xn] = 0``.

    ``eta`` is the tangent-to-identity map whose pullback makes ``xs``
    linear diagonal.
    """

    xs: JetField
    xn: JetField
    eta: JetMap


@dataclass(frozen=True)
class MapDecomposition:
    """Multiplicative decomposition ``f = phi_s o phi_u = phi_u o phi_s``.

    ``eta`` conjugates ``phi_s`` to its diagonal linear part.
    """

    phi_s: JetMap
    phi_u: JetMap
    eta: JetMap


@dataclass(frozen=True)
class JetOperatorMatrix:
    """Dense matrix of the action on the jet space, for oracle checks.

    Basis monomials are graded-lex ordered; column ``Le`` holds the
    expansion of the action applied to basis monomial ``e``.
    """

    k: int
    matrix: np.ndarray
    kind: str
    basis: tuple[tuple[int, ...], ...]


def _spectrum_values(s: Spectrum, ctx: JetContext):
    if s.n != ctx.n:
        raise PreconditionError("spectrum dimension does not match context")
    return s.values()


def _diag_field(ctx: JetContext, values) -> JetField:
    return JetField.from_linear(ctx, np.diag(np.asarray(values, dtype=complex)))


def _check_normalized_linear_field(x: JetField, s: Spectrum) -> np.ndarray:
    """Validate linear part = diag(mu) + commuting nilpotent; return it."""
    a = x.linear()
    vals = np.asarray(_spectrum_values(s, x.ctx), dtype=complex)
    d = np.diag(vals)
    n0 = a - d
    scale = max(np.max(np.abs(a)), 1.0)
    eigs = np.linalg.eigvals(n0)
    if np.max(np.abs(eigs)) > 1e-8 * scale:
        raise PreconditionError(
            "linear part minus diag(spectrum) is not nilpotent; "
            "conjugate the input so its semisimple part is diagonal"
        )
    if np.max(np.abs(d @ n0 - n0 @ d)) > 1e-8 * scale:
        raise PreconditionError(
            "nilpotent linear block does not commute with the diagonal"
        )
    return n0


def _check_normalized_linear_map(f: JetMap, s: Spectrum) -> np.ndarray:
    """Validate linear part = diag(exp mu) * commuting unipotent."""
    a = f.linear()
    mults = np.asarray(s.multipliers(), dtype=complex)
    lam = np.diag(mults)
    scale = max(np.max(np.abs(a)), 1.0)
    if np.max(np.abs(a @ lam - lam @ a)) > 1e-8 * scale * np.max(np.abs(mults)):
        raise PreconditionError(
            "linear part does not commute with diag(exp(spectrum))"
        )
    u0 = np.linalg.solve(lam, a)
    eigs = np.linalg.eigvals(u0)
    if np.max(np.abs(eigs - 1.0)) > 1e-8:
        raise PreconditionError(
            "linear part over diag(exp(spectrum)) is not unipotent; "
            "conjugate the input so its semisimple part is diagonal"
        )
    return u0


def _max_rounds(ctx: JetContext, k: int) -> int:
    return ctx.n * math.comb(k + ctx.n - 1, ctx.n - 1) + 3


def _removable_terms(obj, s: Spectrum, k: int, keep_strong_only: bool, floor: float):
    out = []
    for a, j, c in obj.homogeneous_part(k).terms():
        if abs(c) <= floor:
            continue
        cls = resonance_class(a, j, s)
        if cls.is_strong:
            continue
        if keep_strong_only or not cls.is_resonant:
            out.append((a, j, c))
    return out


def field_normal_form(
    x: JetField, s: Spectrum, schedule: str = "batch"
) -> tuple[JetField, JetMap]:
    """Kill every non-strongly-resonant monomial of ``x`` degree by degree.

    Returns ``(normal, eta)`` with ``normal`` the pullback of ``x`` through
    ``eta``; all nonlinear monomials of ``normal`` classify strong.
    """
    return _eliminate(x, s, kind="field", schedule=schedule)


def map_normal_form(
    f: JetMap, s: Spectrum, schedule: str = "batch"
) -> tuple[JetMap, JetMap]:
    """Kill every nonresonant monomial of ``f`` degree by degree.

    Returns ``(normal, eta)`` with ``normal = eta^(-1) o f o eta`` resonant
    (it commutes with the diagonal linear map of the spectrum).  Resonant
    monomials are never modified (zero-adjustment convention).
    """
    return _eliminate(f, s, kind="map", schedule=schedule)


def _eliminate(obj, s: Spectrum, kind: str, schedule: str):
    ctx = obj.ctx
    values = _spectrum_values(s, ctx)
    if kind == "map":
        mults = s.multipliers()
    if schedule not in ("batch", "single"):
        raise ValueError(f"unknown schedule {schedule!r}")

    work = obj
    eta_total = JetMap.identity(ctx)
    floor_scale = max(obj.max_abs(), 1.0)

    for k in range(2, ctx.degree + 1):
        for _ in range(_max_rounds(ctx, k)):
            floor = ctx.tol * max(work.max_abs(), floor_scale)
            targets = _removable_terms(
                work, s, k, keep_strong_only=(kind == "field"), floor=floor
            )
            if not targets:
                break
            if schedule == "single":
                targets = targets[:1]

            if kind == "field":
                corr_terms = []
                for a, j, c in targets:
                    div = complex(s.defect(a, j).value(s.basis))
                    _guard_divisor(div, a, j, max(abs(values[j]), 1.0))
                    corr_terms.append((a, j, c / div))
                corr = JetField.from_terms(ctx, corr_terms)
                eta_k = exp_field(corr.scaled(-1.0))
                work = pullback_field(work, eta_k)
            else:
                corr_terms = []
                for a, j, c in targets:
                    prod = 1.0 + 0j
                    for i, ai in enumerate(a):
                        if ai:
                            prod *= mults[i] ** ai
                    div = mults[j] - prod
                    _guard_divisor(div, a, j, max(abs(mults[j]), abs(prod), 1.0))
                    corr_terms.append((a, j, -c / div))
                h = JetMap.from_terms(ctx, corr_terms)
                eta_k = JetMap(
                    ctx,
                    [u + v for u, v in zip(JetMap.identity(ctx).components, h.components)],
                )
                work = conjugate_map(work, eta_k)
            eta_total = compose(eta_total, eta_k)
        else:
            raise EliminationError(
                f"degree-{k} elimination did not converge; "
                "the homological residue is not contracting"
            )
    return work.pruned(), eta_total.pruned()


def _guard_divisor(div: complex, a, j, scale: float) -> None:
    if abs(div) < SMALL_DIVISOR_RTOL * scale:
        raise SmallDivisorError(
            f"divisor {div:.3e} for exactly-nonresonant monomial "
            f"{a} e_{j} is numerically unusable",
            exponents=a,
            component=j,
            divisor=div,
        )


def linearize_semisimple_field(x: JetField, s: Spectrum) -> JetMap:
    """Tangent-to-identity ``eta`` with ``eta^* x`` linear diagonal.

    Requires the linear part of ``x`` to be exactly the diagonal of the
    spectrum.  Each degree solves the homological equation with the divisor
    ``mu_j - <mu, a>``; realness of ``x`` is preserved because conjugate
    monomial pairs receive conjugate correctors.  If any degree leaves a
    strongly resonant residue the field was not semisimple.
    """
    ctx = x.ctx
    a = x.linear()
    vals = np.asarray(_spectrum_values(s, ctx), dtype=complex)
    scale = max(np.max(np.abs(a)), 1.0)
    if np.max(np.abs(a - np.diag(vals))) > 1e-8 * scale:
        raise PreconditionError(
            "linear part must be the diagonal of the spectrum"
        )
    normal, eta = field_normal_form(x, s)
    residue = [
        (a_, j, c)
        for a_, j, c in normal.terms()
        if sum(a_) >= 2 and abs(c) > 100 * ctx.tol * max(normal.max_abs(), 1.0)
    ]
    if residue:
        raise NotSemisimpleError(
            "strongly resonant residue survives; the field is not semisimple",
            residue=residue,
        )
    return eta


def jordan_field(x: JetField, s: Spectrum) -> FieldDecomposition:
    """Jordan-Chevalley decomposition of a vector field jet.

    The linear part must have its semisimple part equal to ``diag(mu)``
    (conjugate first, e.g. via ``to_w_coords``).  The normal form splits as
    diagonal plus a strongly resonant remainder; pushing the diagonal back
    through the normalizing map gives the semisimple part and the remainder
    is ``x - xs`` termwise.
    """
    _check_normalized_linear_field(x, s)
    ctx = x.ctx
    normal, eta = field_normal_form(x, s)
    d_field = _diag_field(ctx, _spectrum_values(s, ctx))
    xs = pullback_field(d_field, invert(eta)).pruned()
    xn = (x - xs).pruned()
    return FieldDecomposition(xs, xn, eta)


def jordan_map(f: JetMap, s: Spectrum, schedule: str = "batch") -> MapDecomposition:
    """Jordan-Chevalley decomposition of a diffeomorphism jet.

    The linear part must have its semisimple part equal to
    ``diag(exp(mu))``.  In normal coordinates the map commutes with the
    diagonal ``D``, so ``D`` and ``D^(-1) o normal`` are the semisimple and
    unipotent factors; both are conjugated back through the normalizing map.
    """
    _check_normalized_linear_map(f, s)
    ctx = f.ctx
    normal, eta = map_normal_form(f, s, schedule=schedule)
    mults = s.multipliers()
    d_map = JetMap.from_linear(ctx, np.diag(np.asarray(mults, dtype=complex)))
    d_inv = JetMap.from_linear(
        ctx, np.diag(np.asarray([1.0 / m for m in mults], dtype=complex))
    )
    phi_u_normal = compose(d_inv, normal)
    eta_inv = invert(eta)
    phi_s = compose(compose(eta, d_map), eta_inv).pruned()
    phi_u = compose(compose(eta, phi_u_normal), eta_inv).pruned()
    return MapDecomposition(phi_s, phi_u, eta)


def jet_operator_matrix(obj, k: int) -> JetOperatorMatrix:
    """Matrix of ``g -> g o f`` (maps) or ``g -> x(g)`` (fields) on jets.

    Used as an independent dense-linear-algebra oracle for the
    decompositions: the additive/multiplicative matrix Jordan decomposition
    of this operator must match the jet-level one.
    """
    ctx = obj.ctx
    if not 1 <= k <= ctx.degree:
        raise ValueError(f"jet degree {k} outside 1..{ctx.degree}")
    kctx = JetContext(ctx.n, k, ctx.tol)
    basis = tuple(basis_monomials(ctx.n, k))
    index = {a: i for i, a in enumerate(basis)}
    dim = len(basis)
    mat = np.zeros((dim, dim), dtype=complex)

    small = obj.truncated(k).in_context(kctx)
    if isinstance(obj, JetMap):
        kind = "map"
        from .jets import _Composer

        composer = _Composer(small)
        for col, a in enumerate(basis):
            image = composer.monomial_value(a)
            for b, c in image.items():
                mat[index[b], col] = c
    elif isinstance(obj, JetField):
        kind = "field"
        for col, a in enumerate(basis):
            g = JetSeries.monomial(kctx, a, 1.0)
            image = apply_field(small, g)
            for b, c in image.items():
                mat[index[b], col] = c
    else:
        raise TypeError("expected a JetMap or JetField")
    return JetOperatorMatrix(k=k, matrix=mat, kind=kind, basis=basis)
