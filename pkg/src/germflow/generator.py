"""Construction of embeddable maps carrying weakly resonant monomials.

The recipe: take a commuting pair (diagonal semisimple field, strongly
resonant nilpotent field), find a real weakly resonant partner whose
bracket with the nilpotent part does not vanish, and conjugate the
exponential by the truncated exponential of the partner.  The result is a
real, resonant, embeddable map that is not strongly resonant, which is
exactly what defeats the naive weak-resonance obstruction.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .errors import PartnerNotFoundError, PreconditionError, VerificationError
from .explog import exp_field
from .jets import (
    JetContext,
    JetField,
    JetMap,
    RealStructure,
    bracket,
    compose,
    invert,
    is_real,
)
from .spectrum import (
    Spectrum,
    conjugate_monomial,
    graded_monomials,
    resonance_class,
)


def _lift(x: JetField, ctx: JetContext) -> JetField:
    return x if x.ctx == ctx else x.in_context(ctx)


def find_weak_partner(
    xn: JetField, s: Spectrum, degree_bound: int
) -> JetField:
    """First real weakly resonant field with nonzero bracket against ``xn``.

    Searches monomials by increasing degree then graded-lex, takes the
    first hit and realifies it with its conjugate partner (or the
    imaginary combination when the real one brackets to zero).  Raises
    ``PartnerNotFoundError`` if the bound is exhausted; that does not rule
    out partners of higher degree.
    """
    ctx = xn.ctx
    if xn.is_zero:
        raise PreconditionError("nilpotent field must be nonzero")
    if not 2 <= degree_bound <= ctx.degree:
        raise PreconditionError(
            f"degree bound must lie in 2..{ctx.degree} (context degree)"
        )
    for a, j, c in xn.terms():
        if not resonance_class(a, j, s).is_strong:
            raise PreconditionError(
                f"nilpotent field carries a non-strong monomial {a} e_{j}"
            )
    xn_deg = max(sum(a) for a, _, _ in xn.terms())

    rho = s.rho
    rstruct = RealStructure(rho)
    for a in graded_monomials(s.n, 2, degree_bound):
        for j in range(s.n):
            if not resonance_class(a, j, s).is_weak:
                continue
            deg = sum(a)
            # See the bracket fully even when it overflows the context.
            big = JetContext(ctx.n, max(ctx.degree, deg + xn_deg - 1), ctx.tol)
            xn_big = _lift(xn, big)
            y = JetField.from_terms(big, [(a, j, 1.0)])
            if bracket(y, xn_big).is_zero:
                continue
            conj_a, conj_j = conjugate_monomial(a, j, s)
            if (conj_a, conj_j) == (a, j):
                candidates = [JetField.from_terms(big, [(a, j, 1.0)])]
            else:
                candidates = [
                    JetField.from_terms(big, [(a, j, 1.0), (conj_a, conj_j, 1.0)]),
                    JetField.from_terms(
                        big, [(a, j, -1j), (conj_a, conj_j, 1j)]
                    ),
                ]
            for cand in candidates:
                if bracket(cand, xn_big).is_zero:
                    continue
                result = cand.in_context(ctx)
                if not is_real(result, rstruct):
                    raise VerificationError("realified partner is not real")
                for aa, jj, _ in result.terms():
                    if not resonance_class(aa, jj, s).is_weak:
                        raise VerificationError(
                            "realified partner has a non-weak monomial"
                        )
                return result
    raise PartnerNotFoundError(
        f"no weakly resonant partner with nonzero bracket up to degree "
        f"{degree_bound}"
    )


def build_counterexample(
    xs: JetField,
    xn: JetField,
    yp: JetField,
    l: int,
    s: Spectrum,
) -> JetMap:
    """Embeddable map with non-vanishing weakly resonant monomials.

    ``eta`` is the degree-``l`` jet of ``exp(yp)`` (the truncation matters:
    the full exponential differs at higher degrees) and the result is
    ``eta^(-1) o exp(xs + xn) o eta``.  Reality, termwise resonance and the
    presence of a weak monomial are all verified before returning.
    """
    ctx = xs.ctx
    ctx.check(xn.ctx)
    ctx.check(yp.ctx)
    rstruct = RealStructure(s.rho)
    values = np.asarray(s.values(), dtype=complex)

    # xs: linear, diagonal, real, matching the spectrum.
    for a, j, c in xs.terms():
        if sum(a) != 1 or a[j] != 1:
            raise PreconditionError("semisimple input must be linear diagonal")
    lin = xs.linear()
    if np.max(np.abs(lin - np.diag(values))) > 1e-8 * max(1.0, np.max(np.abs(values))):
        raise PreconditionError("diagonal entries do not match the spectrum")
    if not is_real(xs, rstruct):
        raise PreconditionError("semisimple input is not real")

    if xn.is_zero:
        raise PreconditionError("nilpotent input must be nonzero")
    if not is_real(xn, rstruct):
        raise PreconditionError("nilpotent input is not real")
    for a, j, c in xn.terms():
        if not resonance_class(a, j, s).is_strong:
            raise PreconditionError(
                f"nilpotent input has non-strong monomial {a} e_{j}"
            )
    comm = bracket(xs, xn)
    if comm.max_abs() > 10 * ctx.tol * max(xn.max_abs(), 1.0):
        raise PreconditionError("inputs do not commute: [xs, xn] != 0")

    degrees = {sum(a) for a, _, _ in yp.terms()}
    if degrees != {l}:
        raise PreconditionError(f"partner must be homogeneous of degree {l}")
    if not is_real(yp, rstruct):
        raise PreconditionError("partner is not real")
    for a, j, c in yp.terms():
        if not resonance_class(a, j, s).is_weak:
            raise PreconditionError(
                f"partner has non-weak monomial {a} e_{j}"
            )
    xn_deg = min(sum(a) for a, _, _ in xn.terms())
    if l + xn_deg - 1 > ctx.degree:
        raise PreconditionError(
            "context degree too small to carry the weak monomials at degree "
            f"{l + xn_deg - 1}"
        )
    br = bracket(yp, xn)
    if br.max_abs() <= 10 * ctx.tol * max(xn.max_abs(), 1.0):
        raise PreconditionError(
            "bracket of partner and nilpotent input vanishes; the "
            "construction would stay strongly resonant"
        )

    eta = exp_field(yp).truncated(l)
    phi = compose(compose(invert(eta), exp_field(xs + xn)), eta).pruned()

    if not is_real(phi, rstruct):
        raise VerificationError("constructed map is not real")
    floor = ctx.tol * max(phi.max_abs(), 1.0)
    weak_found = False
    for a, j, c in phi.terms():
        if abs(c) <= floor:
            continue
        cls = resonance_class(a, j, s)
        if not cls.is_resonant:
            raise VerificationError(
                f"constructed map has nonresonant monomial {a} e_{j}"
            )
        weak_found = weak_found or cls.is_weak
    if not weak_found:
        raise VerificationError(
            "constructed map is strongly resonant; no weak monomial survived"
        )
    return phi
