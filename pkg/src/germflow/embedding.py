"""Embedding-flow synthesis, obstruction criterion and realification.

A map embeds in a formal flow with prescribed linear part exactly when some
tangent-to-identity conjugation makes it strongly resonant.  Deciding that
existentially is beyond any finite procedure, so this module implements a
semi-decision: the canonical zero-adjustment normal form either certifies
an embedding flow (every surviving monomial strong), or the weak-monomial
obstruction criterion certifies non-embeddability, or the answer is Unknown
with a machine-readable reason.  Both positive answers are verified before
they are returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    NonRealLinearPartError,
    NonRealMapError,
    PreconditionError,
    VerificationError,
)
from .explog import exp_field, log_unipotent
from .jets import (
    JetContext,
    JetField,
    JetMap,
    RealStructure,
    allclose,
    compose,
    invert,
    is_real,
    max_difference,
    pullback_field,
)
from .normalform import jordan_field, map_normal_form
from .spectrum import (
    Spectrum,
    enumerate_logarithms,
    resonance_class,
    shift_vector,
    weakly_resonant_monomials,
)
from . import jets as _jets


@dataclass(frozen=True)
class LogChoice:
    """One branch choice of logarithm for a linear part.

    ``spectrum`` holds the chosen eigenvalue logarithms (the semisimple
    data), ``nilpotent_linear`` the commuting nilpotent block of the linear
    field, and ``shifts`` the period multiples relative to a base choice.
    """

    spectrum: Spectrum
    nilpotent_linear: tuple[tuple[complex, ...], ...] = field(default=())
    shifts: tuple[int, ...] = field(default=())

    def __post_init__(self):
        n = self.spectrum.n
        if not self.nilpotent_linear:
            mat = tuple((0j,) * n for _ in range(n))
        else:
            mat = tuple(
                tuple(complex(v) for v in row) for row in self.nilpotent_linear
            )
            if len(mat) != n or any(len(row) != n for row in mat):
                raise PreconditionError("nilpotent_linear must be n x n")
        object.__setattr__(self, "nilpotent_linear", mat)
        if not self.shifts:
            object.__setattr__(self, "shifts", (0,) * n)
        else:
            object.__setattr__(self, "shifts", tuple(int(k) for k in self.shifts))
            if len(self.shifts) != n:
                raise PreconditionError("one shift per coordinate required")
        arr = np.asarray(mat, dtype=complex)
        if arr.size and np.max(np.abs(np.linalg.eigvals(arr))) > 1e-8 * max(
            1.0, float(np.max(np.abs(arr)))
        ):
            raise PreconditionError("nilpotent_linear is not nilpotent")
        # Commutation with diag(mu) must hold exactly at the spectrum level:
        # a nonzero entry couples coordinates with equal logarithms.
        for i in range(n):
            for j in range(n):
                if mat[i][j] != 0 and self.spectrum.logs[i] != self.spectrum.logs[j]:
                    raise PreconditionError(
                        f"nilpotent entry ({i},{j}) couples coordinates with "
                        "different eigenvalue logarithms"
                    )

    @property
    def n(self) -> int:
        return self.spectrum.n

    @classmethod
    def base(cls, spectrum: Spectrum, nilpotent_linear=()) -> "LogChoice":
        return cls(spectrum, nilpotent_linear)

    @classmethod
    def enumerate(
        cls, spectrum: Spectrum, bound: int, nilpotent_linear=()
    ) -> list["LogChoice"]:
        """All log choices within the shift bound, reality-preserving."""
        out = []
        for shifted in enumerate_logarithms(spectrum, bound):
            out.append(
                cls(shifted, nilpotent_linear, shift_vector(spectrum, shifted))
            )
        return out

    def linear_field(self, ctx: JetContext) -> JetField:
        mat = np.asarray(self.nilpotent_linear, dtype=complex) + np.diag(
            np.asarray(self.spectrum.values(), dtype=complex)
        )
        return JetField.from_linear(ctx, mat)

    def linear_exponential(self) -> np.ndarray:
        """``exp(diag(mu) + N)`` via the commuting splitting (exact N series)."""
        n = self.n
        nil = np.asarray(self.nilpotent_linear, dtype=complex)
        expn = np.eye(n, dtype=complex)
        term = np.eye(n, dtype=complex)
        for j in range(1, n):
            term = term @ nil / j
            expn += term
        return np.diag(np.asarray(self.spectrum.multipliers(), dtype=complex)) @ expn


@dataclass(frozen=True)
class EmbeddingVerdict:
    """Tri-state embedding answer with certificates.

    ``status`` is one of ``embeddable``, ``not_embeddable``, ``unknown``.
    Embeddable carries the flow; NotEmbeddable carries the weakly resonant
    witness monomials and which condition fired; Unknown carries a reason:
    ``hypothesis_fails``, ``no_weak_monomial`` or ``criteria_not_met``.
    """

    status: str
    flow: Optional[JetField] = None
    witness: tuple = ()
    condition: Optional[str] = None
    reason: Optional[str] = None
    normal_form: Optional[JetMap] = None

    @property
    def is_embeddable(self) -> bool:
        return self.status == "embeddable"

    @property
    def is_not_embeddable(self) -> bool:
        return self.status == "not_embeddable"

    @property
    def is_unknown(self) -> bool:
        return self.status == "unknown"


def _weak_terms_of_degree(f: JetMap, s: Spectrum, d: int, floor: float):
    out = []
    for a, j, c in f.homogeneous_part(d).terms():
        if abs(c) <= floor:
            continue
        cls = resonance_class(a, j, s)
        if cls.is_weak:
            out.append((a, j, c, cls.k))
    return out


def _check_linear_match(f: JetMap, c: LogChoice) -> None:
    want = c.linear_exponential()
    got = f.linear()
    scale = max(float(np.max(np.abs(want))), 1.0)
    if np.max(np.abs(got - want)) > 1e-8 * scale:
        raise PreconditionError(
            "linear part of the map does not equal exp of the chosen "
            "linear field"
        )


def synthesize_flow(f: JetMap, c: LogChoice, schedule: str = "batch") -> EmbeddingVerdict:
    """Try to embed ``f`` in a flow with linear part given by ``c``.

    Runs the canonical normalization; if the normal form is strongly
    resonant the flow is the diagonal field plus the logarithm of the
    unipotent factor, pushed back through the normalizing map, and the
    verdict is Embeddable (verified by re-exponentiation).  A weakly
    resonant residue defers to :func:`obstruction_check`; if that does not
    certify non-embeddability the verdict is Unknown.
    """
    s = c.spectrum
    ctx = f.ctx
    _check_linear_match(f, c)
    normal, eta = map_normal_form(f, s, schedule=schedule)

    floor = ctx.tol * max(normal.max_abs(), 1.0)
    weak = []
    for d in range(2, ctx.degree + 1):
        weak.extend(_weak_terms_of_degree(normal, s, d, floor))

    if weak:
        ob = obstruction_check(f, c)
        if ob.is_not_embeddable:
            return EmbeddingVerdict(
                "not_embeddable",
                witness=ob.witness,
                condition=ob.condition,
                normal_form=normal,
            )
        return EmbeddingVerdict(
            "unknown",
            witness=tuple(weak),
            reason=ob.reason or "criteria_not_met",
            normal_form=normal,
        )

    mults = s.multipliers()
    d_inv = JetMap.from_linear(
        ctx, np.diag(np.asarray([1.0 / m for m in mults], dtype=complex))
    )
    phi_u_normal = compose(d_inv, normal)
    w = log_unipotent(phi_u_normal)
    diag_field = JetField.from_linear(
        ctx, np.diag(np.asarray(s.values(), dtype=complex))
    )
    x_normal = diag_field + w
    x = pullback_field(x_normal, invert(eta)).pruned()

    scale = max(f.max_abs(), 1.0)
    err = max_difference(exp_field(x), f)
    if err > 10 * ctx.tol * scale:
        raise VerificationError(
            f"synthesized flow fails to reproduce the map (residual {err:.3e})"
        )
    lin_err = float(np.max(np.abs(x.linear() - (
        np.asarray(c.nilpotent_linear, dtype=complex)
        + np.diag(np.asarray(s.values(), dtype=complex))
    ))))
    if lin_err > 1e-8 * max(1.0, float(np.max(np.abs(x.linear())))):
        raise VerificationError(
            f"synthesized flow has wrong linear part (residual {lin_err:.3e})"
        )
    return EmbeddingVerdict("embeddable", flow=x, normal_form=normal)


def obstruction_check(f: JetMap, c: LogChoice) -> EmbeddingVerdict:
    """Weak-monomial non-embeddability criterion.

    With ``k0`` the lowest degree of a nonzero nonlinear part, condition (a)
    fires when that part contains a weakly resonant monomial.  Condition (b)
    fires at the lowest degree ``kw`` carrying a weak monomial when
    everything below is strongly resonant and no weak monomial class exists
    below ``kw`` at the spectrum level.  Both need the bracket of the chosen
    nilpotent linear field with every weak monomial field of the critical
    degree to vanish; otherwise the result is Unknown(hypothesis_fails).
    """
    s = c.spectrum
    ctx = f.ctx
    floor = ctx.tol * max(f.max_abs(), 1.0)

    degrees = sorted(
        {
            sum(a)
            for a, _, coeff in f.terms()
            if sum(a) >= 2 and abs(coeff) > floor
        }
    )
    if not degrees:
        return EmbeddingVerdict("unknown", reason="no_weak_monomial")

    nil_field = JetField.from_linear(
        ctx, np.asarray(c.nilpotent_linear, dtype=complex)
    )

    def hypothesis_holds(k: int) -> bool:
        if nil_field.is_zero:
            return True
        for a, j, _ in weakly_resonant_monomials(s, k, k):
            y = JetField.from_terms(ctx, [(a, j, 1.0)])
            br = _jets.bracket(nil_field, y)
            if br.max_abs() > ctx.tol * max(nil_field.max_abs(), 1.0):
                return False
        return True

    k0 = degrees[0]
    weak_k0 = _weak_terms_of_degree(f, s, k0, floor)
    if weak_k0:
        if hypothesis_holds(k0):
            return EmbeddingVerdict(
                "not_embeddable", witness=tuple(weak_k0), condition="a"
            )
        return EmbeddingVerdict(
            "unknown", witness=tuple(weak_k0), reason="hypothesis_fails"
        )

    # Condition (b): first degree that carries a weak monomial of f.
    kw = None
    weak_kw = ()
    for d in degrees[1:]:
        found = _weak_terms_of_degree(f, s, d, floor)
        if found:
            kw, weak_kw = d, tuple(found)
            break
    if kw is None:
        return EmbeddingVerdict("unknown", reason="no_weak_monomial")

    below_strong = True
    for d in range(2, kw):
        for a, j, coeff in f.homogeneous_part(d).terms():
            if abs(coeff) > floor and not resonance_class(a, j, s).is_strong:
                below_strong = False
                break
        if not below_strong:
            break
    no_weak_class_below = (
        kw <= 2 or not weakly_resonant_monomials(s, 2, kw - 1)
    )
    if below_strong and no_weak_class_below:
        if hypothesis_holds(kw):
            return EmbeddingVerdict(
                "not_embeddable", witness=weak_kw, condition="b"
            )
        return EmbeddingVerdict(
            "unknown", witness=weak_kw, reason="hypothesis_fails"
        )
    return EmbeddingVerdict(
        "unknown", witness=weak_kw, reason="criteria_not_met"
    )


def realify_flow(
    f: JetMap, x: JetField, r: RealStructure, s: Spectrum
) -> JetField:
    """Real embedding flow from a possibly non-real one.

    Given real ``f = exp(x)`` whose flow has a real linear part, returns
    the real field ``alpha_s + log(phi_u)`` where ``alpha`` is the real
    part of the semisimple component of ``x``.  Output is verified real
    and re-exponentiated before returning.
    """
    ctx = f.ctx
    if not is_real(f, r):
        raise NonRealMapError("the map is not real in w-coordinates")
    lin = JetField.from_linear(ctx, x.linear())
    if not is_real(lin, r):
        raise NonRealLinearPartError(
            "the flow's linear part is not real; realification requires a "
            "real linear part"
        )
    scale = max(f.max_abs(), 1.0)
    if max_difference(exp_field(x), f) > 1e-8 * scale:
        raise PreconditionError("exp of the flow does not reproduce the map")

    dec = jordan_field(x, s)
    alpha = (dec.xs + dec.xs.conjugate(r.rho)).scaled(0.5)
    alpha_dec = jordan_field(alpha, s)
    y = (alpha_dec.xs + dec.xn).pruned()

    if not is_real(y, r):
        raise VerificationError("realified flow failed the reality check")
    err = max_difference(exp_field(y), f)
    if err > 1e-8 * scale:
        raise VerificationError(
            f"realified flow fails to reproduce the map (residual {err:.3e})"
        )
    if float(np.max(np.abs(y.linear() - x.linear()))) > 1e-8 * max(
        1.0, float(np.max(np.abs(x.linear())))
    ):
        raise VerificationError("realified flow changed the linear part")
    return y


def check_uniqueness_hypothesis(c: LogChoice, degree_max: int) -> bool:
    """True when no weak monomial class exists up to ``degree_max``.

    In that setting the embedding flow with the chosen linear part, if any,
    is unique.
    """
    if degree_max < 2:
        raise ValueError("degree_max must be at least 2")
    return not weakly_resonant_monomials(c.spectrum, 2, degree_max)
