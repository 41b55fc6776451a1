"""Degree-truncated multivariate polynomial maps and vector fields.

Jets are polynomials without constant term, truncated at a fixed degree K
(classes of the maximal ideal modulo ``m^(K+1)``).  Coefficients are complex
doubles; exactness lives in :mod:`germflow.spectrum`, never here.

All values are immutable once built.  Operations return new objects and
prune coefficients whose magnitude falls below ``tol`` times the largest
coefficient magnitude of the result, which keeps float dust out of golden
comparisons.  Mixing objects from different contexts raises; there is no
implicit re-truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional, Sequence

import numpy as np

from .errors import ContextMismatchError, SingularLinearPartError
from .spectrum import Spectrum, monomials_of_degree

Exponents = tuple[int, ...]


@dataclass(frozen=True)
class JetContext:
    """Number of variables, truncation degree and comparison tolerance."""

    n: int
    degree: int
    tol: float = 1e-12

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one variable")
        if self.degree < 1:
            raise ValueError("truncation degree must be >= 1")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")

    @property
    def jet_dim(self) -> int:
        """Dimension of the space of jets (monomials of degree 1..degree)."""
        return math.comb(self.n + self.degree, self.n) - 1

    def check(self, other: "JetContext") -> None:
        if self != other:
            raise ContextMismatchError(f"context mismatch: {self} vs {other}")


def _unit(n: int, i: int) -> Exponents:
    return tuple(int(k == i) for k in range(n))


class JetSeries:
    """One truncated power series without constant term."""

    __slots__ = ("ctx", "_terms")

    def __init__(self, ctx: JetContext, terms: Mapping[Exponents, complex] = (), *, _raw=False):
        self.ctx = ctx
        if _raw:
            self._terms = dict(terms)
            return
        clean: dict[Exponents, complex] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for a, c in items:
            a = tuple(int(x) for x in a)
            if len(a) != ctx.n:
                raise ValueError(f"exponent vector {a} has wrong length")
            if any(x < 0 for x in a):
                raise ValueError(f"negative exponent in {a}")
            d = sum(a)
            if d == 0:
                raise ValueError("constant terms are not representable in a jet")
            if d > ctx.degree:
                continue
            c = complex(c)
            if c != 0:
                clean[a] = clean.get(a, 0j) + c
        self._terms = {a: c for a, c in clean.items() if c != 0}

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, ctx: JetContext) -> "JetSeries":
        return cls(ctx, {}, _raw=True)

    @classmethod
    def variable(cls, ctx: JetContext, i: int) -> "JetSeries":
        return cls(ctx, {_unit(ctx.n, i): 1.0 + 0j}, _raw=True)

    @classmethod
    def monomial(cls, ctx: JetContext, exponents: Sequence[int], coeff: complex) -> "JetSeries":
        return cls(ctx, {tuple(exponents): coeff})

    # -- inspection --------------------------------------------------------

    def items(self):
        return self._terms.items()

    def sorted_terms(self) -> list[tuple[Exponents, complex]]:
        return sorted(self._terms.items(), key=lambda t: (sum(t[0]), t[0]))

    def coeff(self, exponents: Sequence[int]) -> complex:
        return self._terms.get(tuple(exponents), 0j)

    def max_abs(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def min_degree(self) -> int:
        return min((sum(a) for a in self._terms), default=self.ctx.degree + 1)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, JetSeries)
            and self.ctx == other.ctx
            and self._terms == other._terms
        )

    def __hash__(self):
        raise TypeError("JetSeries is not hashable")

    def __repr__(self):
        return f"JetSeries({format_terms(self.sorted_terms())})"

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "JetSeries") -> "JetSeries":
        self.ctx.check(other.ctx)
        out = dict(self._terms)
        for a, c in other._terms.items():
            v = out.get(a, 0j) + c
            if v == 0:
                out.pop(a, None)
            else:
                out[a] = v
        return JetSeries(self.ctx, out, _raw=True)

    def __sub__(self, other: "JetSeries") -> "JetSeries":
        return self + other.scaled(-1.0)

    def __neg__(self) -> "JetSeries":
        return self.scaled(-1.0)

    def scaled(self, c: complex) -> "JetSeries":
        c = complex(c)
        if c == 0:
            return JetSeries.zero(self.ctx)
        out = {a: v * c for a, v in self._terms.items()}
        return JetSeries(self.ctx, {a: v for a, v in out.items() if v != 0}, _raw=True)

    def __mul__(self, other: "JetSeries") -> "JetSeries":
        """Truncated product; degree bookkeeping skips overflow pairs early."""
        self.ctx.check(other.ctx)
        K = self.ctx.degree
        by_degree: dict[int, list[tuple[Exponents, complex]]] = {}
        for b, cb in other._terms.items():
            by_degree.setdefault(sum(b), []).append((b, cb))
        out: dict[Exponents, complex] = {}
        for a, ca in self._terms.items():
            da = sum(a)
            for db, bucket in by_degree.items():
                if da + db > K:
                    continue
                for b, cb in bucket:
                    key = tuple(x + y for x, y in zip(a, b))
                    out[key] = out.get(key, 0j) + ca * cb
        return JetSeries(self.ctx, {a: c for a, c in out.items() if c != 0}, _raw=True)

    def homogeneous_part(self, d: int) -> "JetSeries":
        return JetSeries(
            self.ctx, {a: c for a, c in self._terms.items() if sum(a) == d}, _raw=True
        )

    def truncated(self, d: int) -> "JetSeries":
        return JetSeries(
            self.ctx, {a: c for a, c in self._terms.items() if sum(a) <= d}, _raw=True
        )

    def derivative(self, i: int) -> tuple[complex, "JetSeries"]:
        """Partial derivative; the constant part is returned separately."""
        const = 0j
        terms: dict[Exponents, complex] = {}
        for a, c in self._terms.items():
            if a[i] == 0:
                continue
            coeff = c * a[i]
            if sum(a) == 1:
                const += coeff
            else:
                b = list(a)
                b[i] -= 1
                terms[tuple(b)] = terms.get(tuple(b), 0j) + coeff
        return const, JetSeries(self.ctx, terms, _raw=True)

    def pruned(self, floor: float) -> "JetSeries":
        if floor <= 0:
            return self
        return JetSeries(
            self.ctx,
            {a: c for a, c in self._terms.items() if abs(c) > floor},
            _raw=True,
        )


class _Composer:
    """Substitution engine: evaluates series at the components of a map.

    Caches powers of the target components and full monomial values, so
    repeated substitutions through the same map (inversion, logarithm
    iterations, operator matrices) share the work.
    """

    def __init__(self, target: "JetMap"):
        self.target = target
        self.ctx = target.ctx
        self._powers: dict[tuple[int, int], JetSeries] = {}
        self._monomials: dict[Exponents, JetSeries] = {}

    def _power(self, i: int, e: int) -> JetSeries:
        key = (i, e)
        got = self._powers.get(key)
        if got is None:
            if e == 1:
                got = self.target.components[i]
            else:
                got = self._power(i, e - 1) * self.target.components[i]
            self._powers[key] = got
        return got

    def monomial_value(self, a: Exponents) -> JetSeries:
        got = self._monomials.get(a)
        if got is None:
            i = max(k for k in range(len(a)) if a[k] > 0)
            if sum(a) == a[i]:
                got = self._power(i, a[i])
            else:
                b = list(a)
                b[i] = 0
                got = self.monomial_value(tuple(b)) * self._power(i, a[i])
            self._monomials[a] = got
        return got

    def substitute(self, series: JetSeries) -> JetSeries:
        acc = JetSeries.zero(self.ctx)
        for a, c in series.sorted_terms():
            acc = acc + self.monomial_value(a).scaled(c)
        return acc


class _PolyVector:
    """Shared plumbing of maps and fields: n component series."""

    __slots__ = ("ctx", "components")

    def __init__(self, ctx: JetContext, components: Sequence[JetSeries]):
        if len(components) != ctx.n:
            raise ValueError("one component per variable required")
        for comp in components:
            ctx.check(comp.ctx)
        self.ctx = ctx
        self.components = tuple(components)

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_terms(cls, ctx: JetContext, terms: Iterable[tuple[Sequence[int], int, complex]]):
        comps: list[dict[Exponents, complex]] = [dict() for _ in range(ctx.n)]
        for exponents, j, coeff in terms:
            if not 0 <= j < ctx.n:
                raise ValueError(f"component index {j} out of range")
            key = tuple(int(x) for x in exponents)
            comps[j][key] = comps[j].get(key, 0j) + complex(coeff)
        return cls(ctx, [JetSeries(ctx, comp) for comp in comps])

    @classmethod
    def from_linear(cls, ctx: JetContext, matrix) -> "_PolyVector":
        mat = np.asarray(matrix, dtype=complex)
        if mat.shape != (ctx.n, ctx.n):
            raise ValueError("linear part must be n x n")
        comps = []
        for i in range(ctx.n):
            terms = {
                _unit(ctx.n, j): complex(mat[i, j])
                for j in range(ctx.n)
                if mat[i, j] != 0
            }
            comps.append(JetSeries(ctx, terms, _raw=True))
        return cls(ctx, comps)

    @classmethod
    def zero(cls, ctx: JetContext):
        return cls(ctx, [JetSeries.zero(ctx) for _ in range(ctx.n)])

    # -- inspection --------------------------------------------------------

    def linear(self) -> np.ndarray:
        """Degree-1 coefficient matrix (rows = components)."""
        n = self.ctx.n
        mat = np.zeros((n, n), dtype=complex)
        for i, comp in enumerate(self.components):
            for j in range(n):
                mat[i, j] = comp.coeff(_unit(n, j))
        return mat

    def terms(self) -> Iterator[tuple[Exponents, int, complex]]:
        """All terms in deterministic graded order: (degree, exponents, component)."""
        collected = []
        for j, comp in enumerate(self.components):
            for a, c in comp.items():
                collected.append((sum(a), a, j, c))
        collected.sort(key=lambda t: t[:3])
        for _, a, j, c in collected:
            yield a, j, c

    def max_abs(self) -> float:
        return max((comp.max_abs() for comp in self.components), default=0.0)

    @property
    def is_zero(self) -> bool:
        return all(comp.is_zero for comp in self.components)

    def min_degree(self) -> int:
        return min(comp.min_degree() for comp in self.components)

    def __eq__(self, other) -> bool:
        return (
            type(self) is type(other)
            and self.ctx == other.ctx
            and self.components == other.components
        )

    def __hash__(self):
        raise TypeError("jet objects are not hashable")

    def __repr__(self):
        rows = []
        for j, comp in enumerate(self.components):
            rows.append(f"  [{j}] {format_terms(comp.sorted_terms())}")
        return f"{type(self).__name__}(\n" + "\n".join(rows) + "\n)"

    # -- structure ---------------------------------------------------------

    def homogeneous_part(self, d: int):
        if not 1 <= d <= self.ctx.degree:
            raise ValueError(f"degree {d} outside 1..{self.ctx.degree}")
        return type(self)(self.ctx, [c.homogeneous_part(d) for c in self.components])

    def truncated(self, d: int):
        return type(self)(self.ctx, [c.truncated(d) for c in self.components])

    def pruned(self):
        """Drop coefficients below ``tol`` relative to the largest one."""
        floor = self.ctx.tol * self.max_abs()
        return type(self)(self.ctx, [c.pruned(floor) for c in self.components])

    def in_context(self, ctx: JetContext):
        """Re-home the object in another context (degree may grow or shrink)."""
        if ctx.n != self.ctx.n:
            raise ContextMismatchError("variable count differs")
        return type(self).from_terms(ctx, self.terms())

    def conjugate(self, rho: Sequence[int]):
        """Coefficientwise conjugation paired with the rho-involution."""
        out = []
        n = self.ctx.n
        comps: list[dict[Exponents, complex]] = [dict() for _ in range(n)]
        for a, j, c in self.terms():
            b = tuple(a[rho[i]] for i in range(n))
            comps[rho[j]][b] = comps[rho[j]].get(b, 0j) + c.conjugate()
        for comp in comps:
            out.append(JetSeries(self.ctx, comp, _raw=True))
        return type(self)(self.ctx, out)


class JetMap(_PolyVector):
    """Polynomial map jet; a formal diffeomorphism when the linear part is invertible."""

    @classmethod
    def identity(cls, ctx: JetContext) -> "JetMap":
        return cls(ctx, [JetSeries.variable(ctx, i) for i in range(ctx.n)])

    def is_tangent_to_identity(self, rtol: float = 1e-9) -> bool:
        return bool(np.allclose(self.linear(), np.eye(self.ctx.n), rtol=0, atol=rtol))


class JetField(_PolyVector):
    """Singular vector field jet, acting as a derivation on jets."""

    def __add__(self, other: "JetField") -> "JetField":
        self.ctx.check(other.ctx)
        return JetField(self.ctx, [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "JetField") -> "JetField":
        self.ctx.check(other.ctx)
        return JetField(self.ctx, [a - b for a, b in zip(self.components, other.components)])

    def __neg__(self) -> "JetField":
        return self.scaled(-1.0)

    def scaled(self, c: complex) -> "JetField":
        return JetField(self.ctx, [comp.scaled(c) for comp in self.components])


# -- operations -------------------------------------------------------------


def compose(f: JetMap, g: JetMap) -> JetMap:
    """Truncated composition ``f o g``."""
    f.ctx.check(g.ctx)
    comp = _Composer(g)
    return JetMap(f.ctx, [comp.substitute(c) for c in f.components]).pruned()


def compose_series(series: JetSeries, g: JetMap) -> JetSeries:
    """Truncated substitution ``series o g``."""
    series.ctx.check(g.ctx)
    return _Composer(g).substitute(series)


def invert(f: JetMap) -> JetMap:
    """Compositional inverse by degree-by-degree back-substitution."""
    ctx = f.ctx
    a = f.linear()
    try:
        a_inv = np.linalg.inv(a)
    except np.linalg.LinAlgError as exc:
        raise SingularLinearPartError("linear part is singular") from exc
    if not np.all(np.isfinite(a_inv)) or np.linalg.cond(a) > 1e12:
        raise SingularLinearPartError("linear part is singular or ill-conditioned")
    g = JetMap.from_linear(ctx, a_inv)
    ident = JetMap.identity(ctx)
    for d in range(2, ctx.degree + 1):
        err_comps = [
            x - y for x, y in zip(compose(f, g).components, ident.components)
        ]
        err_d = [c.homogeneous_part(d) for c in err_comps]
        if all(c.is_zero for c in err_d):
            continue
        # Subtract A^{-1} * err_d; the linear part of f then cancels err_d
        # and the correction only perturbs degrees > d.
        fix = []
        for i in range(ctx.n):
            acc = JetSeries.zero(ctx)
            for j in range(ctx.n):
                if a_inv[i, j] != 0 and not err_d[j].is_zero:
                    acc = acc + err_d[j].scaled(a_inv[i, j])
            fix.append(acc)
        g = JetMap(ctx, [x - y for x, y in zip(g.components, fix)])
    return g.pruned()


def apply_field(x: JetField, g: JetSeries) -> JetSeries:
    """Derivation action ``sum_i x_i * dg/dw_i`` truncated to the context degree."""
    x.ctx.check(g.ctx)
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


def bracket(x: JetField, y: JetField) -> JetField:
    """Lie bracket ``[x, y]`` with components ``x(y_j) - y(x_j)``."""
    x.ctx.check(y.ctx)
    comps = [
        apply_field(x, y.components[j]) - apply_field(y, x.components[j])
        for j in range(x.ctx.n)
    ]
    return JetField(x.ctx, comps)


def homogeneous_component(obj, d: int):
    """Degree-``d`` homogeneous part of a map or field."""
    return obj.homogeneous_part(d)


def conjugate_map(f: JetMap, eta: JetMap) -> JetMap:
    """Coordinate change ``eta^(-1) o f o eta``."""
    return compose(invert(eta), compose(f, eta))


def pullback_field(x: JetField, eta: JetMap) -> JetField:
    """Field in the source coordinates of ``eta``: ``(D eta)^(-1) (x o eta)``.

    Satisfies ``exp(pullback(x, eta)) = eta^(-1) o exp(x) o eta``; for
    ``eta = exp(w)`` this is the Lie-series adjoint ``x + [w, x] + ...``.
    """
    x.ctx.check(eta.ctx)
    ctx = x.ctx
    comp = _Composer(eta)
    b = [comp.substitute(c) for c in x.components]

    # Jacobian of eta: constant part + series tail.
    a = np.zeros((ctx.n, ctx.n), dtype=complex)
    tail: list[list[Optional[JetSeries]]] = [[None] * ctx.n for _ in range(ctx.n)]
    any_tail = False
    for i in range(ctx.n):
        for j in range(ctx.n):
            const, t = eta.components[i].derivative(j)
            a[i, j] = const
            if not t.is_zero:
                tail[i][j] = t
                any_tail = True
    try:
        a_inv = np.linalg.inv(a)
    except np.linalg.LinAlgError as exc:
        raise SingularLinearPartError("eta has singular linear part") from exc

    def solve_linear(vec: list[JetSeries]) -> list[JetSeries]:
        out = []
        for i in range(ctx.n):
            acc = JetSeries.zero(ctx)
            for j in range(ctx.n):
                if a_inv[i, j] != 0 and not vec[j].is_zero:
                    acc = acc + vec[j].scaled(a_inv[i, j])
            out.append(acc)
        return out

    y = solve_linear(b)
    if any_tail:
        # Iterate y <- A^{-1} (b - T y); each pass fixes one more degree.
        for _ in range(ctx.degree):
            ty = []
            for i in range(ctx.n):
                acc = JetSeries.zero(ctx)
                for j in range(ctx.n):
                    t = tail[i][j]
                    if t is not None and not y[j].is_zero:
                        acc = acc + t * y[j]
                ty.append(acc)
            new_y = solve_linear([bi - ti for bi, ti in zip(b, ty)])
            if all((u - v).is_zero for u, v in zip(new_y, y)):
                y = new_y
                break
            y = new_y
    return JetField(ctx, y).pruned()


def pushforward_field(x: JetField, eta: JetMap) -> JetField:
    """Field in the target coordinates of ``eta`` (inverse of pullback)."""
    return pullback_field(x, invert(eta))


# -- real structure ----------------------------------------------------------


class RealStructure:
    """Pairing of complexified coordinates and the block change of basis.

    Built from the rho-involution.  Each conjugate pair (p, q) carries the
    2x2 block substitution ``z_p = w_p + w_q``, ``z_q = -i w_p + i w_q``;
    fixed coordinates are shared between both systems.
    """

    __slots__ = ("n", "rho", "pairs", "fixed")

    def __init__(self, rho: Sequence[int]):
        rho = tuple(int(r) for r in rho)
        n = len(rho)
        if sorted(rho) != list(range(n)):
            raise ValueError("rho is not a permutation")
        for j, r in enumerate(rho):
            if rho[r] != j:
                raise ValueError("rho is not an involution")
        self.n = n
        self.rho = rho
        self.pairs = tuple((j, rho[j]) for j in range(n) if j < rho[j])
        self.fixed = tuple(j for j in range(n) if rho[j] == j)

    @classmethod
    def from_spectrum(cls, s: Spectrum) -> "RealStructure":
        return cls(s.rho)

    def w_to_z_matrix(self) -> np.ndarray:
        mat = np.zeros((self.n, self.n), dtype=complex)
        for q in self.fixed:
            mat[q, q] = 1.0
        for p, q in self.pairs:
            mat[p, p] = 1.0
            mat[p, q] = 1.0
            mat[q, p] = -1j
            mat[q, q] = 1j
        return mat

    def z_to_w_matrix(self) -> np.ndarray:
        mat = np.zeros((self.n, self.n), dtype=complex)
        for q in self.fixed:
            mat[q, q] = 1.0
        for p, q in self.pairs:
            mat[p, p] = 0.5
            mat[p, q] = 0.5j
            mat[q, p] = 0.5
            mat[q, q] = -0.5j
        return mat


def to_w_coords(obj, r: RealStructure):
    """Express a map or field given in real (z) coordinates in w-coordinates."""
    ctx = obj.ctx
    if ctx.n != r.n:
        raise ContextMismatchError("real structure dimension mismatch")
    p_map = JetMap.from_linear(ctx, r.w_to_z_matrix())
    if isinstance(obj, JetField):
        return pullback_field(obj, p_map)
    return conjugate_map(obj, p_map).pruned()


def to_z_coords(obj, r: RealStructure):
    """Inverse of :func:`to_w_coords`."""
    ctx = obj.ctx
    if ctx.n != r.n:
        raise ContextMismatchError("real structure dimension mismatch")
    p_inv = JetMap.from_linear(ctx, r.z_to_w_matrix())
    if isinstance(obj, JetField):
        return pullback_field(obj, p_inv)
    return conjugate_map(obj, p_inv).pruned()


def is_real(obj, r: RealStructure) -> bool:
    """Reality in w-coordinates: each monomial's conjugate carries the
    conjugated coefficient."""
    if obj.ctx.n != r.n:
        raise ContextMismatchError("real structure dimension mismatch")
    conj = obj.conjugate(r.rho)
    scale = max(obj.max_abs(), 1.0)
    return allclose(obj, conj, atol=obj.ctx.tol * scale)


# -- comparison helpers ------------------------------------------------------


def allclose(x, y, rtol: float = 0.0, atol: float = 0.0) -> bool:
    """Termwise comparison of two jets of the same kind."""
    if x.ctx != y.ctx:
        return False
    bound = atol + rtol * max(x.max_abs(), y.max_abs())
    for cx, cy in zip(x.components, y.components):
        keys = set(cx._terms) | set(cy._terms)
        for a in keys:
            if abs(cx._terms.get(a, 0j) - cy._terms.get(a, 0j)) > bound:
                return False
    return True


def max_difference(x, y) -> float:
    """Largest termwise coefficient difference."""
    if x.ctx != y.ctx:
        raise ContextMismatchError("cannot compare across contexts")
    worst = 0.0
    for cx, cy in zip(x.components, y.components):
        keys = set(cx._terms) | set(cy._terms)
        for a in keys:
            worst = max(worst, abs(cx._terms.get(a, 0j) - cy._terms.get(a, 0j)))
    return worst


def format_terms(terms, var: str = "w") -> str:
    """Human-readable rendering of a term list, 1-based variable names."""
    if not terms:
        return "0"
    chunks = []
    for a, c in terms:
        factors = [
            f"{var}{i + 1}" + (f"^{e}" if e > 1 else "")
            for i, e in enumerate(a)
            if e > 0
        ]
        mono = "*".join(factors) if factors else "1"
        chunks.append(f"({c:.6g})*{mono}")
    return " + ".join(chunks)


def basis_monomials(n: int, degree: int) -> list[Exponents]:
    """Graded-lex ordered monomial basis of the jet space."""
    out: list[Exponents] = []
    for d in range(1, degree + 1):
        out.extend(monomials_of_degree(n, d))
    return out
