"""Exact arithmetic for eigenvalue logarithms and resonance classification.

Eigenvalue logarithms live in a finite-dimensional Q-vector space spanned
by user-declared symbols (e.g. ``1``, ``2*pi*i``, ``sqrt(2)*2*pi*i``) that
are assumed Q-linearly independent.  Every resonance decision reduces to
exact rational arithmetic on the coordinate vectors; floating point never
decides a resonance.

One distinguished symbol denotes the period ``2*pi*i``.  A monomial
``w^a e_j`` is *strongly resonant* when the defect ``mu_j - <mu, a>``
vanishes, *weakly resonant* when the defect equals a nonzero integer
multiple of the period, and nonresonant otherwise.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import SpectrumError
from .intlattice import hermite_normal_form, lattice_contains, left_kernel_basis

TWO_PI_I = 2j * cmath.pi

#: relative tolerance for checks on user-supplied numeric symbol values
_VALUE_RTOL = 1e-9


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    raise SpectrumError(f"expected an exact rational, got {type(x).__name__}: {x!r}")


@dataclass(frozen=True)
class SpectrumBasis:
    """Ordered symbol basis for eigenvalue logarithms.

    ``symbols`` are names assumed Q-linearly independent (this is an input
    contract; independence is not checkable in general).  ``values`` holds
    the numeric value of each symbol; each value must be purely real or
    purely imaginary so that complex conjugation acts exactly on coordinate
    vectors (a general complex constant can always be split in two symbols).
    ``period_index`` points at the symbol whose value is ``2*pi*i``.
    """

    symbols: tuple[str, ...]
    period_index: int
    values: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        object.__setattr__(self, "values", tuple(complex(v) for v in self.values))
        if len(set(self.symbols)) != len(self.symbols):
            raise SpectrumError("basis symbols must be pairwise distinct")
        if len(self.symbols) != len(self.values):
            raise SpectrumError("one numeric value per symbol required")
        if not 0 <= self.period_index < len(self.symbols):
            raise SpectrumError("period_index out of range")
        for name, v in zip(self.symbols, self.values):
            if v.real != 0.0 and v.imag != 0.0:
                raise SpectrumError(
                    f"symbol {name!r} has value {v} that is neither purely real "
                    "nor purely imaginary; split it into two symbols"
                )
        period = self.values[self.period_index]
        if abs(period - TWO_PI_I) > _VALUE_RTOL * abs(TWO_PI_I):
            raise SpectrumError(
                f"period symbol value {period} is not 2*pi*i within tolerance"
            )

    @property
    def dim(self) -> int:
        return len(self.symbols)

    def is_imaginary(self, b: int) -> bool:
        return self.values[b].real == 0.0


@dataclass(frozen=True)
class EigenLog:
    """Exact rational coordinate vector over a :class:`SpectrumBasis`.

    Represents the number ``sum(coords[b] * basis.values[b])``.
    """

    coords: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(_as_fraction(c) for c in self.coords))

    @classmethod
    def zero(cls, dim: int) -> "EigenLog":
        return cls((Fraction(0),) * dim)

    def __add__(self, other: "EigenLog") -> "EigenLog":
        return EigenLog(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "EigenLog") -> "EigenLog":
        return EigenLog(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "EigenLog":
        return EigenLog(tuple(-a for a in self.coords))

    def scaled(self, k) -> "EigenLog":
        k = _as_fraction(k)
        return EigenLog(tuple(k * a for a in self.coords))

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def conjugate(self, basis: SpectrumBasis) -> "EigenLog":
        """Complex conjugation: flips the sign on purely imaginary symbols."""
        return EigenLog(
            tuple(-c if basis.is_imaginary(b) else c for b, c in enumerate(self.coords))
        )

    def period_multiple(self, basis: SpectrumBasis) -> Optional[int]:
        """Integer ``k`` with ``self == k * 2*pi*i`` exactly, else ``None``."""
        for b, c in enumerate(self.coords):
            if b != basis.period_index and c != 0:
                return None
        k = self.coords[basis.period_index]
        if k.denominator != 1:
            return None
        return int(k)

    def value(self, basis: SpectrumBasis) -> complex:
        """Numeric value at the basis' evaluation precision."""
        acc = 0j
        for c, v in zip(self.coords, basis.values):
            if c:
                acc += float(c) * v
        return acc


@dataclass(frozen=True)
class ResonanceClass:
    """Per-monomial verdict: strong, weak (with its integer) or nonresonant."""

    kind: str
    k: Optional[int] = None

    _KINDS = ("strong", "weak", "nonresonant")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise SpectrumError(f"unknown resonance kind {self.kind!r}")
        if self.kind == "weak" and not self.k:
            raise SpectrumError("weak resonance carries a nonzero integer")
        if self.kind != "weak" and self.k is not None:
            raise SpectrumError("only weak resonances carry an integer")

    @classmethod
    def strong(cls) -> "ResonanceClass":
        return cls("strong")

    @classmethod
    def weak(cls, k: int) -> "ResonanceClass":
        return cls("weak", int(k))

    @classmethod
    def nonresonant(cls) -> "ResonanceClass":
        return cls("nonresonant")

    @property
    def is_strong(self) -> bool:
        return self.kind == "strong"

    @property
    def is_weak(self) -> bool:
        return self.kind == "weak"

    @property
    def is_resonant(self) -> bool:
        return self.kind != "nonresonant"


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalue logarithms of a normalized linear part, with real structure.

    ``logs[j]`` is the exact logarithm of the j-th eigenvalue in the
    complexified coordinates, ``rho`` the involution pairing conjugate
    coordinates (``rho[j] == j`` on coordinates coming from real 1x1 blocks,
    conjugate-paired otherwise).  Conjugation symmetry is enforced exactly:
    ``logs[rho[j]] == conj(logs[j])`` at the coordinate level.
    """

    basis: SpectrumBasis
    logs: tuple[EigenLog, ...]
    rho: tuple[int, ...]
    real_block_tags: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "logs", tuple(self.logs))
        object.__setattr__(self, "rho", tuple(int(r) for r in self.rho))
        n = len(self.logs)
        if len(self.rho) != n:
            raise SpectrumError("rho must have one entry per coordinate")
        if sorted(self.rho) != list(range(n)):
            raise SpectrumError("rho is not a permutation")
        for j, r in enumerate(self.rho):
            if self.rho[r] != j:
                raise SpectrumError("rho is not an involution")
        for log in self.logs:
            if len(log.coords) != self.basis.dim:
                raise SpectrumError("log coordinate length does not match basis")
        for j, r in enumerate(self.rho):
            if self.logs[r] != self.logs[j].conjugate(self.basis):
                raise SpectrumError(
                    f"logs[{r}] must be the exact conjugate of logs[{j}]"
                )
        if not self.real_block_tags:
            tags = tuple("real" if self.rho[j] == j else "rotation" for j in range(n))
            object.__setattr__(self, "real_block_tags", tags)
        else:
            object.__setattr__(self, "real_block_tags", tuple(self.real_block_tags))
            if len(self.real_block_tags) != n:
                raise SpectrumError("one block tag per coordinate required")
            for j, tag in enumerate(self.real_block_tags):
                want = "real" if self.rho[j] == j else "rotation"
                if tag != want:
                    raise SpectrumError(
                        f"block tag {tag!r} at {j} inconsistent with rho"
                    )

    @property
    def n(self) -> int:
        return len(self.logs)

    def value(self, j: int) -> complex:
        """Numeric eigenvalue logarithm ``mu_j``."""
        return self.logs[j].value(self.basis)

    def values(self) -> tuple[complex, ...]:
        return tuple(self.value(j) for j in range(self.n))

    def multiplier(self, j: int) -> complex:
        """Numeric eigenvalue ``exp(mu_j)``."""
        return cmath.exp(self.value(j))

    def multipliers(self) -> tuple[complex, ...]:
        return tuple(self.multiplier(j) for j in range(self.n))

    def defect(self, exponents: Sequence[int], j: int) -> EigenLog:
        """Exact resonance defect ``mu_j - <mu, a>``."""
        self._check_monomial(exponents, j)
        acc = self.logs[j]
        for i, a in enumerate(exponents):
            if a:
                acc = acc - self.logs[i].scaled(int(a))
        return acc

    def pair(self, m: Sequence[int]) -> EigenLog:
        """Exact integer pairing ``<m, mu>`` (m may have negative entries)."""
        if len(m) != self.n:
            raise SpectrumError("integer vector length must equal n")
        acc = EigenLog.zero(self.basis.dim)
        for i, mi in enumerate(m):
            if mi:
                acc = acc + self.logs[i].scaled(int(mi))
        return acc

    def shifted(self, shifts: Sequence[int]) -> "Spectrum":
        """New spectrum with ``logs[j] += shifts[j] * 2*pi*i``.

        Shifts must respect the real structure: opposite on conjugate pairs
        and zero on real-block coordinates.
        """
        shifts = tuple(int(k) for k in shifts)
        if len(shifts) != self.n:
            raise SpectrumError("one shift per coordinate required")
        for j, k in enumerate(shifts):
            if self.rho[j] == j and k != 0:
                raise SpectrumError(f"coordinate {j} is real, shift must be 0")
            if shifts[self.rho[j]] != -k:
                raise SpectrumError("shifts must be opposite on conjugate pairs")
        unit = [Fraction(0)] * self.basis.dim
        unit[self.basis.period_index] = Fraction(1)
        period = EigenLog(tuple(unit))
        logs = tuple(
            log + period.scaled(k) if k else log for log, k in zip(self.logs, shifts)
        )
        return Spectrum(self.basis, logs, self.rho)

    def _check_monomial(self, exponents: Sequence[int], j: int) -> None:
        if len(exponents) != self.n:
            raise SpectrumError(
                f"exponent vector length {len(exponents)} != n = {self.n}"
            )
        if any(a < 0 for a in exponents):
            raise SpectrumError("exponents must be nonnegative")
        if not 0 <= j < self.n:
            raise SpectrumError(f"component index {j} out of range")


@dataclass(frozen=True)
class ResonanceLattice:
    """Canonical HNF generators of ``V = {m : <m, mu> in 2*pi*i*Z}``."""

    generators: tuple[tuple[int, ...], ...]
    rank: int

    def contains(self, m: Sequence[int]) -> bool:
        rows = [list(r) for r in self.generators]
        if not rows:
            return not any(m)
        return lattice_contains(rows, list(m))


def resonance_class(exponents: Sequence[int], j: int, s: Spectrum) -> ResonanceClass:
    """Classify the monomial ``w^a e_j`` against spectrum ``s``.

    The decision is exact: strong iff the defect vanishes as a rational
    vector, weak iff it is a nonzero integer multiple of the period.
    """
    d = s.defect(exponents, j)
    if d.is_zero:
        return ResonanceClass.strong()
    k = d.period_multiple(s.basis)
    if k:
        return ResonanceClass.weak(k)
    return ResonanceClass.nonresonant()


def conjugate_monomial(
    exponents: Sequence[int], j: int, s: Spectrum
) -> tuple[tuple[int, ...], int]:
    """Indices of the conjugate monomial under the rho-involution."""
    s._check_monomial(exponents, j)
    conj = tuple(exponents[s.rho[i]] for i in range(s.n))
    return conj, s.rho[j]


def monomials_of_degree(n: int, d: int) -> Iterable[tuple[int, ...]]:
    """Exponent vectors of total degree ``d`` in ``n`` variables, lex ascending."""
    if n == 1:
        yield (d,)
        return
    for first in range(d + 1):
        for rest in monomials_of_degree(n - 1, d - first):
            yield (first,) + rest


def graded_monomials(n: int, degree_min: int, degree_max: int) -> Iterable[tuple[int, ...]]:
    for d in range(degree_min, degree_max + 1):
        yield from monomials_of_degree(n, d)


def weakly_resonant_monomials(
    s: Spectrum, degree_min: int, degree_max: int
) -> list[tuple[tuple[int, ...], int, int]]:
    """All weak monomials ``(a, j, k)`` with degree in the given range.

    Deterministic order: ascending degree, then lexicographic exponents,
    then component.
    """
    if not 2 <= degree_min <= degree_max:
        raise SpectrumError("degree bounds must satisfy 2 <= degree_min <= degree_max")
    out = []
    for a in graded_monomials(s.n, degree_min, degree_max):
        for j in range(s.n):
            cls = resonance_class(a, j, s)
            if cls.is_weak:
                out.append((a, j, cls.k))
    return out


def resonance_lattice(s: Spectrum) -> ResonanceLattice:
    """Kernel lattice ``V = {m in Z^n : <m, mu> in 2*pi*i*Z}``.

    Computed by exact integer linear algebra: the condition is linear on
    the non-period coordinates and a congruence on the period coordinate,
    which an auxiliary integer variable absorbs.
    """
    n = s.n
    dim = s.basis.dim
    per = s.basis.period_index

    # One column per constraint; rows are the n monomial variables plus the
    # auxiliary period integer.
    columns = []
    for b in range(dim):
        coords = [s.logs[j].coords[b] for j in range(n)]
        if b != per and all(c == 0 for c in coords):
            continue
        denom = 1
        for c in coords:
            denom = denom * c.denominator // math.gcd(denom, c.denominator)
        col = [int(c * denom) for c in coords]
        col.append(-denom if b == per else 0)
        columns.append(col)

    if not columns:
        gens = hermite_normal_form([[int(i == j) for j in range(n)] for i in range(n)])
        return ResonanceLattice(tuple(tuple(r) for r in gens), len(gens))

    mat = [[col[i] for col in columns] for i in range(n + 1)]
    kernel = left_kernel_basis(mat)
    projected = [row[:n] for row in kernel]
    gens = hermite_normal_form(projected) if projected else []
    return ResonanceLattice(tuple(tuple(r) for r in gens), len(gens))


def enumerate_logarithms(s: Spectrum, bound: int) -> list[Spectrum]:
    """All spectra reachable by shifting logs by ``k * 2*pi*i``, ``|k| <= bound``.

    The real structure constrains the shifts: conjugate pairs move by
    opposite integers and real-block coordinates do not move at all, so the
    conjugation symmetry of the eigenvalues is preserved.  One pair
    contributes ``2*bound + 1`` choices.
    """
    if bound < 0:
        raise SpectrumError("bound must be nonnegative")
    pairs = [j for j in range(s.n) if j < s.rho[j]]
    out = []
    for combo in itertools.product(range(-bound, bound + 1), repeat=len(pairs)):
        shifts = [0] * s.n
        for j, k in zip(pairs, combo):
            shifts[j] = k
            shifts[s.rho[j]] = -k
        out.append(s.shifted(shifts))
    return out


def shift_vector(base: Spectrum, shifted: Spectrum) -> tuple[int, ...]:
    """Integer shifts ``k`` with ``shifted.logs[j] == base.logs[j] + k*2*pi*i``."""
    if base.basis != shifted.basis or base.rho != shifted.rho:
        raise SpectrumError("spectra do not share basis and real structure")
    shifts = []
    for j in range(base.n):
        d = shifted.logs[j] - base.logs[j]
        k = d.period_multiple(base.basis)
        if k is None:
            raise SpectrumError(f"log {j} does not differ by a period multiple")
        shifts.append(k)
    return tuple(shifts)
