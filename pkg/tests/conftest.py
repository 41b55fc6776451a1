import cmath
import math
import random
import sys
from fractions import Fraction as F
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from germflow import (
    EigenLog,
    JetContext,
    JetField,
    JetMap,
    Spectrum,
    SpectrumBasis,
    compose,
    exp_field,
    pullback_field,
)

TWO_PI_I = 2j * math.pi

PROBLEMS = Path(__file__).parent.parent / "problems"


def make_basis(*extra):
    """Standard basis {1, 2*pi*i} plus optional (name, value) symbols."""
    symbols = ["one", "two_pi_i"] + [name for name, _ in extra]
    values = [1.0 + 0j, TWO_PI_I] + [value for _, value in extra]
    return SpectrumBasis(tuple(symbols), 1, tuple(values))


def log(*coords):
    return EigenLog(tuple(F(c) if not isinstance(c, F) else c for c in coords))


@pytest.fixture(scope="session")
def ex1_spectrum():
    """Eigenvalue logs (-2, 1 + pi i/2, 1 - pi i/2), conjugate pair (2,3)."""
    return Spectrum(
        make_basis(),
        (log(-2, 0), log(1, F(1, 4)), log(1, F(-1, 4))),
        (0, 2, 1),
    )


@pytest.fixture(scope="session")
def ex2_spectrum():
    """Eigenvalue logs (8, 8, 1 + pi i/4, 1 - pi i/4), pair (3,4)."""
    return Spectrum(
        make_basis(),
        (log(8, 0), log(8, 0), log(1, F(1, 8)), log(1, F(-1, 8))),
        (0, 1, 3, 2),
    )


@pytest.fixture(scope="session")
def lattice_spectrum():
    """The rank-2 resonance lattice example over {1, 2pi i, sqrt2 2pi i}."""
    basis = make_basis(("sqrt2_two_pi_i", TWO_PI_I * math.sqrt(2)))
    logs = (
        log(-2, 0, 1),
        log(-2, 0, -1),
        log(3, F(1, 2), -2),
        log(3, F(-1, 2), 2),
    )
    return Spectrum(basis, logs, (1, 0, 3, 2))


@pytest.fixture(scope="session")
def real_spectrum_n2():
    """All-real logs (-2, 3): no weak resonances at any degree."""
    return Spectrum(make_basis(), (log(-2, 0), log(3, 0)), (0, 1))


@pytest.fixture
def rng():
    return random.Random(20260809)


def random_series_terms(rng, n, degree, count, scale=1.0, min_degree=2):
    """Random sparse (exponents, component, coeff) triples."""
    out = []
    for _ in range(count):
        d = rng.randint(min_degree, degree)
        cuts = sorted(rng.randint(0, d) for _ in range(n - 1))
        exps = []
        prev = 0
        for c in cuts:
            exps.append(c - prev)
            prev = c
        exps.append(d - prev)
        j = rng.randrange(n)
        coeff = complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) * scale
        out.append((tuple(exps), j, coeff))
    return out


def random_nilpotent_field(rng, ctx, terms=4, with_linear=True):
    """Jet-nilpotent field: strictly triangular linear part + higher terms."""
    items = []
    if with_linear:
        for i in range(ctx.n - 1):
            if rng.random() < 0.7:
                a = [0] * ctx.n
                a[i] = 1
                items.append((tuple(a), i + 1, complex(rng.uniform(-1, 1), rng.uniform(-1, 1))))
    items.extend(random_series_terms(rng, ctx.n, ctx.degree, terms))
    return JetField.from_terms(ctx, items)


def random_real_nilpotent_field(rng, ctx, rho, terms=3):
    """Real (rho-equivariant) jet-nilpotent field."""
    items = []
    for _ in range(terms):
        raw = random_series_terms(rng, ctx.n, ctx.degree, 1)[0]
        a, j, c = raw
        conj_a = tuple(a[rho[i]] for i in range(ctx.n))
        conj_j = rho[j]
        if (conj_a, conj_j) == (a, j):
            items.append((a, j, complex(c.real, 0.0)))
        else:
            items.append((a, j, c))
            items.append((conj_a, conj_j, c.conjugate()))
    for i in range(ctx.n - 1):
        if rho[i] == i and rho[i + 1] == i + 1 and rng.random() < 0.5:
            a = [0] * ctx.n
            a[i] = 1
            items.append((tuple(a), i + 1, complex(rng.uniform(-1, 1), 0.0)))
    return JetField.from_terms(ctx, items)


def random_tangent_identity(rng, ctx, terms=4, scale=0.4):
    """Tangent-to-identity map: Id + random higher-order terms."""
    disp = random_series_terms(rng, ctx.n, ctx.degree, terms, scale=scale)
    ident = JetMap.identity(ctx)
    extra = JetMap.from_terms(ctx, disp)
    return JetMap(ctx, [a + b for a, b in zip(ident.components, extra.components)])


def strong_monomials(s, degree_min, degree_max):
    """All strongly resonant (exponents, component) pairs in the range."""
    from germflow.spectrum import graded_monomials, resonance_class

    out = []
    for a in graded_monomials(s.n, degree_min, degree_max):
        for j in range(s.n):
            if resonance_class(a, j, s).is_strong:
                out.append((a, j))
    return out


def conjugated_field_input(rng, ctx, s, nilpotent_entries=(), tail_count=2):
    """Build (x, expected_xs, expected_xn) = conjugated diagonal + nilpotent."""
    values = np.asarray(s.values(), dtype=complex)
    d_field = JetField.from_linear(ctx, np.diag(values))
    items = [
        (tuple(int(k == i) for k in range(ctx.n)), j, complex(c))
        for i, j, c in nilpotent_entries
    ]
    strong = [t for t in strong_monomials(s, 2, ctx.degree)]
    rng.shuffle(strong)
    for a, j in strong[:tail_count]:
        items.append((a, j, complex(rng.uniform(-1, 1), rng.uniform(-1, 1))))
    n_field = JetField.from_terms(ctx, items)
    eta0 = random_tangent_identity(rng, ctx, terms=3, scale=0.3)
    x = pullback_field(d_field + n_field, eta0)
    return x, pullback_field(d_field, eta0), pullback_field(n_field, eta0)


def conjugated_map_input(rng, ctx, s, nilpotent_entries=(), tail_count=2):
    """Build (f, expected_phi_s) = conjugated diagonal * unipotent."""
    values = np.asarray(s.values(), dtype=complex)
    mults = np.exp(values)
    lam = JetMap.from_linear(ctx, np.diag(mults))
    items = [
        (tuple(int(k == i) for k in range(ctx.n)), j, complex(c))
        for i, j, c in nilpotent_entries
    ]
    strong = [t for t in strong_monomials(s, 2, ctx.degree)]
    rng.shuffle(strong)
    for a, j in strong[:tail_count]:
        items.append((a, j, complex(rng.uniform(-1, 1), rng.uniform(-1, 1))))
    n_field = JetField.from_terms(ctx, items)
    u = exp_field(n_field)
    eta0 = random_tangent_identity(rng, ctx, terms=3, scale=0.3)
    from germflow import conjugate_map, invert

    f = compose(compose(invert(eta0), compose(lam, u)), eta0)
    phi_s = compose(compose(invert(eta0), lam), eta0)
    return f, phi_s
