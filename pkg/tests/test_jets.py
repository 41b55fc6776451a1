import cmath
import math
import random

import numpy as np
import pytest

from germflow import (
    ContextMismatchError,
    JetContext,
    JetField,
    JetMap,
    JetSeries,
    RealStructure,
    SingularLinearPartError,
    allclose,
    apply_field,
    bracket,
    compose,
    conjugate_map,
    exp_field,
    homogeneous_component,
    invert,
    is_real,
    max_difference,
    pullback_field,
    pushforward_field,
    to_w_coords,
    to_z_coords,
)
from germflow.jets import compose_series

from conftest import random_series_terms, random_tangent_identity
from oracles import adjoint_series_pullback, jet_dict, naive_compose


def random_map(rng, ctx, terms=5, scale=0.8):
    items = random_series_terms(rng, ctx.n, ctx.degree, terms, scale=scale)
    lin = np.eye(ctx.n) + 0.3 * np.array(
        [[rng.uniform(-1, 1) for _ in range(ctx.n)] for _ in range(ctx.n)]
    )
    base = JetMap.from_linear(ctx, lin.astype(complex))
    extra = JetMap.from_terms(ctx, items)
    return JetMap(ctx, [a + b for a, b in zip(base.components, extra.components)])


class TestSeriesBasics:
    def test_constant_terms_rejected(self):
        ctx = JetContext(2, 4)
        with pytest.raises(ValueError):
            JetSeries(ctx, {(0, 0): 1.0})

    def test_overflow_terms_dropped(self):
        ctx = JetContext(2, 3)
        s = JetSeries(ctx, {(4, 0): 1.0, (1, 0): 2.0})
        assert s.coeff((4, 0)) == 0
        assert s.coeff((1, 0)) == 2.0

    def test_mul_truncates(self):
        ctx = JetContext(1, 3)
        w = JetSeries.variable(ctx, 0)
        w2 = w * w
        assert (w2 * w2).is_zero
        assert (w2 * w).coeff((3,)) == 1.0

    def test_context_mismatch(self):
        a = JetSeries.variable(JetContext(2, 3), 0)
        b = JetSeries.variable(JetContext(2, 4), 0)
        with pytest.raises(ContextMismatchError):
            a + b


class TestCompose:
    def test_identity_neutral(self, rng):
        ctx = JetContext(3, 5)
        g = random_map(rng, ctx)
        ident = JetMap.identity(ctx)
        assert allclose(compose(ident, g), g, atol=1e-14)
        assert allclose(compose(g, ident), g, atol=1e-14)

    def test_worked_4d_composition(self):
        # diag(e^8, e^8, e^{1+pi i/4}, e^{1-pi i/4}) after a resonant shear.
        ctx = JetContext(4, 8)
        e8 = math.exp(8.0)
        ep = cmath.exp(1 + 0.25j * math.pi)
        em = cmath.exp(1 - 0.25j * math.pi)
        d = JetMap.from_linear(ctx, np.diag([e8, e8, ep, em]))
        g = JetMap.from_terms(
            ctx,
            [
                ((1, 0, 0, 0), 0, 1.0),
                ((1, 0, 0, 0), 1, 1.0),
                ((0, 1, 0, 0), 1, 1.0),
                ((0, 0, 8, 0), 1, 1.0),
                ((0, 0, 0, 8), 1, 1.0),
                ((0, 0, 1, 0), 2, 1.0),
                ((0, 0, 0, 1), 3, 1.0),
            ],
        )
        phi = compose(d, g)
        comp2 = dict(phi.components[1].items())
        for a in [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 8, 0), (0, 0, 0, 8)]:
            assert abs(comp2[a] - e8) < 1e-10 * e8
        assert len(comp2) == 4

    def test_against_naive_oracle(self, rng):
        ctx = JetContext(2, 5)
        for _ in range(15):
            f = random_map(rng, ctx, terms=4)
            g = random_map(rng, ctx, terms=4)
            got = jet_dict(compose(f, g))
            want = naive_compose(jet_dict(f), jet_dict(g), 2, 5)
            for comp_got, comp_want in zip(got, want):
                keys = set(comp_got) | set(comp_want)
                for k in keys:
                    assert abs(comp_got.get(k, 0) - comp_want.get(k, 0)) < 1e-10

    def test_associativity(self, rng):
        ctx = JetContext(2, 4)
        f, g, h = (random_map(rng, ctx, terms=3) for _ in range(3))
        lhs = compose(compose(f, g), h)
        rhs = compose(f, compose(g, h))
        assert max_difference(lhs, rhs) < 1e-9 * max(lhs.max_abs(), 1)


class TestInvert:
    def test_tangent_identity_roundtrip(self, rng):
        ctx = JetContext(3, 6)
        f = random_tangent_identity(rng, ctx)
        ident = JetMap.identity(ctx)
        assert max_difference(compose(f, invert(f)), ident) < 1e-10
        assert max_difference(compose(invert(f), f), ident) < 1e-10

    def test_shear_inverse_exact_form(self):
        ctx = JetContext(4, 8)
        eta = JetMap.from_terms(
            ctx,
            [
                ((1, 0, 0, 0), 0, 1.0),
                ((0, 0, 8, 0), 0, 1.0),
                ((0, 0, 0, 8), 0, 1.0),
                ((0, 1, 0, 0), 1, 1.0),
                ((0, 0, 1, 0), 2, 1.0),
                ((0, 0, 0, 1), 3, 1.0),
            ],
        )
        inv = invert(eta)
        assert abs(inv.components[0].coeff((0, 0, 8, 0)) + 1.0) < 1e-12
        assert abs(inv.components[0].coeff((0, 0, 0, 8)) + 1.0) < 1e-12
        assert len(dict(inv.components[0].items())) == 3

    def test_linear_case(self, rng):
        ctx = JetContext(3, 4)
        a = np.array(
            [[rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1) for _ in range(3)] for _ in range(3)]
        ) + 2 * np.eye(3)
        f = JetMap.from_linear(ctx, a)
        g = invert(f)
        assert np.max(np.abs(g.linear() - np.linalg.inv(a))) < 1e-10

    def test_singular_rejected(self):
        ctx = JetContext(2, 3)
        f = JetMap.from_terms(ctx, [((1, 0), 0, 1.0), ((1, 0), 1, 1.0)])
        with pytest.raises(SingularLinearPartError):
            invert(f)

    def test_general_roundtrip(self, rng):
        ctx = JetContext(2, 6)
        for _ in range(10):
            f = random_map(rng, ctx, terms=4)
            err = max_difference(compose(f, invert(f)), JetMap.identity(ctx))
            assert err < 1e-9 * max(1.0, f.max_abs())


class TestBracket:
    def test_diagonal_commutator_identity(self, rng):
        # [sum gamma_k w_k d_k, w^a d_j] = (<gamma, a> - gamma_j) w^a d_j
        ctx = JetContext(3, 6)
        for _ in range(20):
            gamma = [complex(rng.uniform(-2, 2), rng.uniform(-2, 2)) for _ in range(3)]
            d = JetField.from_linear(ctx, np.diag(gamma))
            a = tuple(rng.randint(0, 2) for _ in range(3))
            if not 1 <= sum(a) <= 6:
                continue
            j = rng.randrange(3)
            h = JetField.from_terms(ctx, [(a, j, 1.0)])
            expect = sum(g * e for g, e in zip(gamma, a)) - gamma[j]
            got = bracket(d, h)
            assert abs(got.components[j].coeff(a) - expect) < 1e-13
            others = [c for i, c in enumerate(got.components) if i != j]
            assert all(c.is_zero for c in others)

    def test_worked_3d_bracket(self):
        ctx = JetContext(3, 8)
        yp = JetField.from_terms(ctx, [((1, 0, 3), 1, 1.0), ((1, 3, 0), 2, 1.0)])
        xn = JetField.from_terms(ctx, [((2, 1, 1), 0, 1.0)])
        br = bracket(yp, xn)
        assert dict(br.components[0].items()) == {(3, 0, 4): 1.0, (3, 4, 0): 1.0}
        assert dict(br.components[1].items()) == {(2, 1, 4): -1.0}
        assert dict(br.components[2].items()) == {(2, 4, 1): -1.0}

    def test_antisymmetry(self, rng):
        ctx = JetContext(3, 5)
        for _ in range(10):
            x = JetField.from_terms(ctx, random_series_terms(rng, 3, 5, 4, min_degree=1))
            y = JetField.from_terms(ctx, random_series_terms(rng, 3, 5, 4, min_degree=1))
            assert max_difference(bracket(x, y), bracket(y, x).scaled(-1)) < 1e-12

    def test_self_bracket_zero(self, rng):
        ctx = JetContext(2, 5)
        x = JetField.from_terms(ctx, random_series_terms(rng, 2, 5, 5, min_degree=1))
        assert bracket(x, x).max_abs() < 1e-13

    def test_jacobi_on_safe_degrees(self, rng):
        # Keep total degrees inside the truncation so the identity is exact.
        ctx = JetContext(2, 8)
        for _ in range(8):
            x, y, z = (
                JetField.from_terms(ctx, random_series_terms(rng, 2, 3, 3, min_degree=1))
                for _ in range(3)
            )
            total = (
                bracket(x, bracket(y, z))
                + bracket(y, bracket(z, x))
                + bracket(z, bracket(x, y))
            )
            cutoff = 3 + 3 + 3 - 2  # three factors, each bracket drops one
            for d in range(1, min(cutoff, ctx.degree) + 1):
                assert total.homogeneous_part(d).max_abs() < 1e-11


class TestApplyField:
    def test_euler_field(self):
        ctx = JetContext(1, 6)
        euler = JetField.from_terms(ctx, [((1,), 0, 1.0)])
        for k in range(1, 7):
            wk = JetSeries.monomial(ctx, (k,), 1.0)
            got = apply_field(euler, wk)
            assert abs(got.coeff((k,)) - k) < 1e-14

    def test_nilpotency_example(self):
        ctx = JetContext(4, 8)
        y = JetField.from_terms(ctx, [((0, 0, 8, 0), 0, 1.0), ((0, 0, 0, 8), 0, 1.0)])
        w1 = JetSeries.variable(ctx, 0)
        once = apply_field(y, w1)
        assert dict(once.items()) == {(0, 0, 8, 0): 1.0, (0, 0, 0, 8): 1.0}
        assert apply_field(y, once).is_zero

    def test_leibniz(self, rng):
        ctx = JetContext(2, 7)
        for _ in range(10):
            x = JetField.from_terms(ctx, random_series_terms(rng, 2, 3, 3, min_degree=1))
            g = JetSeries(ctx, dict((t[0], t[2]) for t in random_series_terms(rng, 2, 3, 3, min_degree=1)))
            h = JetSeries(ctx, dict((t[0], t[2]) for t in random_series_terms(rng, 2, 3, 3, min_degree=1)))
            lhs = apply_field(x, g * h)
            rhs = apply_field(x, g) * h + g * apply_field(x, h)
            diff = lhs - rhs
            # Degrees above deg(g)+deg(h)-1+... can be truncated asymmetrically.
            for d in range(1, 7):
                assert (diff.homogeneous_part(d)).max_abs() < 1e-11


class TestHomogeneous:
    def test_linear_part(self, rng):
        ctx = JetContext(2, 5)
        f = random_map(rng, ctx)
        lin = homogeneous_component(f, 1)
        assert np.max(np.abs(lin.linear() - f.linear())) < 1e-14

    def test_reassembly(self, rng):
        ctx = JetContext(3, 5)
        f = random_map(rng, ctx, terms=8)
        parts = [homogeneous_component(f, d) for d in range(1, 6)]
        total = parts[0]
        acc = [c for c in total.components]
        for p in parts[1:]:
            acc = [a + b for a, b in zip(acc, p.components)]
        assert max_difference(JetMap(ctx, acc), f) == 0

    def test_out_of_range(self, rng):
        ctx = JetContext(2, 4)
        f = random_map(rng, ctx)
        with pytest.raises(ValueError):
            homogeneous_component(f, 0)
        with pytest.raises(ValueError):
            homogeneous_component(f, 5)


class TestRealStructure:
    def test_matrices_mutually_inverse(self):
        r = RealStructure((0, 2, 1, 3))
        p = r.w_to_z_matrix()
        q = r.z_to_w_matrix()
        assert np.max(np.abs(p @ q - np.eye(4))) < 1e-14

    def test_final_example_to_w(self):
        # z-coordinates map with a rotation block becomes diagonal + resonant tail.
        ctx = JetContext(3, 8)
        e = math.e
        f_z = JetMap.from_terms(
            ctx,
            [
                ((1, 0, 0), 0, math.exp(-2)),
                ((0, 0, 1), 1, -e),
                ((1, 1, 2), 1, -0.75),
                ((1, 3, 0), 1, 0.25),
                ((0, 1, 0), 2, e),
                ((1, 0, 3), 2, 0.25),
                ((1, 2, 1), 2, -0.75),
            ],
        )
        r = RealStructure((0, 2, 1))
        f_w = to_w_coords(f_z, r)
        expected = {
            (0, ((1, 0, 0))): math.exp(-2),
            (1, ((0, 1, 0))): cmath.exp(1 + 0.5j * math.pi),
            (1, ((1, 0, 3))): 1.0,
            (2, ((0, 0, 1))): cmath.exp(1 - 0.5j * math.pi),
            (2, ((1, 3, 0))): 1.0,
        }
        seen = {}
        for a, j, c in f_w.terms():
            seen[(j, a)] = c
        assert set(seen) == set(expected)
        for key, want in expected.items():
            assert abs(seen[key] - want) < 1e-12

    def test_identity_fixed(self):
        ctx = JetContext(3, 4)
        r = RealStructure((0, 2, 1))
        ident = JetMap.identity(ctx)
        assert max_difference(to_w_coords(ident, r), ident) < 1e-14

    def test_roundtrip_random_real(self, rng):
        ctx = JetContext(3, 5)
        r = RealStructure((0, 2, 1))
        for _ in range(5):
            terms = [
                (a, j, complex(c.real, 0))
                for a, j, c in random_series_terms(rng, 3, 5, 5, min_degree=1)
            ]
            f = JetMap.from_terms(ctx, terms)
            back = to_z_coords(to_w_coords(f, r), r)
            assert max_difference(back, f) < 1e-10 * max(1.0, f.max_abs())

    def test_real_in_z_iff_is_real_in_w(self, rng):
        ctx = JetContext(3, 5)
        r = RealStructure((0, 2, 1))
        terms = [
            (a, j, complex(c.real, 0))
            for a, j, c in random_series_terms(rng, 3, 5, 6, min_degree=1)
        ]
        real_z = JetMap.from_terms(ctx, terms)
        assert is_real(to_w_coords(real_z, r), r)
        terms[0] = (terms[0][0], terms[0][1], 1j)
        nonreal_z = JetMap.from_terms(ctx, terms)
        assert not is_real(to_w_coords(nonreal_z, r), r)


class TestIsReal:
    def test_self_conjugate_monomial(self):
        ctx = JetContext(3, 6)
        r = RealStructure((0, 2, 1))
        xn = JetField.from_terms(ctx, [((2, 1, 1), 0, 1.0)])
        assert is_real(xn, r)

    def test_imaginary_coefficient(self):
        ctx = JetContext(1, 3)
        r = RealStructure((0,))
        x = JetField.from_terms(ctx, [((1,), 0, 1j)])
        assert not is_real(x, r)

    def test_monomial_plus_conjugate(self, ex2_spectrum, rng):
        from germflow import conjugate_monomial

        ctx = JetContext(4, 6)
        r = RealStructure(ex2_spectrum.rho)
        for _ in range(20):
            a = tuple(rng.randint(0, 2) for _ in range(4))
            if not 1 <= sum(a) <= 6:
                continue
            j = rng.randrange(4)
            lam = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
            b, i = conjugate_monomial(a, j, ex2_spectrum)
            h = JetField.from_terms(ctx, [(a, j, lam), (b, i, lam.conjugate())])
            assert is_real(h, r)


class TestPullback:
    def test_matches_adjoint_series(self, rng):
        # For eta = exp(w) the Jacobian pullback equals the bracket series.
        ctx = JetContext(3, 6)
        for _ in range(6):
            w = JetField.from_terms(ctx, random_series_terms(rng, 3, 6, 3, min_degree=2))
            x = JetField.from_terms(ctx, random_series_terms(rng, 3, 6, 3, min_degree=1))
            eta = exp_field(w)
            got = pullback_field(x, eta)
            want = adjoint_series_pullback(x, w, bracket, terms=16)
            assert max_difference(got, want) < 1e-9 * max(1.0, want.max_abs())

    def test_linear_conjugation(self, rng):
        ctx = JetContext(2, 4)
        a = np.array([[2.0, 1.0], [0.0, 3.0]], dtype=complex)
        p = JetMap.from_linear(ctx, a)
        x = JetField.from_terms(ctx, random_series_terms(rng, 2, 4, 3, min_degree=1))
        got = pullback_field(x, p)
        # Direct formula: A^{-1} (X o P)
        comp = [compose_series(c, p) for c in x.components]
        a_inv = np.linalg.inv(a)
        want_comps = []
        for i in range(2):
            acc = comp[0].scaled(a_inv[i, 0]) + comp[1].scaled(a_inv[i, 1])
            want_comps.append(acc)
        want = JetField(ctx, want_comps)
        assert max_difference(got, want) < 1e-12

    def test_pushforward_inverts_pullback(self, rng):
        ctx = JetContext(2, 5)
        eta = random_tangent_identity(rng, ctx)
        x = JetField.from_terms(ctx, random_series_terms(rng, 2, 5, 4, min_degree=1))
        back = pushforward_field(pullback_field(x, eta), eta)
        assert max_difference(back, x) < 1e-9 * max(1.0, x.max_abs())

    def test_exp_conjugation_identity(self, rng):
        # exp(pullback(x, eta)) == eta^{-1} o exp(x) o eta
        ctx = JetContext(2, 5)
        eta = random_tangent_identity(rng, ctx, terms=2, scale=0.3)
        x = JetField.from_terms(
            ctx, [((0, 1), 0, 0.4), ((2, 0), 1, -0.3 + 0.2j), ((1, 1), 0, 0.1)]
        )
        lhs = exp_field(pullback_field(x, eta))
        rhs = conjugate_map(exp_field(x), eta)
        assert max_difference(lhs, rhs) < 1e-10


class TestPruning:
    def test_relative_floor(self):
        ctx = JetContext(1, 3, tol=1e-6)
        f = JetMap.from_terms(ctx, [((1,), 0, 1000.0), ((2,), 0, 1e-4), ((3,), 0, 1.0)])
        g = f.pruned()
        assert g.components[0].coeff((2,)) == 0  # below 1e-6 * 1000
        assert g.components[0].coeff((3,)) == 1.0

    def test_context_equality_strict(self):
        a = JetContext(2, 4, tol=1e-12)
        b = JetContext(2, 4, tol=1e-10)
        with pytest.raises(ContextMismatchError):
            a.check(b)
