import random

import pytest

from germflow.intlattice import (
    hermite_normal_form,
    hnf_with_transform,
    lattice_contains,
    left_kernel_basis,
    pivot_columns,
)


def random_matrix(rng, rows, cols, bound=6):
    return [[rng.randint(-bound, bound) for _ in range(cols)] for _ in range(rows)]


def random_unimodular(rng, n, steps=12):
    u = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(steps):
        i, j = rng.randrange(n), rng.randrange(n)
        if i == j:
            continue
        c = rng.randint(-3, 3)
        u[i] = [a + c * b for a, b in zip(u[i], u[j])]
    return u


def matmul(a, b):
    return [
        [sum(x * y for x, y in zip(row, col)) for col in zip(*b)] for row in a
    ]


def test_known_hnf():
    got = hermite_normal_form([[3, 3, 2, 2], [5, 1, 3, 1]])
    assert got == [[1, 5, 1, 3], [0, 12, 1, 7]]


def test_hnf_shape_properties():
    rng = random.Random(1)
    for _ in range(40):
        m = random_matrix(rng, rng.randint(1, 4), rng.randint(1, 5))
        h = hermite_normal_form(m)
        cols = pivot_columns(h)
        assert cols == sorted(cols) and len(set(cols)) == len(cols)
        for row, c in zip(h, cols):
            assert row[c] > 0
            assert all(row[k] == 0 for k in range(c))
        for upper in range(len(h)):
            for lower in range(upper + 1, len(h)):
                piv = cols[lower]
                assert 0 <= h[upper][piv] < h[lower][piv]


def test_hnf_invariant_under_unimodular_row_ops():
    # Canonicity: row lattices agree iff HNFs agree.
    rng = random.Random(2)
    for _ in range(30):
        rows = rng.randint(2, 4)
        m = random_matrix(rng, rows, rng.randint(2, 5))
        u = random_unimodular(rng, rows)
        assert hermite_normal_form(m) == hermite_normal_form(matmul(u, m))


def test_transform_reconstructs():
    rng = random.Random(3)
    for _ in range(30):
        m = random_matrix(rng, rng.randint(1, 4), rng.randint(1, 5))
        h, u = hnf_with_transform(m)
        assert matmul(u, m) == h


def test_left_kernel_annihilates_and_is_complete():
    rng = random.Random(4)
    for _ in range(25):
        m = random_matrix(rng, rng.randint(2, 4), rng.randint(1, 3), bound=3)
        kernel = left_kernel_basis(m)
        for row in kernel:
            assert all(v == 0 for v in matmul([row], m)[0])
        # Every small annihilating vector must lie in the kernel lattice.
        import itertools

        n = len(m)
        for x in itertools.product(range(-2, 3), repeat=n):
            if all(v == 0 for v in matmul([list(x)], m)[0]):
                if kernel:
                    assert lattice_contains(kernel, list(x))
                else:
                    assert not any(x)


def test_membership():
    h = hermite_normal_form([[3, 3, 2, 2], [5, 1, 3, 1]])
    assert lattice_contains(h, [3, 3, 2, 2])
    assert lattice_contains(h, [5, 1, 3, 1])
    assert lattice_contains(h, [8, 4, 5, 3])
    assert not lattice_contains(h, [1, 0, 0, 0])
    assert lattice_contains(h, [0, 0, 0, 0])
