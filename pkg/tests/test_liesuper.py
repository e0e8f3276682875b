"""Supermatrix algebra: parities, brackets, supertrace, inversion, forms."""

import random

import pytest

from graded_zcr.jets import EvolutionarySystem, JetSpace
from graded_zcr.liesuper import (
    MatrixForm,
    SuperMatrix,
    bracket_forms,
    dh_form,
    supercommutator,
)
from graded_zcr.superscalar import (
    GradedPoly,
    odd_independent,
    parameter,
    rational,
    gaussian,
)

P = GradedPoly.variable


def test_position_parity_2_1():
    m = SuperMatrix.zero(2, 1)
    expected = [
        [0, 0, 1],
        [0, 0, 1],
        [1, 1, 0],
    ]
    for i in range(3):
        for j in range(3):
            assert m.position_parity(i, j) == expected[i][j]


def test_elementary_supercommutator_identity():
    # [E13, E31] = E11 + E33 in signature (2|1): both are odd positions,
    # so the bracket is the anticommutator
    e13 = SuperMatrix.basis(2, 1, 0, 2)
    e31 = SuperMatrix.basis(2, 1, 2, 0)
    got = supercommutator(e13, e31)
    expected = SuperMatrix.basis(2, 1, 0, 0) + SuperMatrix.basis(2, 1, 2, 2)
    assert got == expected


def test_matrix_parity_classification():
    th = odd_independent("th")
    a = parameter("a")
    m = SuperMatrix.zero(2, 1)
    rows = [list(r) for r in m.rows]
    rows[0][1] = P(a)          # even position, even entry
    rows[0][2] = P(th)         # odd position, odd entry
    even = SuperMatrix(2, 1, rows)
    assert even.parity() == 0
    rows2 = [list(r) for r in SuperMatrix.zero(2, 1).rows]
    rows2[0][2] = P(a)         # odd position, even entry -> odd matrix
    odd = SuperMatrix(2, 1, rows2)
    assert odd.parity() == 1
    mixed = even + odd
    assert mixed.parity() is None
    parts = dict(mixed.parity_parts())
    assert parts[0] == even and parts[1] == odd
    even.check_even_homogeneous()
    with pytest.raises(ValueError):
        odd.check_even_homogeneous()


def random_supermatrix(rng, sig=(2, 1), vars_pool=None, density=0.6):
    p, q = sig
    n = p + q
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            if rng.random() > density:
                row.append(GradedPoly.zero())
                continue
            term = GradedPoly.scalar(rng.randint(-3, 3))
            for _ in range(rng.randint(0, 2)):
                term = term * P(rng.choice(vars_pool))
            row.append(term)
        rows.append(row)
    return SuperMatrix(p, q, rows)


@pytest.fixture()
def pool():
    return [
        odd_independent("t1"),
        odd_independent("t2"),
        odd_independent("t3"),
        parameter("a"),
        parameter("eps", invertible=True),
    ]


def random_homogeneous(rng, parity, sig=(2, 1), pool=None, density=0.7):
    """Random supermatrix homogeneous of the given parity."""
    p, q = sig
    n = p + q
    odd_pool = [v for v in pool if v.parity]
    even_pool = [v for v in pool if not v.parity]
    z = GradedPoly.zero()
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            pos = (i >= p) ^ (j >= p)
            want = pos ^ parity
            if rng.random() > density:
                row.append(z)
                continue
            term = GradedPoly.scalar(rng.randint(-3, 3))
            if want:
                term = term * P(rng.choice(odd_pool))
                if rng.random() < 0.3:
                    term = term * P(rng.choice(odd_pool)) * P(rng.choice(odd_pool))
            elif rng.random() < 0.4:
                term = term * P(rng.choice(odd_pool)) * P(rng.choice(odd_pool))
            if rng.random() < 0.5:
                term = term * P(rng.choice(even_pool))
            row.append(term)
        rows.append(row)
    return SuperMatrix(p, q, rows)


def test_super_jacobi(pool):
    """(-1)^{pA pC}[A,[B,C]] + cyclic = 0 for homogeneous matrices."""
    rng = random.Random(140)
    for _ in range(60):
        pa, pb, pc = rng.randint(0, 1), rng.randint(0, 1), rng.randint(0, 1)
        a = random_homogeneous(rng, pa, pool=pool)
        b = random_homogeneous(rng, pb, pool=pool)
        c = random_homogeneous(rng, pc, pool=pool)
        t1 = supercommutator(a, supercommutator(b, c))
        t2 = supercommutator(b, supercommutator(c, a))
        t3 = supercommutator(c, supercommutator(a, b))
        s1 = (-1) ** (pa * pc)
        s2 = (-1) ** (pb * pa)
        s3 = (-1) ** (pc * pb)
        acc = s1 * t1 + s2 * t2 + s3 * t3
        assert acc.is_zero()


def test_supertrace_kills_brackets(pool):
    rng = random.Random(141)
    for _ in range(80):
        a = random_supermatrix(rng, vars_pool=pool)
        b = random_supermatrix(rng, vars_pool=pool)
        assert supercommutator(a, b).supertrace().is_zero()


def test_supertrace_values():
    m = SuperMatrix.identity(2, 1)
    assert m.supertrace() == GradedPoly.scalar(1)  # 1 + 1 - 1


def test_inverse_unit_pivots():
    eps = parameter("eps", invertible=True)
    th = odd_independent("th")
    one = GradedPoly.scalar(1)
    z = GradedPoly.zero()
    rows = [
        [2 * P(eps), P(eps) * P(eps), P(th)],
        [z, one, z],
        [P(th), z, one + P(th) * P(th)],
    ]
    m = SuperMatrix(2, 1, rows)
    inv = m.inverse()
    ident = SuperMatrix.identity(2, 1)
    assert inv @ m == ident and m @ inv == ident


def test_inverse_requires_unit_pivot():
    a = parameter("a")  # not invertible
    one = GradedPoly.scalar(1)
    z = GradedPoly.zero()
    m = SuperMatrix(2, 1, [[P(a), z, z], [z, one, z], [z, z, one]])
    with pytest.raises(ValueError):
        m.inverse()


def test_triangular_unipotent_inverse():
    lam = parameter("lam")
    rows = [list(r) for r in SuperMatrix.identity(2, 1).rows]
    rows[0][1] = P(lam)
    s = SuperMatrix(2, 1, rows)
    inv = s.inverse()
    expected = [list(r) for r in SuperMatrix.identity(2, 1).rows]
    expected[0][1] = -P(lam)
    assert inv == SuperMatrix(2, 1, expected)


# ---------------------------------------------------------------------------
# horizontal forms
# ---------------------------------------------------------------------------


def toy_system():
    space = JetSpace([("v", 0), ("g", 1)])
    v, g = space.dependent("v"), space.dependent("g")
    rhs = {
        v: P(space.jet(v, 2)) + P(v) * P(v),
        g: P(space.jet(g, 2)) + P(v) * P(g),
    }
    return EvolutionarySystem(space, rhs)


def random_jet_matrix(rng, system, sig=(2, 1)):
    space = system.space
    pool = [space.jet(space.dependent("v"), k) for k in range(3)]
    pool += [space.jet(space.dependent("g"), k) for k in range(2)]
    return random_supermatrix(rng, sig=sig, vars_pool=pool)


def test_dh_squares_to_zero():
    rng = random.Random(9)
    system = toy_system()
    for _ in range(25):
        m = random_jet_matrix(rng, system)
        f0 = MatrixForm.of_degree_0(m)
        f2 = dh_form(dh_form(f0, system), system)
        assert f2.is_zero()


def test_dh_on_top_degree_rejected():
    system = toy_system()
    f2 = MatrixForm.two_form(SuperMatrix.zero(2, 1))
    with pytest.raises(ValueError):
        dh_form(f2, system)


def test_bracket_forms_wedge_signs(pool):
    rng = random.Random(10)
    for _ in range(40):
        a = random_supermatrix(rng, vars_pool=pool)
        b = random_supermatrix(rng, vars_pool=pool)
        c = random_supermatrix(rng, vars_pool=pool)
        d = random_supermatrix(rng, vars_pool=pool)
        f1 = MatrixForm.one_form(a, b)
        f2 = MatrixForm.one_form(c, d)
        got = bracket_forms(f1, f2)
        expected = MatrixForm.two_form(
            supercommutator(a, d) - supercommutator(b, c)
        )
        assert got == expected
        # graded symmetry in degree 1: [rho, sigma] = [sigma, rho] for
        # even matrix coefficients (the form-degree sign and the matrix
        # swap sign cancel); check on even-homogeneous inputs
        if all(x.parity() == 0 or x.is_zero() for x in (a, b, c, d)):
            assert bracket_forms(f2, f1) == got


def test_half_bracket_is_commutator_for_even_pair(pool):
    """For an even one-form alpha = A dx + B dt,
    (1/2)[alpha, alpha] = [A, B] dx^dt."""
    rng = random.Random(12)
    half = GradedPoly.scalar(gaussian(rational(1, 2)))
    for _ in range(40):
        a = random_homogeneous(rng, 0, pool=pool)
        b = random_homogeneous(rng, 0, pool=pool)
        alpha = MatrixForm.one_form(a, b)
        br = bracket_forms(alpha, alpha)
        halved = br.parts["dxdt"].map_entries(lambda p: half * p)
        assert halved == supercommutator(a, b)


def test_bracket_degree_overflow():
    f2 = MatrixForm.two_form(SuperMatrix.zero(2, 1))
    f1 = MatrixForm.one_form(SuperMatrix.zero(2, 1), SuperMatrix.zero(2, 1))
    with pytest.raises(ValueError):
        bracket_forms(f1, f2)
