"""Core graded-scalar arithmetic, checked against a naive sign oracle."""

import random

import pytest

from graded_zcr.superscalar import (
    GR_I,
    GR_ONE,
    GaussianRational,
    GradedPoly,
    Monomial,
    Variable,
    VarKind,
    even_partial,
    gaussian,
    odd_independent,
    odd_partial,
    parameter,
    partial_left,
    poly_to_text,
    rational,
    substitute,
)

# ---------------------------------------------------------------------------
# naive oracle: terms as explicit factor lists, canonicalized by bubble sort
# ---------------------------------------------------------------------------


def bubble_canonicalize(factors):
    """Sort a factor list by variable key with adjacent swaps.

    Returns (sign, sorted_factors); each swap of two odd factors flips the
    sign.  This is the definition of the Koszul sign, computed the slow way.
    """
    fs = list(factors)
    sign = 1
    n = len(fs)
    for i in range(n):
        for j in range(n - 1 - i):
            if fs[j].key > fs[j + 1].key:
                if fs[j].parity and fs[j + 1].parity:
                    sign = -sign
                fs[j], fs[j + 1] = fs[j + 1], fs[j]
    return sign, fs


def naive_term_to_poly(coeff, factors):
    """Canonicalize a raw factor list into a one-term GradedPoly (or zero)."""
    sign, fs = bubble_canonicalize(factors)
    odds = [v for v in fs if v.parity]
    if len(set(map(id, odds))) != len(odds):
        return GradedPoly.zero()
    evens: dict = {}
    for v in fs:
        if not v.parity:
            evens[v] = evens.get(v, 0) + 1
    m = Monomial(
        tuple(sorted(evens.items(), key=lambda ve: ve[0].key)),
        tuple(odds),
    )
    c = gaussian(coeff) * sign
    return GradedPoly.term(m, c)


def naive_mul(terms1, terms2):
    """Multiply two term lists by concatenation + bubble canonicalization."""
    out = GradedPoly.zero()
    for c1, f1 in terms1:
        for c2, f2 in terms2:
            out = out + naive_term_to_poly(gaussian(c1) * gaussian(c2), f1 + f2)
    return out


def terms_to_poly(terms):
    out = GradedPoly.zero()
    for c, f in terms:
        out = out + naive_term_to_poly(c, f)
    return out


def random_terms(rng, variables, max_terms=4, max_factors=4):
    terms = []
    for _ in range(rng.randint(0, max_terms)):
        coeff = GaussianRational(
            rational(rng.randint(-4, 4), rng.randint(1, 3)),
            rational(rng.randint(-2, 2), 1),
        )
        factors = [rng.choice(variables) for _ in range(rng.randint(0, max_factors))]
        terms.append((coeff, factors))
    return terms


@pytest.fixture()
def vars6():
    th1 = odd_independent("th1")
    th2 = odd_independent("th2")
    th3 = odd_independent("th3")
    a = parameter("a")
    b = parameter("b")
    eps = parameter("eps", invertible=True)
    return [th1, th2, th3, a, b, eps]


# ---------------------------------------------------------------------------
# GaussianRational
# ---------------------------------------------------------------------------


def test_gaussian_field_axioms():
    x = GaussianRational(rational(3, 4), rational(-2, 5))
    y = GaussianRational(rational(-1, 3), rational(7, 2))
    assert (x + y) - y == x
    assert (x * y) / y == x
    assert x * y == y * x
    assert GR_I * GR_I == -1
    assert x * x.inverse() == 1
    assert (x ** 3) * (x ** -3) == 1
    assert x.conjugate().conjugate() == x
    assert (x * y).conjugate() == x.conjugate() * y.conjugate()


def test_gaussian_division_exact():
    x = GaussianRational(1, 1)  # 1 + i
    y = GaussianRational(1, -1)  # 1 - i
    assert x * y == 2
    assert x / y == GR_I
    with pytest.raises(ZeroDivisionError):
        GaussianRational(0, 0).inverse()


# ---------------------------------------------------------------------------
# multiplication against the oracle
# ---------------------------------------------------------------------------


def test_koszul_basics(vars6):
    th1, th2, _, a, _, eps = vars6
    P = GradedPoly.variable
    assert P(th1) * P(th2) == -(P(th2) * P(th1))
    assert (P(th1) * P(th1)).is_zero()
    assert P(a) * P(th1) == P(th1) * P(a)
    assert P(eps, -2) * P(eps, 2) == GradedPoly.scalar(1)


def test_mul_matches_bubble_oracle(vars6):
    rng = random.Random(20260822)
    for _ in range(300):
        t1 = random_terms(rng, vars6)
        t2 = random_terms(rng, vars6)
        p1, p2 = terms_to_poly(t1), terms_to_poly(t2)
        assert p1 * p2 == naive_mul(t1, t2)


def test_supercommutativity_on_homogeneous(vars6):
    rng = random.Random(7)
    for _ in range(200):
        t1 = random_terms(rng, vars6, max_terms=3)
        t2 = random_terms(rng, vars6, max_terms=3)
        p1, p2 = terms_to_poly(t1), terms_to_poly(t2)
        for p in (p1, p2):
            if p.parity() is None and not p.is_zero():
                break
        else:
            s = (-1) ** (
                p1.homogeneous_parity(zero_parity=0)
                * p2.homogeneous_parity(zero_parity=0)
            )
            assert p1 * p2 == s * (p2 * p1)


def test_associativity(vars6):
    rng = random.Random(99)
    for _ in range(100):
        p1 = terms_to_poly(random_terms(rng, vars6, max_terms=3, max_factors=3))
        p2 = terms_to_poly(random_terms(rng, vars6, max_terms=3, max_factors=3))
        p3 = terms_to_poly(random_terms(rng, vars6, max_terms=3, max_factors=3))
        assert (p1 * p2) * p3 == p1 * (p2 * p3)


# ---------------------------------------------------------------------------
# graded differentiation
# ---------------------------------------------------------------------------


def test_odd_partial_signs(vars6):
    th1, th2, th3 = vars6[:3]
    P = GradedPoly.variable
    m12 = P(th1) * P(th2)
    assert odd_partial(m12, th1) == P(th2)
    assert odd_partial(m12, th2) == -P(th1)
    m123 = P(th1) * P(th2) * P(th3)
    assert odd_partial(m123, th3) == P(th1) * P(th2)
    assert odd_partial(m123, th2) == -(P(th1) * P(th3))
    assert odd_partial(m123, th1) == P(th2) * P(th3)


def test_odd_partial_left_leibniz(vars6):
    # d(f*g) = d(f)*g + (-1)^{p(f)} f*d(g) for homogeneous f
    rng = random.Random(31)
    th1 = vars6[0]
    for _ in range(200):
        f = terms_to_poly(random_terms(rng, vars6, max_terms=3))
        g = terms_to_poly(random_terms(rng, vars6, max_terms=3))
        pf = f.parity()
        if pf is None:
            continue
        sign = -1 if pf else 1
        lhs = odd_partial(f * g, th1)
        rhs = odd_partial(f, th1) * g + sign * (f * odd_partial(g, th1))
        assert lhs == rhs


def test_partial_commutation(vars6):
    rng = random.Random(55)
    th1, th2, _, a, b, eps = vars6
    for _ in range(150):
        f = terms_to_poly(random_terms(rng, vars6))
        assert odd_partial(odd_partial(f, th1), th2) == -odd_partial(
            odd_partial(f, th2), th1
        )
        assert odd_partial(odd_partial(f, th1), th1).is_zero()
        assert even_partial(even_partial(f, a), b) == even_partial(
            even_partial(f, b), a
        )
        assert even_partial(odd_partial(f, th1), a) == odd_partial(
            even_partial(f, a), th1
        )
    # Laurent derivative
    p = GradedPoly.variable(eps, -2)
    assert even_partial(p, eps) == -2 * GradedPoly.variable(eps, -3)


def test_substitution_is_a_homomorphism(vars6):
    rng = random.Random(77)
    th1, th2, th3, a, b, eps = vars6
    # parity-correct values
    P = GradedPoly.variable
    bindings = {
        th1: P(th2) * (P(a) + 2),
        a: P(b) * P(b) + P(eps, -1),
        th3: GradedPoly.zero(),
    }
    for _ in range(150):
        f = terms_to_poly(random_terms(rng, vars6))
        g = terms_to_poly(random_terms(rng, vars6))
        assert substitute(f * g, dict(bindings)) == substitute(
            f, dict(bindings)
        ) * substitute(g, dict(bindings))
        assert substitute(f + g, dict(bindings)) == substitute(
            f, dict(bindings)
        ) + substitute(g, dict(bindings))


def test_substitution_parity_check(vars6):
    th1, _, _, a, _, _ = vars6
    with pytest.raises(ValueError):
        substitute(GradedPoly.variable(a), {a: GradedPoly.variable(th1)})
    with pytest.raises(ValueError):
        substitute(GradedPoly.variable(th1), {th1: GradedPoly.scalar(3)})


def test_units_and_division(vars6):
    _, _, _, a, _, eps = vars6
    P = GradedPoly.variable
    u = 3 * P(eps, 2)
    assert u / u == GradedPoly.scalar(1)
    assert (P(a) * u) / u == P(a)
    with pytest.raises(ValueError):
        (P(a) + 1).unit_inverse()
    with pytest.raises(ValueError):
        P(a) / (P(a))  # 'a' is not invertible
    assert (u ** -2) * (u ** 2) == GradedPoly.scalar(1)


# ---------------------------------------------------------------------------
# canonical printing
# ---------------------------------------------------------------------------


def test_printer_pinned_forms():
    eps = parameter("eps", invertible=True)
    th = odd_independent("th")
    a = parameter("a")
    P = GradedPoly.variable
    assert poly_to_text(GradedPoly.zero()) == "0"
    assert poly_to_text(GradedPoly.scalar(GaussianRational(0, -1))) == "-i"
    assert poly_to_text(-2 * P(eps, -2)) == "-2*eps^-2"
    # factor order inside a monomial follows variable creation order (th
    # was created before a), so the odd factor prints first here
    assert (
        poly_to_text(P(a) + GR_I * P(a) * P(th) - GradedPoly.scalar(rational(1, 2)))
        == "-1/2 + a + i*th*a"
    )
    mixed = GradedPoly.scalar(GaussianRational(1, -2)) * P(a)
    assert poly_to_text(mixed) == "(1-2*i)*a"


def test_parity_queries(vars6):
    th1, th2 = vars6[0], vars6[1]
    P = GradedPoly.variable
    assert (P(th1) * P(th2)).homogeneous_parity() == 0
    assert P(th1).homogeneous_parity() == 1
    mixed = P(th1) + 1
    assert mixed.parity() is None
    with pytest.raises(ValueError):
        mixed.homogeneous_parity()
