"""Jet calculus, total derivatives, and the N=2 superfield expansion.

The superfield expansion is checked against component equations expanded
by hand (graded product rule applied on paper, independently of the code
path being tested).
"""

import random

import pytest

from graded_zcr.exprtext import parse_expression
from graded_zcr.jets import (
    EvolutionarySystem,
    JetSpace,
    bosonic_limit,
    expand_superfield,
    skdv_superfield,
)
from graded_zcr.superscalar import (
    GradedPoly,
    gaussian,
    odd_independent,
    odd_partial,
    parameter,
    poly_to_text,
    substitute,
)

# ---------------------------------------------------------------------------
# hand-expanded component equations for the super-KdV superfield law
# ---------------------------------------------------------------------------

HAND_U0_T = (
    "-u0_xxx + 3*a*u0^2*u0_x - (a+2)*(u0_x*u12 + u0*u12_x)"
    " + (a-1)*(u1_x*u2 + u1*u2_x)"
)
HAND_U1_T = (
    "-u1_xxx + (a+2)*(u0_x*u2_x + u0*u2_xx) + (a-1)*(u0_xx*u2 + u0_x*u2_x)"
    " - 3*(u1_x*u12 + u1*u12_x) + 3*a*(2*u0*u0_x*u1 + u0^2*u1_x)"
)
HAND_U2_T = (
    "-u2_xxx - (a+2)*(u0_x*u1_x + u0*u1_xx) - (a-1)*(u0_xx*u1 + u0_x*u1_x)"
    " - 3*(u2_x*u12 + u2*u12_x) + 3*a*(2*u0*u0_x*u2 + u0^2*u2_x)"
)
HAND_U12_T = (
    "-u12_xxx - 6*u12*u12_x + 3*a*u0_x*u0_xx + (a+2)*u0*u0_xxx"
    " + 3*u1*u1_xx + 3*u2*u2_xx"
    " + 3*a*(2*u0*u0_x*u12 + u0^2*u12_x"
    " - 2*u0_x*u1*u2 - 2*u0*u1_x*u2 - 2*u0*u1*u2_x)"
)

HAND_RHS = {"u0": HAND_U0_T, "u1": HAND_U1_T, "u2": HAND_U2_T, "u12": HAND_U12_T}


def make_space():
    return JetSpace([("v", 0), ("g", 1)])


def random_poly(rng, space, extra=(), max_terms=4):
    pool = [space.jet(space.dependent("v"), k) for k in range(3)]
    pool += [space.jet(space.dependent("g"), k) for k in range(3)]
    pool += list(extra)
    out = GradedPoly.zero()
    for _ in range(rng.randint(0, max_terms)):
        term = GradedPoly.scalar(rng.randint(-3, 3))
        for _ in range(rng.randint(0, 3)):
            term = term * GradedPoly.variable(rng.choice(pool))
        out = out + term
    return out


def test_jet_coordinates():
    space = make_space()
    v = space.dependent("v")
    g = space.dependent("g")
    assert space.jet(v, 0) is v
    vxx = space.jet(v, 2)
    assert vxx.name == "v_xx"
    assert vxx.parity == 0
    assert space.jet(g, 1).parity == 1
    assert space.jet(v, 2) is vxx  # cached
    assert v.key < vxx.key < g.key


def test_total_x_basics():
    space = make_space()
    eps = parameter("eps", invertible=True)
    P = GradedPoly.variable
    v, g = space.dependent("v"), space.dependent("g")
    assert space.total_x(P(space.x)) == GradedPoly.scalar(1)
    assert space.total_x(P(space.t)).is_zero()
    assert space.total_x(P(eps)).is_zero()
    assert space.total_x(P(v) * P(v)) == 2 * P(v) * P(space.jet(v, 1))
    # graded product: D(g*g_x) = g_x*g_x + g*g_xx = g*g_xx
    gx, gxx = space.jet(g, 1), space.jet(g, 2)
    assert space.total_x(P(g) * P(gx)) == P(g) * P(gxx)


def test_total_x_leibniz_random():
    rng = random.Random(11)
    space = make_space()
    eps = parameter("eps", invertible=True)
    for _ in range(150):
        f = random_poly(rng, space, extra=[eps, space.x])
        h = random_poly(rng, space, extra=[eps])
        assert space.total_x(f * h) == space.total_x(f) * h + f * space.total_x(h)


def simple_system():
    """v_t = v_xx + g*g_x,  g_t = g_xx + v*g_x  (an ad-hoc graded system)."""
    space = make_space()
    P = GradedPoly.variable
    v, g = space.dependent("v"), space.dependent("g")
    rhs = {
        v: P(space.jet(v, 2)) + P(g) * P(space.jet(g, 1)),
        g: P(space.jet(g, 2)) + P(v) * P(space.jet(g, 1)),
    }
    return EvolutionarySystem(space, rhs, name="toy")


def test_total_derivatives_commute():
    rng = random.Random(21)
    system = simple_system()
    for _ in range(40):
        f = random_poly(rng, system.space)
        xt = system.total_t(system.total_x(f))
        tx = system.total_x(system.total_t(f))
        assert xt == tx


def test_system_scope_jet_names():
    system = simple_system()
    scope = system.scope()
    space = system.space
    v = space.dependent("v")
    assert parse_expression("v_xx", scope) == GradedPoly.variable(space.jet(v, 2))
    # mixed suffixes resolve through the evolution equations, in any order
    assert parse_expression("v_xt", scope) == parse_expression("v_tx", scope)
    assert parse_expression("v_t", scope) == system.rhs[v]
    with pytest.raises(Exception):
        parse_expression("w_x", scope)


def test_rhs_validation():
    space = make_space()
    P = GradedPoly.variable
    v, g = space.dependent("v"), space.dependent("g")
    with pytest.raises(ValueError):
        # odd right-hand side for an even dependent
        EvolutionarySystem(space, {v: P(g), g: P(v)})
    with pytest.raises(ValueError):
        EvolutionarySystem(space, {v: P(v)})  # missing g


# ---------------------------------------------------------------------------
# superspace derivations
# ---------------------------------------------------------------------------


def test_superspace_derivation_squares_to_total_x():
    """With D = d/dtheta + theta*d/dx, D^2 f = f_x for any jet polynomial."""
    th = odd_independent("theta")
    space = JetSpace([("u0", 0), ("u1", 1)])
    P = GradedPoly.variable
    tp = P(th)

    def d_theta(f):
        return odd_partial(f, th) + tp * space.total_x(f)

    rng = random.Random(5)
    for _ in range(60):
        f = random_poly(rng, JetSpaceShim(space), extra=[th])
        assert d_theta(d_theta(f)) == space.total_x(f)


class JetSpaceShim:
    """Adapter so random_poly can draw from a space with other dep names."""

    def __init__(self, space):
        self._space = space
        self.x = space.x

    def dependent(self, name):
        mapping = {"v": "u0", "g": "u1"}
        return self._space.dependent(mapping[name])

    def jet(self, dep, order):
        return self._space.jet(dep, order)


# ---------------------------------------------------------------------------
# the super-KdV expansion against the hand oracle
# ---------------------------------------------------------------------------


def expand(a=None):
    return expand_superfield(skdv_superfield(a))


def test_expansion_matches_hand_oracle_symbolic():
    system = expand(None)
    scope = system.scope()
    for name, text in HAND_RHS.items():
        dep = system.space.dependent(name)
        expected = parse_expression(text, scope)
        assert system.rhs[dep] == expected, f"{name}_t mismatch"


def test_expansion_a4_matches_substituted_oracle():
    system = expand(4)
    scope = system.scope()
    a4 = {"a": GradedPoly.scalar(4)}
    for name, text in HAND_RHS.items():
        dep = system.space.dependent(name)
        expected = parse_expression(
            text, system.scope(extra=a4)
        )
        assert system.rhs[dep] == expected, f"{name}_t mismatch at a=4"
    # parities of the four components
    assert system.rhs[system.space.dependent("u0")].parity() == 0
    assert system.rhs[system.space.dependent("u1")].parity() == 1
    assert system.rhs[system.space.dependent("u2")].parity() == 1
    assert system.rhs[system.space.dependent("u12")].parity() == 0


def test_symbolic_specializes_to_a4():
    sym = expand(None)
    conc = expand(4)
    (a_var,) = sym.parameters
    four = GradedPoly.scalar(4)
    for name in ("u0", "u1", "u2", "u12"):
        specialized = substitute(sym.rhs[sym.space.dependent(name)], {a_var: four})
        # different jet spaces: compare canonical text
        assert poly_to_text(specialized) == poly_to_text(
            conc.rhs[conc.space.dependent(name)]
        )


def test_classical_kdv_sits_inside():
    """At u0 = u1 = u2 = 0 the u12 equation is the classical KdV equation
    (independently of a) and the other three right-hand sides vanish."""
    sym = expand(None)
    space = sym.space
    zero = GradedPoly.zero()
    bindings = {}
    for name in ("u0", "u1", "u2"):
        dep = space.dependent(name)
        for order in range(0, 6):
            bindings[space.jet(dep, order)] = zero
    u12 = space.dependent("u12")
    reduced = substitute(sym.rhs[u12], dict(bindings))
    expected = parse_expression("-u12_xxx - 6*u12*u12_x", sym.scope())
    assert reduced == expected
    for name in ("u0", "u1", "u2"):
        assert substitute(sym.rhs[space.dependent(name)], dict(bindings)).is_zero()


def test_bosonic_limit_two_component():
    system = bosonic_limit(expand(4), name="kb3")
    assert tuple(d.name for d in system.space.dependents) == ("u0", "u12")
    scope = system.scope()
    exp_u0 = parse_expression(
        "-u0_xxx + 12*u0^2*u0_x - 6*u0_x*u12 - 6*u0*u12_x", scope
    )
    exp_u12 = parse_expression(
        "-u12_xxx - 6*u12*u12_x + 12*u0_x*u0_xx + 6*u0*u0_xxx"
        " + 24*u0*u0_x*u12 + 12*u0^2*u12_x",
        scope,
    )
    assert system.rhs[system.space.dependent("u0")] == exp_u0
    assert system.rhs[system.space.dependent("u12")] == exp_u12
