"""Graded jet calculus for evolutionary systems.

Only x-derivative jets are stored as coordinates (``u``, ``u_x``,
``u_xx``, ...).  Time derivatives are eliminated eagerly through the
evolution equations: ``total_t`` replaces every jet ``D_x^k(u)`` by
``D_x^k`` of the right-hand side of ``u_t = F``.  On jet coordinates the
two total derivatives commute, which the tests check explicitly.

An even total derivative acts on a graded polynomial through left partial
derivatives with the coefficient on the left::

    D(f) = sum_v D(v) * partial_left(f, v)

which is exactly the graded chain rule for an even derivation.
"""

from __future__ import annotations

import threading
from typing import Callable, Iterable, Sequence

from .superscalar import (
    GradedPoly,
    Monomial,
    VarKind,
    Variable,
    even_independent,
    gaussian,
    odd_independent,
    odd_partial,
    partial_left,
    rational,
    substitute,
)


class JetSpace:
    """Independent variables x, t plus dependents and their x-jets."""

    def __init__(self, dependents: Sequence[tuple[str, int]]):
        self.x = even_independent("x")
        self.t = even_independent("t")
        deps = []
        for name, parity in dependents:
            kind = VarKind.ODD_JET if parity else VarKind.EVEN_JET
            deps.append(Variable(name, kind))
        self.dependents = tuple(deps)
        self._by_name = {d.name: d for d in deps}
        self._jets: dict[tuple[Variable, int], Variable] = {
            (d, 0): d for d in deps
        }
        self._lock = threading.RLock()

    def dependent(self, name: str) -> Variable:
        return self._by_name[name]

    def jet(self, dep: Variable, order: int) -> Variable:
        """The x-jet coordinate ``dep`` differentiated ``order`` times."""
        if order < 0:
            raise ValueError("jet order must be >= 0")
        try:
            return self._jets[(dep, order)]
        except KeyError:
            pass
        if dep not in self._by_name.values():
            raise KeyError(f"{dep.name} is not a dependent of this jet space")
        with self._lock:
            # create any missing intermediate orders so keys stay contiguous
            top = max(k for d, k in self._jets if d is dep)
            for k in range(top + 1, order + 1):
                v = Variable(
                    f"{dep.name}_{'x' * k}", dep.kind, base=dep, order=k
                )
                self._jets[(dep, k)] = v
        return self._jets[(dep, order)]

    def jet_poly(self, name: str, order: int = 0) -> GradedPoly:
        return GradedPoly.variable(self.jet(self.dependent(name), order))

    @staticmethod
    def base_and_order(v: Variable) -> tuple[Variable, int]:
        if not v.is_jet:
            raise ValueError(f"{v.name} is not a jet coordinate")
        return (v, 0) if v.base is None else (v.base, v.order)

    # -- the horizontal derivative D_x ---------------------------------------

    def derivative_of_variable(self, v: Variable) -> GradedPoly:
        """D_x applied to a single coordinate."""
        if v.is_jet:
            base, order = self.base_and_order(v)
            return GradedPoly.variable(self.jet(base, order + 1))
        if v is self.x:
            return GradedPoly.scalar(1)
        if v.kind in (VarKind.PARAMETER, VarKind.ODD_INDEPENDENT):
            return GradedPoly.zero()
        if v is self.t:
            return GradedPoly.zero()
        raise ValueError(
            f"total_x cannot differentiate {v.name} ({v.kind.value}); "
            "nonlocal variables require a covering's extended derivative"
        )

    def total_x(self, p: GradedPoly) -> GradedPoly:
        out = GradedPoly.zero()
        for v in p.variables():
            dv = self.derivative_of_variable(v)
            if dv.is_zero():
                continue
            out = out + dv * partial_left(p, v)
        return out


class EvolutionarySystem:
    """A system u^k_t = F^k(x, jets) over a JetSpace, one F per dependent."""

    def __init__(self, space: JetSpace, rhs: dict[Variable, GradedPoly],
                 *, name: str | None = None,
                 parameters: Sequence[Variable] = ()):
        self.space = space
        self.name = name
        self.parameters = tuple(parameters)
        self.rhs = dict(rhs)
        self._t_cache: dict[tuple[Variable, int], GradedPoly] = {}
        self._lock = threading.RLock()
        for dep in space.dependents:
            if dep not in self.rhs:
                raise ValueError(f"missing right-hand side for {dep.name}")
        allowed = set(self.parameters) | {space.x, space.t}
        for dep, f in self.rhs.items():
            if not f.is_zero() and f.parity() != dep.parity:
                raise ValueError(
                    f"right-hand side of {dep.name}_t has wrong parity"
                )
            for v in f.variables():
                if v.is_jet:
                    base, _ = JetSpace.base_and_order(v)
                    if space._by_name.get(base.name) is not base:
                        raise ValueError(f"foreign jet {v.name} in rhs")
                elif v not in allowed:
                    raise ValueError(
                        f"variable {v.name} not allowed in a right-hand side"
                    )

    # -- derivatives ----------------------------------------------------------

    def total_x(self, p: GradedPoly) -> GradedPoly:
        return self.space.total_x(p)

    def prolonged_rhs(self, dep: Variable, order: int) -> GradedPoly:
        """D_x^order of the right-hand side for ``dep`` (memoized)."""
        key = (dep, order)
        cached = self._t_cache.get(key)
        if cached is not None:
            return cached
        with self._lock:
            cached = self._t_cache.get(key)
            if cached is not None:
                return cached
            if order == 0:
                value = self.rhs[dep]
            else:
                value = self.space.total_x(self.prolonged_rhs(dep, order - 1))
            self._t_cache[key] = value
            return value

    def derivative_of_variable_t(self, v: Variable) -> GradedPoly:
        if v.is_jet:
            base, order = JetSpace.base_and_order(v)
            return self.prolonged_rhs(base, order)
        if v is self.space.t:
            return GradedPoly.scalar(1)
        if v is self.space.x or v.kind in (
            VarKind.PARAMETER,
            VarKind.ODD_INDEPENDENT,
        ):
            return GradedPoly.zero()
        raise ValueError(
            f"total_t cannot differentiate {v.name} ({v.kind.value}); "
            "nonlocal variables require a covering's extended derivative"
        )

    def total_t(self, p: GradedPoly) -> GradedPoly:
        out = GradedPoly.zero()
        for v in p.variables():
            dv = self.derivative_of_variable_t(v)
            if dv.is_zero():
                continue
            out = out + dv * partial_left(p, v)
        return out

    def scope(self, extra: dict | None = None) -> "SystemScope":
        return SystemScope(self, extra)


class SystemScope:
    """Parser scope over a system: x, t, parameters, dependents, jets.

    Jet names use an underscore suffix of ``x``/``t`` letters, e.g.
    ``u12_xxx`` or ``u0_xt``.  A ``t`` in the suffix resolves through the
    evolution equations, so it needs a system (not just a jet space).
    """

    def __init__(self, system: EvolutionarySystem | None,
                 extra: dict | None = None,
                 space: JetSpace | None = None):
        if system is None and space is None:
            raise ValueError("need a system or a jet space")
        self.system = system
        self.space = space if space is not None else system.space
        self.extra = dict(extra or {})

    def resolve_name(self, name: str) -> GradedPoly:
        entry = self.extra.get(name)
        if entry is not None:
            if isinstance(entry, Variable):
                return GradedPoly.variable(entry)
            return entry
        if name == "x":
            return GradedPoly.variable(self.space.x)
        if name == "t":
            return GradedPoly.variable(self.space.t)
        if self.system is not None:
            for prm in self.system.parameters:
                if prm.name == name:
                    return GradedPoly.variable(prm)
        dep = self.space._by_name.get(name)
        if dep is not None:
            return GradedPoly.variable(dep)
        if "_" in name:
            base_name, suffix = name.rsplit("_", 1)
            dep = self.space._by_name.get(base_name)
            if dep is not None and suffix and set(suffix) <= {"x", "t"}:
                xc = suffix.count("x")
                tc = suffix.count("t")
                p = GradedPoly.variable(self.space.jet(dep, xc))
                if tc:
                    if self.system is None:
                        raise KeyError(
                            f"{name}: t-derivatives need an evolutionary system"
                        )
                    for _ in range(tc):
                        p = self.system.total_t(p)
                return p
        raise KeyError(name)


# ---------------------------------------------------------------------------
# variable renaming across spaces
# ---------------------------------------------------------------------------


def rename_variables(p: GradedPoly, mapping: dict[Variable, Variable]) -> GradedPoly:
    """Rebuild ``p`` with variables replaced according to ``mapping``."""
    return substitute(
        p, {v: GradedPoly.variable(w) for v, w in mapping.items()}
    )


# ---------------------------------------------------------------------------
# N=2 superfield expansion
# ---------------------------------------------------------------------------


class SuperfieldEquation:
    """A single superfield law u_t = rhs(u; D1, D2, Dx).

    ``builder(u, D1, D2, Dx)`` receives the expanded superfield and the two
    odd superspace derivations ``Di = d/d(theta_i) + theta_i * d/dx`` plus
    the horizontal derivative, and returns the right-hand side.
    """

    def __init__(self, name: str, builder: Callable, *,
                 parameters: Sequence[Variable] = ()):
        self.name = name
        self.builder = builder
        self.parameters = tuple(parameters)


def expand_superfield(equation: SuperfieldEquation,
                      component_names: Sequence[str] = ("u0", "u1", "u2", "u12"),
                      ) -> EvolutionarySystem:
    """Expand u = u0 + theta1*u1 + theta2*u2 + theta1*theta2*u12 into
    a four-component evolutionary system."""
    n0, n1, n2, n12 = component_names
    th1 = odd_independent("theta1")
    th2 = odd_independent("theta2")
    space = JetSpace([(n0, 0), (n1, 1), (n2, 1), (n12, 0)])
    u0, u1, u2, u12 = (space.dependent(n) for n in component_names)
    P = GradedPoly.variable
    t1, t2 = P(th1), P(th2)
    u = P(u0) + t1 * P(u1) + t2 * P(u2) + t1 * t2 * P(u12)

    dx = space.total_x

    def d1(f: GradedPoly) -> GradedPoly:
        return odd_partial(f, th1) + t1 * dx(f)

    def d2(f: GradedPoly) -> GradedPoly:
        return odd_partial(f, th2) + t2 * dx(f)

    rhs_super = equation.builder(u, d1, d2, dx)

    c0 = substitute(rhs_super, {th1: GradedPoly.zero(), th2: GradedPoly.zero()})
    d_th1 = odd_partial(rhs_super, th1)
    c1 = substitute(d_th1, {th2: GradedPoly.zero()})
    c2 = substitute(
        odd_partial(rhs_super, th2), {th1: GradedPoly.zero()}
    )
    c12 = odd_partial(d_th1, th2)

    recombined = c0 + t1 * c1 + t2 * c2 + t1 * t2 * c12
    if recombined != rhs_super:
        raise AssertionError("superfield component extraction lost terms")

    return EvolutionarySystem(
        space,
        {u0: c0, u1: c1, u2: c2, u12: c12},
        name=equation.name,
        parameters=equation.parameters,
    )


def skdv_superfield(a=None) -> SuperfieldEquation:
    """The one-parameter N=2 super-KdV superfield law.

    u_t = -Dx^3(u) + 3*Dx(u*D1(D2(u))) + (a-1)/2 * Dx(D1(D2(u*u)))
          + 3*a*u^2*Dx(u)

    ``a`` may be an integer/rational value or None for a symbolic
    coefficient (an even parameter named ``a``).
    """
    parameters: tuple[Variable, ...] = ()
    if a is None:
        a_var = Variable("a", VarKind.PARAMETER)
        a_poly = GradedPoly.variable(a_var)
        parameters = (a_var,)
        name = "skdv.a"
    else:
        a_poly = GradedPoly.scalar(gaussian(a))
        name = f"skdv.a{a}"

    half = GradedPoly.scalar(gaussian(rational(1, 2)))

    def builder(u, d1, d2, dx):
        term1 = -dx(dx(dx(u)))
        term2 = 3 * dx(u * d1(d2(u)))
        term3 = (a_poly - 1) * half * dx(d1(d2(u * u)))
        term4 = 3 * a_poly * u * u * dx(u)
        return term1 + term2 + term3 + term4

    return SuperfieldEquation(name, builder, parameters=parameters)


def bosonic_limit(system: EvolutionarySystem,
                  *, name: str | None = None) -> EvolutionarySystem:
    """Set every odd dependent (and its jets) to zero; keep even dependents.

    Returns a fresh system on a fresh jet space holding only the even
    dependents, with the same names and declaration order.
    """
    evens = [d for d in system.space.dependents if not d.parity]
    new_space = JetSpace([(d.name, 0) for d in evens])
    new_rhs: dict[Variable, GradedPoly] = {}
    for dep in evens:
        p = system.rhs[dep]
        bindings: dict[Variable, GradedPoly] = {}
        for v in p.variables():
            if not v.is_jet:
                continue
            base, order = JetSpace.base_and_order(v)
            if base.parity:
                bindings[v] = GradedPoly.zero()
            else:
                bindings[v] = GradedPoly.variable(
                    new_space.jet(new_space.dependent(base.name), order)
                )
        new_rhs[new_space.dependent(dep.name)] = substitute(p, bindings)
    return EvolutionarySystem(
        new_space,
        new_rhs,
        name=name or (f"{system.name}.bosonic" if system.name else None),
        parameters=system.parameters,
    )
