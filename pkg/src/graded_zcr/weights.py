"""Scaling-weight gradings of matrix families over evolutionary systems.

Many integrable systems are homogeneous under a scaling that assigns a
rational weight to every jet coordinate, to the two base derivatives and
to the deformation parameter.  When a matrix family is homogeneous in
this sense, the linear problems attached to it (removability solves in
particular) split into finite weight classes, which is what makes an
unbounded-polynomial-degree search decidable.

:func:`detect_weight_grading` finds such a grading by solving the exact
linear homogeneity constraints collected from every monomial of the
system's right-hand sides and of both family matrices.  The returned
:class:`WeightGrading` then prices arbitrary monomials and enumerates
the finite basis of any weight class.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .superscalar import (
    GaussianRational,
    GradedPoly,
    Monomial,
    Variable,
)
from .jets import JetSpace
from .linsolve import solve_sparse


def _fraction(c: GaussianRational) -> Fraction:
    if c.im:
        raise ValueError("weight solve produced a non-real value")
    re = c.re
    return Fraction(int(re.numerator), int(re.denominator))


class GradingError(ValueError):
    """The family admits no usable scaling-weight grading."""


@dataclass(frozen=True)
class WeightGrading:
    """A scaling grading: weights for variables plus matrix potentials.

    ``dep_weights`` maps each dependent to its weight; a jet of order n
    adds ``n * x_step``.  ``x_step``/``t_step`` are the weights gained
    under the two total derivatives; ``param_weight`` is the weight of
    the deformation parameter; ``potentials[i]`` shifts matrix row/column
    ``i`` so that entry (i, j) of the first matrix is homogeneous of
    weight ``x_step + potentials[i] - potentials[j]``.
    """

    system: object
    parameter: Variable
    dep_weights: dict
    x_step: Fraction
    t_step: Fraction
    param_weight: Fraction
    potentials: tuple

    def variable_weight(self, v: Variable) -> Fraction:
        space: JetSpace = self.system.space
        if v.is_jet:
            base, order = JetSpace.base_and_order(v)
            w = self.dep_weights.get(base)
            if w is None:
                raise GradingError(f"no weight for dependent {base.name}")
            return w + order * self.x_step
        if v is self.parameter:
            return self.param_weight
        if v is space.x:
            return -self.x_step
        if v is space.t:
            return -self.t_step
        raise GradingError(f"no weight assigned to variable {v.name}")

    def monomial_weight(self, m: Monomial) -> Fraction:
        total = Fraction(0)
        for v, e in m.evens:
            total += e * self.variable_weight(v)
        for v in m.odds:
            total += self.variable_weight(v)
        return total

    def poly_class(self, p: GradedPoly) -> Fraction | None:
        """The common weight of all terms (None for zero)."""
        weight: Fraction | None = None
        for m in p.terms:
            w = self.monomial_weight(m)
            if weight is None:
                weight = w
            elif weight != w:
                raise GradingError(
                    f"polynomial is not weight-homogeneous: {p}"
                )
        return weight

    def describe(self) -> str:
        deps = ", ".join(
            f"{dep.name}:{w}" for dep, w in sorted(
                self.dep_weights.items(), key=lambda kv: kv[0].name
            )
        )
        return (
            f"weights {deps}; d/dx:+{self.x_step}, d/dt:+{self.t_step}, "
            f"{self.parameter.name}:{self.param_weight}; "
            f"potentials {tuple(str(v) for v in self.potentials)}"
        )


def _monomial_combo(
    m: Monomial, space: JetSpace, parameter: Variable, dep_index: dict
) -> dict:
    """The monomial's weight as a linear combination over the unknowns."""
    combo: dict = {}

    def add(key: str, value: int):
        combo[key] = combo.get(key, 0) + value
        if combo[key] == 0:
            del combo[key]

    factors = [(v, e) for v, e in m.evens] + [(v, 1) for v in m.odds]
    for v, e in factors:
        if v.is_jet:
            base, order = JetSpace.base_and_order(v)
            add(f"dep:{dep_index[base]}", e)
            add("s", e * order)
        elif v is parameter:
            add("p", e)
        elif v is space.x:
            add("s", -e)
        elif v is space.t:
            add("tau", -e)
        else:
            raise GradingError(f"variable {v.name} has no weight unknown")
    return combo


def detect_weight_grading(
    system, parameter: Variable, matrices: dict
) -> WeightGrading:
    """Solve the homogeneity constraints for a scaling grading.

    ``matrices`` maps a derivative tag to a matrix whose entry (i, j)
    must be homogeneous of weight ``step(tag) + v_i - v_j``: tag ``"x"``
    uses the x-step and ``"t"`` the t-step.  Raises :class:`GradingError`
    when no grading with positive steps and positive dependent weights
    exists.
    """
    space: JetSpace = system.space
    dep_index = {dep: k for k, dep in enumerate(space.dependents)}
    size = None
    for m in matrices.values():
        n = m.even_size + m.odd_size
        if size is None:
            size = n
        elif size != n:
            raise GradingError("matrices of different sizes")

    rows: dict = {}
    rhs: dict = {}
    row_count = itertools.count()

    def equation(combo: dict, target: dict, rhs_value: int = 0):
        expr: dict = {}
        for key, value in combo.items():
            expr[key] = expr.get(key, 0) + value
        for key, value in target.items():
            expr[key] = expr.get(key, 0) - value
        expr = {k: v for k, v in expr.items() if v}
        if not expr:
            if rhs_value:
                raise GradingError("inconsistent homogeneity constraint")
            return
        signature = tuple(sorted(expr.items())) + (("#rhs", rhs_value),)
        if signature in rows:
            return
        rows[signature] = (next(row_count), expr, rhs_value)

    # system right-hand sides: weight(dep) + tau
    for dep, f in system.rhs.items():
        target = {f"dep:{dep_index[dep]}": 1, "tau": 1}
        for m in f.terms:
            equation(_monomial_combo(m, space, parameter, dep_index), target)

    # matrix entries: step + v_i - v_j
    for tag, matrix in matrices.items():
        step_key = "s" if tag == "x" else "tau"
        for i in range(size):
            for j in range(size):
                entry = matrix.rows[i][j]
                if entry.is_zero():
                    continue
                target = {step_key: 1, f"v{i}": 1, f"v{j}": -1}
                for m in entry.terms:
                    equation(
                        _monomial_combo(m, space, parameter, dep_index), target
                    )

    # gauge fixing: doubled scale s = 2 (so half-integer weights stay
    # integral), and the first potential pinned to zero.
    equation({"s": 1}, {}, 2)
    equation({"v0": 1}, {}, 0)

    columns: dict = {}
    for signature, (rid, expr, rhs_value) in rows.items():
        for key, value in expr.items():
            columns.setdefault(key, {})[rid] = GaussianRational(value)
        if rhs_value:
            rhs[rid] = GaussianRational(rhs_value)

    outcome = solve_sparse(columns, rhs)
    if not outcome.is_solution:
        raise GradingError(
            "the family is not weight-homogeneous: the homogeneity "
            "constraints are inconsistent"
        )

    def value(key: str) -> Fraction:
        got = outcome.particular.get(key)
        return _fraction(got) if got is not None else Fraction(0)

    dep_weights = {
        dep: value(f"dep:{k}") for dep, k in dep_index.items()
    }
    grading = WeightGrading(
        system=system,
        parameter=parameter,
        dep_weights=dep_weights,
        x_step=value("s"),
        t_step=value("tau"),
        param_weight=value("p"),
        potentials=tuple(value(f"v{i}") for i in range(size)),
    )
    if grading.x_step <= 0 or grading.t_step <= 0:
        raise GradingError("grading found, but a derivative step is not positive")
    for dep, w in dep_weights.items():
        if w <= 0:
            raise GradingError(
                f"grading found, but dependent {dep.name} has non-positive "
                f"weight {w}; finite class bases are not guaranteed"
            )
    return grading


# ---------------------------------------------------------------------------
# weighted monomial enumeration
# ---------------------------------------------------------------------------


def weighted_monomials(
    pool: list,
    target: Fraction,
    *,
    parity: int,
    max_grassmann: int,
    parameter: Variable | None,
    param_weight: Fraction,
    param_exponents,
) -> list:
    """All monomials of exact weight ``target`` and given parity.

    ``pool`` is a list of (variable, weight) with strictly positive
    weights; the parameter exponent ranges over ``param_exponents``.
    Returns single-term, coefficient-one :class:`GradedPoly` values.
    """
    for v, w in pool:
        if w <= 0:
            raise GradingError(
                f"enumeration pool variable {v.name} has non-positive weight"
            )
    ordered = sorted(pool, key=lambda vw: (-vw[1], vw[0].key))
    out = []

    def emit(evens, odds, exponent):
        factors = []
        if parameter is not None and exponent:
            factors.append((parameter, exponent))
        factors.extend(evens)
        factors.sort(key=lambda ve: ve[0].key)
        m = Monomial(tuple(factors), tuple(sorted(odds, key=lambda v: v.key)))
        if m.parity == parity:
            out.append(GradedPoly.term(m, GaussianRational(1)))

    def rec(idx, remaining, evens, odds, grassmann_left, exponent):
        if remaining == 0:
            emit(evens, odds, exponent)
            return
        if remaining < 0 or idx >= len(ordered):
            return
        v, w = ordered[idx]
        if v.parity:
            if grassmann_left > 0:
                rec(idx + 1, remaining - w, evens, odds + [v],
                    grassmann_left - 1, exponent)
            rec(idx + 1, remaining, evens, odds, grassmann_left, exponent)
        else:
            max_e = int(remaining / w)
            for e in range(max_e, 0, -1):
                rec(idx + 1, remaining - e * w, evens + [(v, e)], odds,
                    grassmann_left, exponent)
            rec(idx + 1, remaining, evens, odds, grassmann_left, exponent)

    exponents = list(param_exponents) if parameter is not None else [0]
    for exponent in exponents:
        remaining = target - exponent * param_weight
        rec(0, remaining, [], [], max_grassmann, exponent)
    out.sort(key=lambda p: next(iter(p.terms)).sort_key())
    return out


def degree_bounded_monomials(
    pool: list,
    *,
    parity: int,
    max_grassmann: int,
    even_degree_bound: int,
    parameter: Variable | None,
    param_exponents,
) -> list:
    """All monomials with bounded total even-jet degree and Grassmann degree.

    The fallback basis when no weight grading is available; ``pool`` is a
    plain list of variables.
    """
    evens = [v for v in pool if not v.parity]
    odds = [v for v in pool if v.parity]
    out = []
    seen = set()
    for g in range(0, max_grassmann + 1):
        for odd_combo in itertools.combinations(sorted(odds, key=lambda v: v.key), g):
            for even_combo in _bounded_exponents(evens, even_degree_bound):
                for exponent in (list(param_exponents) if parameter else [0]):
                    factors = list(even_combo)
                    if parameter is not None and exponent:
                        factors.append((parameter, exponent))
                    factors.sort(key=lambda ve: ve[0].key)
                    m = Monomial(tuple(factors), odd_combo)
                    if m.parity != parity or m in seen:
                        continue
                    seen.add(m)
                    out.append(GradedPoly.term(m, GaussianRational(1)))
    out.sort(key=lambda p: next(iter(p.terms)).sort_key())
    return out


def _bounded_exponents(variables: list, bound: int):
    """Exponent assignments with total degree <= bound (as factor tuples)."""
    variables = sorted(variables, key=lambda v: v.key)

    def rec(idx, budget):
        if idx >= len(variables):
            yield ()
            return
        v = variables[idx]
        for e in range(0, budget + 1):
            head = ((v, e),) if e else ()
            for tail in rec(idx + 1, budget - e):
                yield head + tail

    yield from rec(0, bound)
