"""Nonlocal coverings of graded evolutionary systems.

A :class:`Covering` extends a system's total derivatives to new
(nonlocal) coordinates by declaring their x- and t-flows; the extension
is consistent exactly when :meth:`Covering.flatness_residual` vanishes.

Matrix families act on coverings through the projective substitution
:func:`projective_rep`: a square matrix g of block signature (k0|k1)
yields a vertical vector field on k0-1 even and k1 odd nonlocal
coordinates, by right-multiplying the row vector (mu, w..., f...) and
projecting along the affine chart of scale mu.  Scalar matrices act
trivially.  :func:`covering_from_zcr` packages the fields of -A and -B
as covering flows.

For one-parameter families of coverings, :func:`fn_structure_residual`
evaluates the structure equation that couples the parameter derivative
of the flows to a generator given by a shadow (its components on the
dependents) plus completion components on the nonlocals, all in
verticalized form.  :func:`solve_fn_completion` fills in unknown
completion components by an exact linear solve.
"""

from __future__ import annotations

from dataclasses import dataclass

from .superscalar import (
    GaussianRational,
    GradedPoly,
    Variable,
    VarKind,
    even_partial,
    gaussian,
    partial_left,
    substitute,
)
from .jets import EvolutionarySystem, JetSpace
from .liesuper import SuperMatrix, supercommutator
from .linsolve import check_solution, check_witness, solve_sparse
from .weights import degree_bounded_monomials


class CoveringError(ValueError):
    """A covering or shadow violates the structural rules of this module."""


# ---------------------------------------------------------------------------
# coverings
# ---------------------------------------------------------------------------


class Covering:
    """An extension of a system by nonlocal coordinates with declared flows."""

    __slots__ = ("system", "nonlocals", "flows", "parameter", "name")

    def __init__(
        self,
        system: EvolutionarySystem,
        nonlocals,
        flows: dict,
        parameter: Variable | None = None,
        *,
        name: str | None = None,
        check: bool = True,
    ):
        self.system = system
        self.nonlocals = tuple(nonlocals)
        self.flows = dict(flows)
        self.parameter = parameter
        self.name = name
        if check:
            self._validate()

    def _validate(self):
        space = self.system.space
        seen = set()
        for v in self.nonlocals:
            if v.kind not in (VarKind.EVEN_NONLOCAL, VarKind.ODD_NONLOCAL):
                raise CoveringError(f"{v.name} is not a nonlocal variable")
            if v in seen:
                raise CoveringError(f"duplicate nonlocal {v.name}")
            seen.add(v)
        for v in self.nonlocals:
            for tag in ("x", "t"):
                if (v, tag) not in self.flows:
                    raise CoveringError(f"missing {tag}-flow for {v.name}")
        for (v, tag), flow in self.flows.items():
            if v not in seen or tag not in ("x", "t"):
                raise CoveringError(f"stray flow entry ({v}, {tag})")
            if not flow.is_zero() and flow.parity() != v.parity:
                raise CoveringError(
                    f"{tag}-flow of {v.name} has the wrong parity"
                )
            for u in flow.variables():
                if u.is_jet:
                    base, _ = JetSpace.base_and_order(u)
                    if space._by_name.get(base.name) is not base:
                        raise CoveringError(
                            f"flow of {v.name} uses the foreign jet {u.name}"
                        )
                elif u not in seen and u is not self.parameter and \
                        u is not space.x and u is not space.t:
                    raise CoveringError(
                        f"flow of {v.name} uses the unknown variable {u.name}"
                    )

    def flow(self, v: Variable, tag: str) -> GradedPoly:
        return self.flows[(v, tag)]

    def _apply_rule(self, p: GradedPoly, rule) -> GradedPoly:
        out = GradedPoly.zero()
        for v in p.variables():
            dv = rule(v)
            if dv.is_zero():
                continue
            out = out + dv * partial_left(p, v)
        return out

    def dtilde_x(self, p: GradedPoly) -> GradedPoly:
        """The extended total x-derivative."""

        def rule(v: Variable) -> GradedPoly:
            flow = self.flows.get((v, "x"))
            if flow is not None:
                return flow
            return self.system.space.derivative_of_variable(v)

        return self._apply_rule(p, rule)

    def dtilde_t(self, p: GradedPoly) -> GradedPoly:
        """The extended total t-derivative."""

        def rule(v: Variable) -> GradedPoly:
            flow = self.flows.get((v, "t"))
            if flow is not None:
                return flow
            return self.system.derivative_of_variable_t(v)

        return self._apply_rule(p, rule)

    def dtilde(self, tag: str):
        return self.dtilde_x if tag == "x" else self.dtilde_t

    def flatness_residual(self) -> dict:
        """Per nonlocal, the mixed-derivative defect
        dtilde_x(t-flow) - dtilde_t(x-flow); the covering is consistent
        when every component vanishes on the equation manifold.
        """
        out = {}
        for v in self.nonlocals:
            out[v] = self.dtilde_x(self.flow(v, "t")) - self.dtilde_t(
                self.flow(v, "x")
            )
        return out

    def is_flat(self) -> bool:
        return all(r.is_zero() for r in self.flatness_residual().values())

    def substitute_parameter(self, value) -> "Covering":
        """The member covering at a fixed parameter value."""
        if self.parameter is None:
            raise CoveringError("covering has no parameter")
        binding = {self.parameter: value}
        flows = {
            key: substitute(flow, binding) for key, flow in self.flows.items()
        }
        return Covering(
            self.system,
            self.nonlocals,
            flows,
            None,
            name=self.name,
            check=False,
        )

    def __repr__(self):
        names = ", ".join(v.name for v in self.nonlocals)
        return f"Covering(system={self.system.name!r}, nonlocals=[{names}])"


def flatness_residual(covering: Covering) -> dict:
    """Functional alias for :meth:`Covering.flatness_residual`."""
    return covering.flatness_residual()


# ---------------------------------------------------------------------------
# vertical fields and the projective substitution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VerticalField:
    """A derivation along nonlocal coordinates only.

    ``components[v]`` is the value on the coordinate v; the field acts on
    polynomials by the graded Leibniz rule with left coefficients and
    ignores jets, base variables and parameters (they are constants for
    the vertical direction).
    """

    components: dict
    parity: int = 0

    def apply(self, p: GradedPoly) -> GradedPoly:
        out = GradedPoly.zero()
        for v, value in self.components.items():
            if value.is_zero():
                continue
            d = partial_left(p, v)
            if d.is_zero():
                continue
            out = out + value * d
        return out

    def __add__(self, other: "VerticalField") -> "VerticalField":
        if self.parity != other.parity and self.components and other.components:
            raise CoveringError("adding vertical fields of different parity")
        keys = set(self.components) | set(other.components)
        comps = {}
        for v in keys:
            comps[v] = self.components.get(
                v, GradedPoly.zero()
            ) + other.components.get(v, GradedPoly.zero())
        return VerticalField(comps, self.parity or other.parity)

    def __sub__(self, other: "VerticalField") -> "VerticalField":
        return self + (-other)

    def __neg__(self) -> "VerticalField":
        return VerticalField(
            {v: -value for v, value in self.components.items()}, self.parity
        )

    def is_zero(self) -> bool:
        return all(value.is_zero() for value in self.components.values())

    def __eq__(self, other):
        if not isinstance(other, VerticalField):
            return NotImplemented
        keys = set(self.components) | set(other.components)
        return all(
            self.components.get(v, GradedPoly.zero())
            == other.components.get(v, GradedPoly.zero())
            for v in keys
        )

    def commutator(self, other: "VerticalField") -> "VerticalField":
        """[X, Y] = X Y - (-1)^{|X||Y|} Y X on every coordinate."""
        both_odd = bool(self.parity and other.parity)
        keys = set(self.components) | set(other.components)
        comps = {}
        for v in keys:
            first = self.apply(other.components.get(v, GradedPoly.zero()))
            second = other.apply(self.components.get(v, GradedPoly.zero()))
            comps[v] = first + second if both_odd else first - second
        return VerticalField(comps, (self.parity + other.parity) & 1)


def projective_rep(
    g: SuperMatrix, nonlocals, mu=1
) -> VerticalField:
    """The vertical field of g on the affine chart of scale ``mu``.

    The nonlocals must list k0-1 even then k1 odd coordinates for a
    matrix of signature (k0|k1).  The row vector (mu, evens..., odds...)
    is right-multiplied by g and projected back to the chart; scalar
    matrices map to the zero field.
    """
    nonlocals = tuple(nonlocals)
    k0, k1 = g.signature
    if len(nonlocals) != k0 - 1 + k1:
        raise CoveringError(
            f"signature ({k0}|{k1}) needs {k0 - 1} even and {k1} odd "
            f"nonlocals, got {len(nonlocals)}"
        )
    for slot, v in enumerate(nonlocals, start=1):
        expected = 0 if slot < k0 else 1
        if v.parity != expected:
            raise CoveringError(
                f"nonlocal {v.name} in slot {slot} must be "
                f"{'even' if expected == 0 else 'odd'}"
            )
    mu_value = gaussian(mu) if not isinstance(mu, GaussianRational) else mu
    if not mu_value:
        raise CoveringError("chart scale mu must be invertible")
    mu_poly = GradedPoly.scalar(mu_value)
    mu_inv = GradedPoly.scalar(mu_value.inverse())

    coords = [mu_poly] + [GradedPoly.variable(v) for v in nonlocals]
    size = g.size
    products = []
    for j in range(size):
        acc = GradedPoly.zero()
        for m in range(size):
            entry = g.rows[m][j]
            if not entry.is_zero():
                acc = acc + coords[m] * entry
        products.append(acc)

    components = {}
    for m, v in enumerate(nonlocals, start=1):
        components[v] = products[m] - coords[m] * mu_inv * products[0]
    return VerticalField(components, g.homogeneous_parity(zero_parity=0))


def covering_from_zcr(
    family, nonlocals, mu=1, *, name: str | None = None
) -> Covering:
    """The covering whose flows are the fields of -A and -B."""
    field_a = projective_rep(family.a_matrix, nonlocals, mu)
    field_b = projective_rep(family.b_matrix, nonlocals, mu)
    flows = {}
    for v in nonlocals:
        flows[(v, "x")] = -field_a.components[v]
        flows[(v, "t")] = -field_b.components[v]
    return Covering(
        family.system,
        nonlocals,
        flows,
        family.parameter,
        name=name,
    )


# ---------------------------------------------------------------------------
# shadows and the structure equation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShadowData:
    """A generator in display form: base parts, shadow, completion.

    ``base_x``/``base_t`` are the coefficients of the two base
    derivatives; ``omega[dep]`` are the components on the dependents and
    ``phi[v]`` those on the nonlocals (``None`` marks a component that
    is not yet known).
    """

    covering: Covering
    base_x: GradedPoly
    base_t: GradedPoly
    omega: dict
    phi: dict

    def verticalize(self) -> "VerticalShadow":
        """Subtract the base parts:  component - a*(x-flow) - b*(t-flow)."""
        cov = self.covering
        a, b = self.base_x, self.base_t
        omega_v = {}
        for dep in cov.system.space.dependents:
            value = self.omega.get(dep, GradedPoly.zero())
            omega_v[dep] = (
                value
                - a * GradedPoly.variable(cov.system.space.jet(dep, 1))
                - b * cov.system.rhs[dep]
            )
        phi_v = {}
        for v in cov.nonlocals:
            value = self.phi.get(v)
            if value is None:
                phi_v[v] = None
            else:
                phi_v[v] = value - a * cov.flow(v, "x") - b * cov.flow(v, "t")
        return VerticalShadow(cov, omega_v, phi_v)


@dataclass(frozen=True)
class VerticalShadow:
    """A verticalized generator: components on dependents and nonlocals."""

    covering: Covering
    omega: dict
    phi: dict

    @property
    def has_unknown(self) -> bool:
        return any(value is None for value in self.phi.values())

    def with_phi(self, solved: dict) -> "VerticalShadow":
        phi = dict(self.phi)
        for v, value in solved.items():
            if self.phi.get(v) is not None:
                raise CoveringError(
                    f"component for {v.name} is already known"
                )
            phi[v] = value
        return VerticalShadow(self.covering, dict(self.omega), phi)

    def nonlocal_field(self) -> VerticalField:
        if self.has_unknown:
            raise CoveringError("shadow has unknown completion components")
        return VerticalField(dict(self.phi), 0)


def _omega_prolongations(shadow: VerticalShadow) -> dict:
    """Cache-backed access to extended-derivative prolongations of omega."""
    cov = shadow.covering
    cache: dict = {}

    def get(dep: Variable, order: int) -> GradedPoly:
        key = (dep, order)
        if key not in cache:
            if order == 0:
                cache[key] = shadow.omega.get(dep, GradedPoly.zero())
            else:
                cache[key] = cov.dtilde_x(get(dep, order - 1))
        return cache[key]

    return get


def fn_structure_residual(shadow: VerticalShadow) -> dict:
    """The structure-equation residual of a vertical generator.

    For each nonlocal v and each derivative tag:

        residual(v) = d(flow)/d(parameter) + Dtag~(phi[v])
                      - sum_u phi[u] * d^L(flow)/d(u)
                      - sum_{k, n} omega_n[k] * d^L(flow)/d(jet(k, n))

    with omega_n[k] the n-th extended x-prolongation of omega[k].  The
    parametric family of coverings is compatible with the generator
    exactly when every component vanishes.
    """
    cov = shadow.covering
    if cov.parameter is None:
        raise CoveringError("structure equation needs a parametric covering")
    if shadow.has_unknown:
        raise CoveringError(
            "structure equation needs all completion components; solve or "
            "supply the unknown ones first"
        )
    omega_ext = _omega_prolongations(shadow)
    out = {}
    for v in cov.nonlocals:
        for tag in ("x", "t"):
            flow = cov.flow(v, tag)
            res = even_partial(flow, cov.parameter)
            res = res + cov.dtilde(tag)(shadow.phi[v])
            for u in cov.nonlocals:
                d = partial_left(flow, u)
                if not d.is_zero():
                    res = res - shadow.phi[u] * d
            for w in sorted(
                (w for w in flow.variables() if w.is_jet),
                key=lambda w: w.key,
            ):
                base, order = JetSpace.base_and_order(w)
                d = partial_left(flow, w)
                if not d.is_zero():
                    res = res - omega_ext(base, order) * d
            out[(v, tag)] = res
    return out


def shadow_from_gmatrix(
    covering: Covering, q_matrix: SuperMatrix, mu=1
) -> VerticalShadow:
    """The vertical generator induced by an even matrix: phi = field of Q."""
    fld = projective_rep(q_matrix, covering.nonlocals, mu)
    omega = {
        dep: GradedPoly.zero() for dep in covering.system.space.dependents
    }
    return VerticalShadow(covering, omega, dict(fld.components))


# ---------------------------------------------------------------------------
# completion solver
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CompletionAnsatz:
    """Search space for unknown completion components.

    Monomials draw on jets up to ``max_jet_order``, the covering's
    nonlocals, and the base variables x, t up to joint degree
    ``base_degree``; ``even_degree_bound`` caps the total degree across
    all even factors and ``max_grassmann_degree`` the number of odd
    factors; parameter exponents run over ``param_exponent_range``.
    """

    max_jet_order: int = 2
    max_grassmann_degree: int = 2
    even_degree_bound: int = 3
    base_degree: int = 1
    param_exponent_range: tuple = (-2, 1)

    def describe(self, parameter: Variable | None) -> str:
        window = (
            f"{parameter.name}-exponents in "
            f"[{self.param_exponent_range[0]}, {self.param_exponent_range[1]}]"
            if parameter is not None
            else "no parameter"
        )
        return (
            f"jet order <= {self.max_jet_order}, Grassmann degree <= "
            f"{self.max_grassmann_degree}, total even degree <= "
            f"{self.even_degree_bound}, base degree <= {self.base_degree}, "
            f"{window}"
        )


class CompletionInfeasibleError(RuntimeError):
    """No completion exists within the stated ansatz (exact certificate)."""

    def __init__(self, message: str, witness: dict):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class CompletionInfo:
    """How a completion was found: basis size and solution-space dimension."""

    basis_size: int
    dimension: int
    scope: str


def _completion_basis(
    covering: Covering, parity: int, ansatz: CompletionAnsatz
) -> list:
    space = covering.system.space
    pool = []
    for dep in space.dependents:
        for order in range(ansatz.max_jet_order + 1):
            pool.append(space.jet(dep, order))
    pool.extend(covering.nonlocals)
    pool.extend([space.x, space.t])
    exponents = (
        range(
            ansatz.param_exponent_range[0], ansatz.param_exponent_range[1] + 1
        )
        if covering.parameter is not None
        else [0]
    )
    candidates = degree_bounded_monomials(
        pool,
        parity=parity,
        max_grassmann=ansatz.max_grassmann_degree,
        even_degree_bound=ansatz.even_degree_bound,
        parameter=covering.parameter,
        param_exponents=exponents,
    )
    x, t = space.x, space.t
    out = []
    for poly in candidates:
        (m, _), = poly.terms.items()
        if m.even_exponent(x) + m.even_exponent(t) <= ansatz.base_degree:
            out.append(poly)
    return out


def _flatten_components(values: dict) -> dict:
    rows = {}
    for key, poly in values.items():
        for mono, coeff in poly.terms.items():
            rows[key + (mono,)] = coeff
    return rows


def _completion_column(
    covering: Covering, u: Variable, poly: GradedPoly
) -> dict:
    """Rows contributed by setting the completion component of u to poly."""
    cells = {}
    for v in covering.nonlocals:
        for tag in ("x", "t"):
            flow = covering.flow(v, tag)
            value = GradedPoly.zero()
            if v is u:
                value = value + covering.dtilde(tag)(poly)
            d = partial_left(flow, u)
            if not d.is_zero():
                value = value - poly * d
            if not value.is_zero():
                cells[(v, tag)] = value
    return _flatten_components(cells)


def solve_fn_completion(
    shadow: VerticalShadow, ansatz: CompletionAnsatz
) -> tuple:
    """Fill in the unknown completion components by an exact linear solve.

    Returns ``(completed_shadow, info)``; the completed shadow is
    re-verified against :func:`fn_structure_residual` before being
    returned.  Raises :class:`CompletionInfeasibleError` (with a
    re-checked Farkas witness) when the ansatz admits no completion.
    """
    cov = shadow.covering
    unknowns = [v for v, value in shadow.phi.items() if value is None]
    if not unknowns:
        raise CoveringError("shadow has no unknown components to solve for")
    unknowns.sort(key=lambda v: v.key)

    # inhomogeneous part: residual with unknown components set to zero
    zeroed = shadow.with_phi({u: GradedPoly.zero() for u in unknowns})
    base_residual = fn_structure_residual(zeroed)
    rhs = {
        key: -coeff
        for key, coeff in _flatten_components(base_residual).items()
    }

    columns = {}
    basis = {}
    for u in unknowns:
        for poly in _completion_basis(cov, u.parity, ansatz):
            key = (u.name, len(basis))
            basis[key] = (u, poly)
            columns[key] = _completion_column(cov, u, poly)

    outcome = solve_sparse(columns, rhs)
    if not outcome.is_solution:
        if not check_witness(columns.values(), rhs, outcome.witness):
            raise CoveringError(
                "completion infeasibility witness failed its re-check"
            )
        raise CompletionInfeasibleError(
            f"no completion within the ansatz "
            f"({ansatz.describe(cov.parameter)}); basis size {len(basis)}",
            dict(outcome.witness),
        )
    if not check_solution(columns, rhs, outcome.particular):
        raise CoveringError("completion solve failed its linear re-check")

    solved = {u: GradedPoly.zero() for u in unknowns}
    for key, coeff in outcome.particular.items():
        u, poly = basis[key]
        solved[u] = solved[u] + coeff * poly
    completed = shadow.with_phi(solved)
    residual = fn_structure_residual(completed)
    if any(not value.is_zero() for value in residual.values()):
        raise CoveringError("completion failed exact re-verification")
    info = CompletionInfo(
        basis_size=len(basis),
        dimension=len(outcome.nullspace),
        scope=ansatz.describe(cov.parameter),
    )
    return completed, info


# ---------------------------------------------------------------------------
# the compatibility diagram for matrix actions
# ---------------------------------------------------------------------------


def diagram_check(
    family, gamma: SuperMatrix, nonlocals, mu=1
) -> bool:
    """Both routes around the action square agree, for each derivative.

    Route one maps the covariant derivative  D(gamma) - [M, gamma]  to a
    vertical field; route two applies the covering's derivative rule to
    the field of gamma: the entrywise-derivative field plus the
    commutator with the field of -M, where M is A for the x-derivative
    and B for the t-derivative.
    """
    field_gamma = projective_rep(gamma, nonlocals, mu)
    for matrix, derive in (
        (family.a_matrix, family.system.total_x),
        (family.b_matrix, family.system.total_t),
    ):
        d_gamma = gamma.map_entries(derive)
        top = projective_rep(
            d_gamma - supercommutator(matrix, gamma), nonlocals, mu
        )
        minus_field = projective_rep(-matrix, nonlocals, mu)
        bottom = projective_rep(d_gamma, nonlocals, mu) + minus_field.commutator(
            field_gamma
        )
        if top != bottom:
            return False
    return True
