"""Bundled fixtures: the text file format, its loaders, and the key registry.

File format (UTF-8, line oriented)
----------------------------------
A fixture file is a sequence of header lines, comment lines, blank lines
and statement lines:

* ``# ...``                    -- comment (full line only);
* ``name: value``              -- header; recognised names are listed in
  :data:`HEADER_NAMES`.  ``correction:`` and ``note:`` may repeat;
* ``lhs = expression``         -- statement.  A line that starts with
  whitespace continues the expression of the previous statement.

Statement left-hand sides depend on the fixture kind:

* systems:    ``<dep>_t`` (the evolutionary right-hand side);
* matrices:   ``A[i,j]``, ``B[i,j]``, ``Q[i,j]``, ``S[i,j]`` (1-based,
  missing entries default to zero);
* coverings:  ``<nonlocal>_x`` / ``<nonlocal>_t`` flow lines;
* shadows:    ``base-x``, ``base-t``, ``omega <dependent>``,
  ``phi <nonlocal>`` (the literal expression ``unknown`` marks a
  component that still has to be completed by an ansatz solve).

Registry keys are stable API:

``kdv``, ``kb3``, ``skdv.a4``, ``skdv.das-zcr``, ``skdv.removable-zcr``,
``kdv.gardner``, ``kb3.cover``, ``skdv.cover11`` --- plus the auxiliary
keys ``skdv.a`` (symbolic coupling), ``skdv.removable-cover`` and the
bundled shadow/completion fixtures.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass
from importlib import resources

from .superscalar import (
    GradedPoly,
    Variable,
    nonlocal_variable,
    parameter,
)
from .exprtext import ParseError, parse_expression
from .jets import (
    EvolutionarySystem,
    JetSpace,
    SystemScope,
    expand_superfield,
    skdv_superfield,
)
from .liesuper import SuperMatrix
from . import zcr as _zcr
from . import coverings as _coverings

HEADER_NAMES = frozenset(
    {
        "kind",
        "key",
        "title",
        "system",
        "covering",
        "signature",
        "parameter",
        "dependents",
        "nonlocals",
        "origin",
        "correction",
        "note",
        "ansatz",
    }
)

_STMT_RE = re.compile(r"^(?P<lhs>[^=]+?)\s*=\s*(?P<rhs>.*)$")
_MATRIX_LHS_RE = re.compile(r"^([A-Z])\[(\d+),(\d+)\]$")
_CORRECTION_RE = re.compile(
    r"^([A-Z])\[(\d+),(\d+)\]\s+term\s+(.+?)\s*->\s*(.+)$"
)


class FixtureError(ValueError):
    """A fixture file is malformed or internally inconsistent."""


# ---------------------------------------------------------------------------
# raw file parsing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Statement:
    lhs: str
    rhs: str
    lineno: int


@dataclass(frozen=True)
class FixtureDoc:
    name: str
    headers: dict
    repeats: dict
    statements: tuple

    def header(self, name: str, default: str | None = None) -> str | None:
        return self.headers.get(name, default)

    def require(self, name: str) -> str:
        value = self.headers.get(name)
        if value is None:
            raise FixtureError(f"{self.name}: missing header '{name}:'")
        return value


def parse_fixture_text(text: str, name: str = "<fixture>") -> FixtureDoc:
    headers: dict = {}
    repeats: dict = {"correction": [], "note": []}
    statements: list[Statement] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if not line or line.lstrip().startswith("#"):
            continue
        if line[0] in " \t":
            if not statements:
                raise FixtureError(
                    f"{name}:{lineno}: continuation line without a statement"
                )
            last = statements[-1]
            statements[-1] = Statement(
                last.lhs, last.rhs + " " + line.strip(), last.lineno
            )
            continue
        if ":" in line:
            head, _, tail = line.partition(":")
            if head.strip() in HEADER_NAMES and (
                "=" not in head
            ):
                key = head.strip()
                value = tail.strip()
                if key in repeats:
                    repeats[key].append(value)
                elif key in headers:
                    raise FixtureError(
                        f"{name}:{lineno}: duplicate header '{key}:'"
                    )
                else:
                    headers[key] = value
                continue
        match = _STMT_RE.match(line)
        if match is None:
            raise FixtureError(f"{name}:{lineno}: cannot parse line: {line!r}")
        statements.append(
            Statement(match.group("lhs").strip(), match.group("rhs"), lineno)
        )
    return FixtureDoc(name, headers, repeats, tuple(statements))


def _parse_named_parity_list(text: str, name: str) -> tuple:
    out = []
    for chunk in text.replace(",", " ").split():
        if ":" not in chunk:
            raise FixtureError(f"{name}: expected 'name:parity', got {chunk!r}")
        var_name, _, parity_text = chunk.partition(":")
        if parity_text == "even":
            parity = 0
        elif parity_text == "odd":
            parity = 1
        else:
            raise FixtureError(
                f"{name}: parity must be 'even' or 'odd', got {parity_text!r}"
            )
        out.append((var_name, parity))
    return tuple(out)


def _parse_expr(doc: FixtureDoc, stmt: Statement, scope) -> GradedPoly:
    try:
        return parse_expression(stmt.rhs, scope)
    except ParseError as exc:
        raise FixtureError(
            f"{doc.name}:{stmt.lineno}: in '{stmt.lhs}': {exc}"
        ) from exc
    except KeyError as exc:
        raise FixtureError(
            f"{doc.name}:{stmt.lineno}: in '{stmt.lhs}': unknown name {exc}"
        ) from exc


# ---------------------------------------------------------------------------
# fixture records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CorrectionRecord:
    """A single recorded single-term fix for a shipped matrix entry.

    ``old_text``/``new_text`` are expression texts; applying the record
    replaces the (unique) occurrence of the old term sum by the new one
    in entry ``(i, j)`` of matrix ``matrix``.
    """

    matrix: str
    i: int
    j: int
    old_text: str
    new_text: str

    def describe(self) -> str:
        return (
            f"{self.matrix}[{self.i},{self.j}] "
            f"term {self.old_text} -> {self.new_text}"
        )

    def apply(self, entry: GradedPoly, scope) -> GradedPoly:
        old = parse_expression(self.old_text, scope)
        new = parse_expression(self.new_text, scope)
        before = len(entry.terms)
        removed = entry - old
        if len(removed.terms) >= before:
            raise FixtureError(
                f"correction {self.describe()}: term not present in entry"
            )
        return removed + new


@dataclass(frozen=True)
class ZCRFixture:
    key: str
    title: str
    system: EvolutionarySystem
    parameter: Variable
    a_matrix: SuperMatrix
    b_matrix: SuperMatrix
    q_matrix: SuperMatrix | None
    s_matrix: SuperMatrix | None
    nonlocals: tuple
    corrections: tuple
    notes: tuple
    _scope: object

    def family(self, corrected: bool = False) -> "_zcr.ZCRFamily":
        """The matrix family; ``corrected=True`` applies recorded fixes."""
        a, b = self.a_matrix, self.b_matrix
        if corrected:
            for record in self.corrections:
                target = a if record.matrix == "A" else b
                entry = target.rows[record.i - 1][record.j - 1]
                fixed = record.apply(entry, self._scope)
                rows = [list(row) for row in target.rows]
                rows[record.i - 1][record.j - 1] = fixed
                target = SuperMatrix(target.even_size, target.odd_size, rows)
                if record.matrix == "A":
                    a = target
                else:
                    b = target
        return _zcr.ZCRFamily(self.system, a, b, self.parameter)


@dataclass(frozen=True)
class CoveringFixture:
    key: str
    title: str
    covering: "_coverings.Covering"
    origin: str | None


@dataclass(frozen=True)
class ShadowFixture:
    key: str
    title: str
    covering_key: str
    covering: "_coverings.Covering"
    shadow: "_coverings.ShadowData"
    origin: str | None


# ---------------------------------------------------------------------------
# the registry
# ---------------------------------------------------------------------------


class Registry:
    """Lazy, cached access to the bundled fixtures by stable key."""

    def __init__(self):
        self._lock = threading.RLock()
        self._paths: dict | None = None
        self._systems: dict = {}
        self._zcrs: dict = {}
        self._coverings: dict = {}
        self._shadows: dict = {}
        self._parameters: dict = {}
        self._nonlocals: dict = {}

    # -- file discovery ----------------------------------------------------

    def _scan(self) -> dict:
        with self._lock:
            if self._paths is None:
                paths: dict = {}
                data_dir = resources.files(__package__) / "data"
                for entry in sorted(data_dir.iterdir(), key=lambda e: e.name):
                    if not entry.name.endswith(".txt"):
                        continue
                    doc = parse_fixture_text(entry.read_text("utf-8"), entry.name)
                    kind = doc.require("kind")
                    key = doc.require("key")
                    if (kind, key) in paths:
                        raise FixtureError(
                            f"duplicate fixture key {key!r} for kind {kind!r}"
                        )
                    paths[(kind, key)] = doc
                self._paths = paths
            return self._paths

    def _doc(self, kind: str, key: str) -> FixtureDoc:
        doc = self._scan().get((kind, key))
        if doc is None:
            known = ", ".join(
                sorted(k for (kd, k) in self._scan() if kd == kind)
            )
            raise KeyError(f"unknown {kind} fixture {key!r} (have: {known})")
        return doc

    def keys(self) -> tuple:
        """All registered keys as (kind, key) pairs, built-ins included."""
        built_in = [("system", "skdv.a4"), ("system", "skdv.a")]
        file_keys = list(self._scan().keys())
        return tuple(sorted(built_in + file_keys))

    # -- shared symbols ----------------------------------------------------

    def _parameter(self, name: str, invertible: bool) -> Variable:
        with self._lock:
            existing = self._parameters.get(name)
            if existing is not None:
                if existing.invertible != invertible:
                    raise FixtureError(
                        f"parameter {name!r} redeclared with different "
                        f"invertibility"
                    )
                return existing
            var = parameter(name, invertible=invertible)
            self._parameters[name] = var
            return var

    def _parse_parameter_header(self, doc: FixtureDoc) -> Variable:
        text = doc.require("parameter")
        parts = text.split()
        if not parts or len(parts) > 2:
            raise FixtureError(f"{doc.name}: bad parameter header {text!r}")
        invertible = len(parts) == 2
        if invertible and parts[1] != "invertible":
            raise FixtureError(f"{doc.name}: bad parameter flag {parts[1]!r}")
        return self._parameter(parts[0], invertible)

    def _nonlocal(self, name: str, parity: int) -> Variable:
        with self._lock:
            existing = self._nonlocals.get(name)
            if existing is not None:
                if existing.parity != parity:
                    raise FixtureError(
                        f"nonlocal {name!r} redeclared with different parity"
                    )
                return existing
            var = nonlocal_variable(name, odd=bool(parity))
            self._nonlocals[name] = var
            return var

    def _nonlocals_from_header(self, doc: FixtureDoc) -> tuple:
        return tuple(
            self._nonlocal(name, parity)
            for name, parity in _parse_named_parity_list(
                doc.require("nonlocals"), doc.name
            )
        )

    # -- systems -------------------------------------------------------------

    def system(self, key: str) -> EvolutionarySystem:
        with self._lock:
            cached = self._systems.get(key)
            if cached is not None:
                return cached
            if key == "skdv.a4":
                system = expand_superfield(skdv_superfield(4))
            elif key == "skdv.a":
                system = expand_superfield(skdv_superfield(None))
            else:
                system = self._system_from_doc(self._doc("system", key))
            self._systems[key] = system
            return system

    def _system_from_doc(self, doc: FixtureDoc) -> EvolutionarySystem:
        deps = _parse_named_parity_list(doc.require("dependents"), doc.name)
        space = JetSpace(deps)
        scope = SystemScope(None, space=space)
        rhs: dict = {}
        for stmt in doc.statements:
            if not stmt.lhs.endswith("_t"):
                raise FixtureError(
                    f"{doc.name}:{stmt.lineno}: system statements must be "
                    f"'<dependent>_t = ...', got {stmt.lhs!r}"
                )
            dep_name = stmt.lhs[:-2]
            dep = space._by_name.get(dep_name)
            if dep is None:
                raise FixtureError(
                    f"{doc.name}:{stmt.lineno}: unknown dependent {dep_name!r}"
                )
            if dep in rhs:
                raise FixtureError(
                    f"{doc.name}:{stmt.lineno}: duplicate flow for {dep_name!r}"
                )
            rhs[dep] = _parse_expr(doc, stmt, scope)
        return EvolutionarySystem(space, rhs, name=doc.require("key"))

    # -- matrix families -----------------------------------------------------

    def zcr(self, key: str) -> ZCRFixture:
        with self._lock:
            cached = self._zcrs.get(key)
            if cached is not None:
                return cached
            fixture = self._zcr_from_doc(self._doc("zcr", key))
            self._zcrs[key] = fixture
            return fixture

    def _zcr_from_doc(self, doc: FixtureDoc) -> ZCRFixture:
        system = self.system(doc.require("system"))
        param = self._parse_parameter_header(doc)
        signature = doc.require("signature")
        even_text, _, odd_text = signature.partition("|")
        try:
            even_size, odd_size = int(even_text), int(odd_text)
        except ValueError as exc:
            raise FixtureError(
                f"{doc.name}: bad signature {signature!r}"
            ) from exc
        size = even_size + odd_size
        scope = SystemScope(system, extra={param.name: param})
        entries: dict = {}
        for stmt in doc.statements:
            match = _MATRIX_LHS_RE.match(stmt.lhs)
            if match is None:
                raise FixtureError(
                    f"{doc.name}:{stmt.lineno}: expected 'M[i,j] = ...', "
                    f"got {stmt.lhs!r}"
                )
            mat, i, j = match.group(1), int(match.group(2)), int(match.group(3))
            if mat not in ("A", "B", "Q", "S"):
                raise FixtureError(
                    f"{doc.name}:{stmt.lineno}: unknown matrix {mat!r}"
                )
            if not (1 <= i <= size and 1 <= j <= size):
                raise FixtureError(
                    f"{doc.name}:{stmt.lineno}: index out of range for "
                    f"signature {signature}"
                )
            if (mat, i, j) in entries:
                raise FixtureError(
                    f"{doc.name}:{stmt.lineno}: duplicate entry {stmt.lhs!r}"
                )
            entries[(mat, i, j)] = _parse_expr(doc, stmt, scope)

        def build(mat: str) -> SuperMatrix | None:
            if not any(name == mat for (name, _, _) in entries):
                return None
            rows = [
                [
                    entries.get((mat, i, j), GradedPoly.zero())
                    for j in range(1, size + 1)
                ]
                for i in range(1, size + 1)
            ]
            return SuperMatrix(even_size, odd_size, rows)

        a_matrix, b_matrix = build("A"), build("B")
        if a_matrix is None or b_matrix is None:
            raise FixtureError(f"{doc.name}: both A and B matrices are required")
        corrections = []
        for text in doc.repeats["correction"]:
            match = _CORRECTION_RE.match(text)
            if match is None:
                raise FixtureError(
                    f"{doc.name}: bad correction header {text!r}"
                )
            corrections.append(
                CorrectionRecord(
                    match.group(1),
                    int(match.group(2)),
                    int(match.group(3)),
                    match.group(4),
                    match.group(5),
                )
            )
        return ZCRFixture(
            key=doc.require("key"),
            title=doc.header("title", ""),
            system=system,
            parameter=param,
            a_matrix=a_matrix,
            b_matrix=b_matrix,
            q_matrix=build("Q"),
            s_matrix=build("S"),
            nonlocals=(
                self._nonlocals_from_header(doc)
                if doc.header("nonlocals")
                else ()
            ),
            corrections=tuple(corrections),
            notes=tuple(doc.repeats["note"]),
            _scope=scope,
        )

    # -- coverings -----------------------------------------------------------

    def covering(self, key: str) -> CoveringFixture:
        with self._lock:
            cached = self._coverings.get(key)
            if cached is not None:
                return cached
            fixture = self._covering_from_doc(self._doc("covering", key))
            self._coverings[key] = fixture
            return fixture

    def _covering_from_doc(self, doc: FixtureDoc) -> CoveringFixture:
        system = self.system(doc.require("system"))
        param = self._parse_parameter_header(doc)
        nonlocals = self._nonlocals_from_header(doc)
        by_name = {var.name: var for var in nonlocals}
        scope = SystemScope(
            system, extra={param.name: param, **by_name}
        )
        flows: dict = {}
        for stmt in doc.statements:
            if "_" not in stmt.lhs:
                raise FixtureError(
                    f"{doc.name}:{stmt.lineno}: expected '<nonlocal>_x' or "
                    f"'<nonlocal>_t', got {stmt.lhs!r}"
                )
            var_name, _, direction = stmt.lhs.rpartition("_")
            var = by_name.get(var_name)
            if var is None or direction not in ("x", "t"):
                raise FixtureError(
                    f"{doc.name}:{stmt.lineno}: unknown flow {stmt.lhs!r}"
                )
            if (var, direction) in flows:
                raise FixtureError(
                    f"{doc.name}:{stmt.lineno}: duplicate flow {stmt.lhs!r}"
                )
            flows[(var, direction)] = _parse_expr(doc, stmt, scope)
        covering = _coverings.Covering(
            system=system,
            nonlocals=nonlocals,
            flows=flows,
            parameter=param,
            name=doc.require("key"),
        )
        return CoveringFixture(
            key=doc.require("key"),
            title=doc.header("title", ""),
            covering=covering,
            origin=doc.header("origin"),
        )

    # -- shadows ---------------------------------------------------------------

    def shadow(self, key: str) -> ShadowFixture:
        with self._lock:
            cached = self._shadows.get(key)
            if cached is not None:
                return cached
            fixture = self._shadow_from_doc(self._doc("shadow", key))
            self._shadows[key] = fixture
            return fixture

    def _shadow_from_doc(self, doc: FixtureDoc) -> ShadowFixture:
        covering_key = doc.require("covering")
        covering = self.covering(covering_key).covering
        param = self._parse_parameter_header(doc)
        if param is not covering.parameter:
            raise FixtureError(
                f"{doc.name}: shadow parameter {param.name!r} differs from "
                f"the covering parameter"
            )
        by_name = {var.name: var for var in covering.nonlocals}
        dep_by_name = {
            dep.name: dep for dep in covering.system.space.dependents
        }
        scope = SystemScope(
            covering.system, extra={param.name: param, **by_name}
        )
        base_x = base_t = GradedPoly.zero()
        omega: dict = {}
        phi: dict = {}
        for stmt in doc.statements:
            if stmt.lhs == "base-x":
                base_x = _parse_expr(doc, stmt, scope)
                continue
            if stmt.lhs == "base-t":
                base_t = _parse_expr(doc, stmt, scope)
                continue
            head, _, var_name = stmt.lhs.partition(" ")
            var_name = var_name.strip()
            if head == "omega":
                dep = dep_by_name.get(var_name)
                if dep is None:
                    raise FixtureError(
                        f"{doc.name}:{stmt.lineno}: unknown dependent "
                        f"{var_name!r}"
                    )
                omega[dep] = _parse_expr(doc, stmt, scope)
                continue
            if head == "phi":
                var = by_name.get(var_name)
                if var is None:
                    raise FixtureError(
                        f"{doc.name}:{stmt.lineno}: unknown nonlocal "
                        f"{var_name!r}"
                    )
                if stmt.rhs.strip() == "unknown":
                    phi[var] = None
                else:
                    phi[var] = _parse_expr(doc, stmt, scope)
                continue
            raise FixtureError(
                f"{doc.name}:{stmt.lineno}: unknown shadow statement "
                f"{stmt.lhs!r}"
            )
        shadow = _coverings.ShadowData(
            covering=covering,
            base_x=base_x,
            base_t=base_t,
            omega=omega,
            phi=phi,
        )
        return ShadowFixture(
            key=doc.require("key"),
            title=doc.header("title", ""),
            covering_key=covering_key,
            covering=covering,
            shadow=shadow,
            origin=doc.header("origin"),
        )


_default_registry: Registry | None = None
_default_lock = threading.Lock()


def default_registry() -> Registry:
    """The process-wide fixture registry (created on first use)."""
    global _default_registry
    with _default_lock:
        if _default_registry is None:
            _default_registry = Registry()
        return _default_registry
