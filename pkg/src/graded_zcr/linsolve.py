"""Exact sparse linear algebra over the Gaussian rationals.

Systems are given column-wise: ``columns[c]`` maps row keys to
coefficients, and ``rhs`` maps row keys to the target values.  The solver
runs sparse Gauss-Jordan elimination, tracking for every working row the
combination of original rows it came from.  That bookkeeping is what
turns an inconsistent reduction into a checkable certificate: a row that
reduces to ``0 = v`` with ``v != 0`` yields a functional ``y`` with

    y^T column = 0 for every column,   y^T rhs != 0,

i.e. a Farkas witness of infeasibility that can be re-verified directly
against the original data (and against any enlargement of the column set
the caller wants to rule out).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable

from .superscalar import GR_ZERO, GaussianRational

_RHS = ("#rhs#",)  # sentinel column key for the augmented target


@dataclass
class SolveOutcome:
    """Result of an exact linear solve."""

    status: str  # "solution" or "infeasible"
    particular: dict = field(default_factory=dict)
    nullspace: list = field(default_factory=list)
    witness: dict = field(default_factory=dict)
    pivot_columns: list = field(default_factory=list)
    free_columns: list = field(default_factory=list)

    @property
    def is_solution(self) -> bool:
        return self.status == "solution"


def _add_into(target: dict, source: dict, factor: GaussianRational):
    """target += factor * source, dropping cancellations."""
    for k, v in source.items():
        s = target.get(k)
        if s is None:
            val = factor * v
            if val:
                target[k] = val
        else:
            s = s + factor * v
            if s:
                target[k] = s
            else:
                del target[k]


def solve_sparse(columns: dict, rhs: dict) -> SolveOutcome:
    """Solve  sum_c x_c * columns[c] = rhs  exactly.

    Returns a particular solution plus a nullspace basis, or an
    infeasibility witness.  Deterministic for a fixed input ordering.
    """
    # assemble row-major augmented rows
    rows: dict[Hashable, dict] = {}
    for col_key, col in columns.items():
        for row_key, value in col.items():
            if value:
                rows.setdefault(row_key, {})[col_key] = value
    for row_key, value in rhs.items():
        if value:
            rows.setdefault(row_key, {})[_RHS] = value

    # working rows with origin tracking
    work: list[dict] = []
    origin: list[dict] = []
    for row_key, row in rows.items():
        work.append(dict(row))
        origin.append({row_key: GaussianRational(1)})

    # column -> set of working-row indices currently containing it
    col_index: dict[Hashable, set[int]] = {}
    for idx, row in enumerate(work):
        for c in row:
            if c is not _RHS:
                col_index.setdefault(c, set()).add(idx)

    order: dict[Hashable, int] = {}
    for c in columns:
        order[c] = len(order)

    pivots: dict[Hashable, int] = {}  # col -> row index
    row_of_pivot: dict[int, Hashable] = {}

    processed = [False] * len(work)
    for idx in range(len(work)):
        if processed[idx]:
            continue
        row = work[idx]
        # pick the sparsest unpivoted column in this row (ties by input order)
        candidates = [c for c in row if c is not _RHS and c not in pivots]
        if not candidates:
            continue  # either already consistent-zero or handled below
        pivot_col = min(candidates, key=lambda c: (len(col_index[c]), order[c]))
        pivot_val = row[pivot_col]
        inv = pivot_val.inverse()
        # normalize
        for c in list(row):
            row[c] = row[c] * inv
        for k in list(origin[idx]):
            origin[idx][k] = origin[idx][k] * inv
        row[pivot_col] = GaussianRational(1)
        # eliminate from every other row containing pivot_col
        for other in list(col_index[pivot_col]):
            if other == idx:
                continue
            factor = -work[other].get(pivot_col, GR_ZERO)
            if not factor:
                col_index[pivot_col].discard(other)
                continue
            before = set(work[other])
            _add_into(work[other], row, factor)
            _add_into(origin[other], origin[idx], factor)
            after = set(work[other])
            for c in after - before:
                if c is not _RHS:
                    col_index.setdefault(c, set()).add(other)
            for c in before - after:
                if c is not _RHS:
                    col_index.get(c, set()).discard(other)
        col_index[pivot_col] = {idx}
        pivots[pivot_col] = idx
        row_of_pivot[idx] = pivot_col
        processed[idx] = True

    # detect inconsistency: a row with only the RHS entry left
    for idx, row in enumerate(work):
        if idx in row_of_pivot:
            continue
        nonrhs = [c for c in row if c is not _RHS]
        if not nonrhs and _RHS in row:
            return SolveOutcome(
                status="infeasible",
                witness=dict(origin[idx]),
            )

    free_cols = [c for c in columns if c not in pivots]
    # particular solution: free columns at zero
    particular: dict = {}
    for col, idx in pivots.items():
        v = work[idx].get(_RHS)
        if v:
            particular[col] = v
    # nullspace basis: one vector per free column
    nullspace = []
    for f in free_cols:
        vec = {f: GaussianRational(1)}
        for idx in col_index.get(f, ()):  # rows still containing f are pivot rows
            pcol = row_of_pivot.get(idx)
            if pcol is None:
                continue
            coeff = work[idx].get(f)
            if coeff:
                vec[pcol] = -coeff
        nullspace.append(vec)
    return SolveOutcome(
        status="solution",
        particular=particular,
        nullspace=nullspace,
        pivot_columns=list(pivots),
        free_columns=free_cols,
    )


# ---------------------------------------------------------------------------
# verification helpers (used to re-check solver output independently)
# ---------------------------------------------------------------------------


def apply_columns(columns: dict, assignment: dict) -> dict:
    """Compute  sum_c assignment[c] * columns[c]  as a row->value dict."""
    out: dict = {}
    for c, x in assignment.items():
        if not x:
            continue
        _add_into(out, columns[c], x)
    return out


def check_solution(columns: dict, rhs: dict, assignment: dict) -> bool:
    got = apply_columns(columns, assignment)
    want = {k: v for k, v in rhs.items() if v}
    return got == want


def witness_dot(witness: dict, column: dict) -> GaussianRational:
    """The pairing  y^T column  for a Farkas witness y."""
    acc = GR_ZERO
    if len(witness) > len(column):
        small, big = column, witness
    else:
        small, big = witness, column
    for k, v in small.items():
        w = big.get(k)
        if w is not None:
            acc = acc + v * w
    return acc


def check_witness(columns: Iterable[dict], rhs: dict, witness: dict) -> bool:
    """y^T c = 0 for all supplied columns and y^T rhs != 0."""
    if not witness_dot(witness, rhs):
        return False
    return all(not witness_dot(witness, col) for col in columns)
