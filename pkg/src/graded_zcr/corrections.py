"""Single-term correction search for almost-flat matrix families.

Transcribed matrix families sometimes fail flatness because of a typo in
one printed term.  :func:`search_single_term_corrections` enumerates
every edit that changes exactly one term of one matrix entry --- either
shifting the deformation-parameter exponent by at most a configured
window, or replacing the coefficient by a near miss (negation, factor of
i, factor of 2, halving, conjugation) --- and reports every edit that
makes the Maurer-Cartan residual vanish identically.

The search is exact and incremental: perturbing B by a single-entry
delta changes the residual by  D_x(delta) - [A, delta], and perturbing A
by  -(D_t(delta) - [B, delta]),  so each candidate costs one sparse
update instead of a full residual recomputation.  Every reported fix is
re-verified against a full from-scratch residual before being returned.
"""

from __future__ import annotations

from dataclasses import dataclass

from .superscalar import (
    GaussianRational,
    GradedPoly,
    Monomial,
    poly_to_text,
)
from .liesuper import SuperMatrix
from .zcr import ZCRFamily, _matrix_rows, _operator_column, mc_residual


@dataclass(frozen=True)
class CorrectionCandidate:
    """One single-term edit: ``matrix[i,j]: old_term -> new_term`` (1-based)."""

    matrix: str
    i: int
    j: int
    old_term: GradedPoly
    new_term: GradedPoly
    kind: str  # "exponent-shift" or "coefficient-edit"
    size: int  # |shift| for exponent edits, 1 for coefficient edits

    def describe(self) -> str:
        return (
            f"{self.matrix}[{self.i},{self.j}] term "
            f"{poly_to_text(self.old_term)} -> {poly_to_text(self.new_term)}"
        )


@dataclass(frozen=True)
class CorrectionSearchResult:
    """Outcome of the exhaustive single-term search."""

    verbatim_flat: bool
    fixes: tuple
    candidates_tried: int
    exponent_window: int

    @property
    def unique_fix(self) -> CorrectionCandidate:
        if self.verbatim_flat:
            raise ValueError("the family is already flat; nothing to fix")
        if len(self.fixes) != 1:
            raise ValueError(
                f"expected a unique single-term fix, found {len(self.fixes)}"
            )
        return self.fixes[0]

    def describe(self) -> str:
        if self.verbatim_flat:
            return "the family is flat as shipped; no correction needed"
        if not self.fixes:
            return (
                f"no single-term fix found among {self.candidates_tried} "
                f"candidates (exponent window +-{self.exponent_window})"
            )
        lines = [
            f"{len(self.fixes)} flatness-restoring single-term edit(s) "
            f"among {self.candidates_tried} candidates:"
        ]
        lines += [f"  {fix.describe()}" for fix in self.fixes]
        return "\n".join(lines)


def _coefficient_edits(c: GaussianRational):
    half = GaussianRational(1) / GaussianRational(2)
    eye = GaussianRational(0, 1)
    for edited in (
        -c,
        eye * c,
        -(eye * c),
        c + c,
        half * c,
        c.conjugate(),
    ):
        if edited != c:
            yield edited


def _exponent_shifted(m: Monomial, parameter, shift: int) -> Monomial:
    evens = []
    seen = False
    for v, e in m.evens:
        if v is parameter:
            seen = True
            e = e + shift
            if e:
                evens.append((v, e))
        else:
            evens.append((v, e))
    if not seen and shift:
        evens.append((parameter, shift))
        evens.sort(key=lambda ve: ve[0].key)
    return Monomial(tuple(evens), m.odds)


def _apply_edit(
    family: ZCRFamily, candidate: CorrectionCandidate
) -> ZCRFamily:
    target = family.a_matrix if candidate.matrix == "A" else family.b_matrix
    rows = [list(r) for r in target.rows]
    i, j = candidate.i - 1, candidate.j - 1
    rows[i][j] = rows[i][j] - candidate.old_term + candidate.new_term
    edited = SuperMatrix(target.even_size, target.odd_size, rows)
    if candidate.matrix == "A":
        return ZCRFamily(family.system, edited, family.b_matrix, family.parameter)
    return ZCRFamily(family.system, family.a_matrix, edited, family.parameter)


def search_single_term_corrections(
    family: ZCRFamily, *, exponent_window: int = 2
) -> CorrectionSearchResult:
    """Exhaust all single-term edits; report every one restoring flatness."""
    base = mc_residual(family)
    if base.is_zero():
        return CorrectionSearchResult(
            verbatim_flat=True,
            fixes=(),
            candidates_tried=0,
            exponent_window=exponent_window,
        )
    base_rows = _matrix_rows(base)
    parameter = family.parameter

    def delta_rows(matrix_name: str, i: int, j: int, delta: GradedPoly) -> dict:
        """Residual change for entry (i, j) of A or B changing by delta."""
        column = _operator_column(family, i, j, delta)
        if matrix_name == "B":
            picked = {
                (None, r, c, mono): value
                for (tag, r, c, mono), value in column.items()
                if tag == "x"
            }
        else:
            picked = {
                (None, r, c, mono): -value
                for (tag, r, c, mono), value in column.items()
                if tag == "t"
            }
        return picked

    def residual_vanishes(matrix_name, i, j, delta) -> bool:
        change = delta_rows(matrix_name, i, j, delta)
        keys = set(base_rows) | set(change)
        zero = GaussianRational(0)
        for key in keys:
            if base_rows.get(key, zero) + change.get(key, zero):
                return False
        return True

    fixes = []
    tried = 0
    for matrix_name, matrix in (("A", family.a_matrix), ("B", family.b_matrix)):
        size = matrix.size
        for i in range(size):
            for j in range(size):
                entry = matrix.rows[i][j]
                for mono, coeff in sorted(
                    entry.terms.items(), key=lambda mc: mc[0].sort_key()
                ):
                    old_term = GradedPoly.term(mono, coeff)
                    candidates = []
                    for shift in range(-exponent_window, exponent_window + 1):
                        if shift == 0:
                            continue
                        shifted = _exponent_shifted(mono, parameter, shift)
                        candidates.append(
                            CorrectionCandidate(
                                matrix_name,
                                i + 1,
                                j + 1,
                                old_term,
                                GradedPoly.term(shifted, coeff),
                                "exponent-shift",
                                abs(shift),
                            )
                        )
                    for edited in _coefficient_edits(coeff):
                        candidates.append(
                            CorrectionCandidate(
                                matrix_name,
                                i + 1,
                                j + 1,
                                old_term,
                                GradedPoly.term(mono, edited),
                                "coefficient-edit",
                                1,
                            )
                        )
                    for candidate in candidates:
                        tried += 1
                        delta = candidate.new_term - candidate.old_term
                        if residual_vanishes(matrix_name, i, j, delta):
                            # full, from-scratch confirmation
                            if mc_residual(_apply_edit(family, candidate)).is_zero():
                                fixes.append(candidate)

    fixes.sort(key=lambda f: (f.size, f.kind, f.matrix, f.i, f.j))
    return CorrectionSearchResult(
        verbatim_flat=False,
        fixes=tuple(fixes),
        candidates_tried=tried,
        exponent_window=exponent_window,
    )
