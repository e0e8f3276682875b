"""graded-zcr: exact zero-curvature analysis for Z2-graded evolution systems.

Library layers, bottom up:

- :mod:`graded_zcr.superscalar` — Gaussian-rational coefficients and sparse
  polynomials in graded variables (Koszul signs, Laurent parameters).
- :mod:`graded_zcr.exprtext` — the text grammar and canonical printing.
- :mod:`graded_zcr.jets` — jet spaces, total derivatives, superfield
  expansion, bosonic limits.
- :mod:`graded_zcr.liesuper` — supermatrices, supercommutators, horizontal
  forms, and the flatness (Maurer-Cartan) residual ingredients.
- :mod:`graded_zcr.linsolve` — exact sparse linear algebra with
  infeasibility witnesses.
- :mod:`graded_zcr.zcr` — zero-curvature families, gauge transformations,
  parameter-removability analysis.
- :mod:`graded_zcr.coverings` — projective substitution, nonlocal
  coverings, flatness and structure-equation residuals.
- :mod:`graded_zcr.registry` — bundled systems, matrices, coverings, and
  shadows, addressable by key.
- :mod:`graded_zcr.cli` — the ``graded-zcr`` command.
"""

__version__ = "0.1.0"
