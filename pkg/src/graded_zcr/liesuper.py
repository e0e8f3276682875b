"""Matrix Lie superalgebra layer: supermatrices and horizontal forms.

A supermatrix of signature (p|q) is an (p+q) x (p+q) matrix over the
graded scalar ring, with rows/columns 0..p-1 labelled even and p..p+q-1
labelled odd.  The *position parity* of slot (i, j) is the XOR of the row
and column labels.  A matrix is homogeneous of parity m when every
nonzero entry satisfies

    parity(entry at (i, j)) = position_parity(i, j) XOR m.

Entries multiply as graded scalars; no extra signs enter matrix
multiplication itself — all Koszul bookkeeping lives in the scalar ring.
The supercommutator of homogeneous matrices is

    [A, B] = A @ B - (-1)^(p(A) p(B)) B @ A

extended bilinearly to mixed matrices via the parity decomposition.

Horizontal forms carry matrix coefficients on the basis dx, dt (degree 1)
and dx^dt (degree 2); dx and dt are even, so the graded Leibniz/bracket
signs reduce to ordinary form-degree signs.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

from .superscalar import GradedPoly, gaussian, substitute

Poly = GradedPoly


class SuperMatrix:
    """Square matrix over the graded scalar ring with block signature (p|q)."""

    __slots__ = ("even_size", "odd_size", "size", "rows")

    def __init__(self, even_size: int, odd_size: int,
                 rows: Sequence[Sequence[GradedPoly]]):
        self.even_size = even_size
        self.odd_size = odd_size
        self.size = even_size + odd_size
        rows = tuple(tuple(r) for r in rows)
        if len(rows) != self.size or any(len(r) != self.size for r in rows):
            raise ValueError("matrix shape does not match signature")
        self.rows = rows

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def zero(even_size: int, odd_size: int) -> "SuperMatrix":
        z = GradedPoly.zero()
        n = even_size + odd_size
        return SuperMatrix(even_size, odd_size, [[z] * n for _ in range(n)])

    @staticmethod
    def identity(even_size: int, odd_size: int) -> "SuperMatrix":
        one = GradedPoly.scalar(1)
        z = GradedPoly.zero()
        n = even_size + odd_size
        return SuperMatrix(
            even_size, odd_size,
            [[one if i == j else z for j in range(n)] for i in range(n)],
        )

    @staticmethod
    def basis(even_size: int, odd_size: int, i: int, j: int) -> "SuperMatrix":
        """The elementary matrix with a 1 in slot (i, j), 0-based."""
        m = SuperMatrix.zero(even_size, odd_size)
        rows = [list(r) for r in m.rows]
        rows[i][j] = GradedPoly.scalar(1)
        return SuperMatrix(even_size, odd_size, rows)

    @property
    def signature(self) -> tuple[int, int]:
        return (self.even_size, self.odd_size)

    # -- parity ----------------------------------------------------------------

    def block(self, index: int) -> int:
        return 0 if index < self.even_size else 1

    def position_parity(self, i: int, j: int) -> int:
        return self.block(i) ^ self.block(j)

    def parity_parts(self) -> list[tuple[int, "SuperMatrix"]]:
        """Split into homogeneous parts [(0, even part), (1, odd part)],
        dropping zero parts."""
        z = GradedPoly.zero()
        even_rows = [[z] * self.size for _ in range(self.size)]
        odd_rows = [[z] * self.size for _ in range(self.size)]
        any_even = any_odd = False
        for i in range(self.size):
            for j in range(self.size):
                entry = self.rows[i][j]
                if entry.is_zero():
                    continue
                pos = self.position_parity(i, j)
                ev = {}
                od = {}
                for m, c in entry.terms.items():
                    if m.parity == pos:
                        ev[m] = c
                    else:
                        od[m] = c
                if ev:
                    even_rows[i][j] = GradedPoly(ev)
                    any_even = True
                if od:
                    odd_rows[i][j] = GradedPoly(od)
                    any_odd = True
        parts = []
        if any_even:
            parts.append((0, SuperMatrix(self.even_size, self.odd_size, even_rows)))
        if any_odd:
            parts.append((1, SuperMatrix(self.even_size, self.odd_size, odd_rows)))
        return parts

    def parity(self) -> int | None:
        """0 or 1 for homogeneous matrices, None for zero or mixed."""
        parts = self.parity_parts()
        if len(parts) == 1:
            return parts[0][0]
        return None

    def homogeneous_parity(self, *, zero_parity: int | None = None) -> int:
        parts = self.parity_parts()
        if not parts:
            if zero_parity is None:
                raise ValueError("zero matrix has no defined parity")
            return zero_parity
        if len(parts) > 1:
            raise ValueError("matrix of mixed parity")
        return parts[0][0]

    # -- ring operations --------------------------------------------------------

    def _check_compatible(self, other: "SuperMatrix"):
        if self.signature != other.signature:
            raise ValueError("signature mismatch")

    def __add__(self, other: "SuperMatrix") -> "SuperMatrix":
        self._check_compatible(other)
        return SuperMatrix(
            self.even_size, self.odd_size,
            [
                [self.rows[i][j] + other.rows[i][j] for j in range(self.size)]
                for i in range(self.size)
            ],
        )

    def __sub__(self, other: "SuperMatrix") -> "SuperMatrix":
        self._check_compatible(other)
        return SuperMatrix(
            self.even_size, self.odd_size,
            [
                [self.rows[i][j] - other.rows[i][j] for j in range(self.size)]
                for i in range(self.size)
            ],
        )

    def __neg__(self) -> "SuperMatrix":
        return self.map_entries(lambda p: -p)

    def scale_left(self, scalar) -> "SuperMatrix":
        """Multiply every entry by ``scalar`` from the left."""
        s = scalar if isinstance(scalar, GradedPoly) else GradedPoly.scalar(scalar)
        return self.map_entries(lambda p: s * p)

    def __rmul__(self, scalar) -> "SuperMatrix":
        if isinstance(scalar, (int, GradedPoly)) or hasattr(scalar, "re"):
            return self.scale_left(scalar)
        return NotImplemented

    def __mul__(self, scalar) -> "SuperMatrix":
        if isinstance(scalar, (int, GradedPoly)) or hasattr(scalar, "re"):
            s = scalar if isinstance(scalar, GradedPoly) else GradedPoly.scalar(scalar)
            return self.map_entries(lambda p: p * s)
        return NotImplemented

    def __matmul__(self, other: "SuperMatrix") -> "SuperMatrix":
        self._check_compatible(other)
        n = self.size
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = GradedPoly.zero()
                for k in range(n):
                    a = self.rows[i][k]
                    if a.is_zero():
                        continue
                    b = other.rows[k][j]
                    if b.is_zero():
                        continue
                    acc = acc + a * b
                row.append(acc)
            rows.append(row)
        return SuperMatrix(self.even_size, self.odd_size, rows)

    def __eq__(self, other):
        if not isinstance(other, SuperMatrix):
            return NotImplemented
        return self.signature == other.signature and self.rows == other.rows

    def is_zero(self) -> bool:
        return all(e.is_zero() for r in self.rows for e in r)

    # -- structure ---------------------------------------------------------------

    def map_entries(self, fn: Callable[[GradedPoly], GradedPoly]) -> "SuperMatrix":
        return SuperMatrix(
            self.even_size, self.odd_size,
            [[fn(e) for e in row] for row in self.rows],
        )

    def substitute(self, bindings: dict) -> "SuperMatrix":
        return self.map_entries(lambda p: substitute(p, dict(bindings)))

    def supertrace(self) -> GradedPoly:
        """Graded supertrace, extended linearly over parity parts.

        On the even part it is the alternating trace (sum over the even
        block minus sum over the odd block); on the odd part it is the
        plain trace.  With entries from a Grassmann-valued ring this is
        the twist that makes str([A, B]) = 0 hold for all homogeneous
        A, B; the two conventions agree on even matrices, which is the
        only case the flatness/removability checks use.
        """
        acc = GradedPoly.zero()
        for parity, part in self.parity_parts():
            for i in range(self.size):
                d = part.rows[i][i]
                if parity == 0 and self.block(i) == 1:
                    acc = acc - d
                else:
                    acc = acc + d
        return acc

    def variables(self) -> set:
        out = set()
        for row in self.rows:
            for e in row:
                out |= e.variables()
        return out

    def check_even_homogeneous(self, what: str = "matrix"):
        """Require every nonzero entry's parity to equal its position parity."""
        for i in range(self.size):
            for j in range(self.size):
                e = self.rows[i][j]
                if e.is_zero():
                    continue
                p = e.parity()
                if p is None or p != self.position_parity(i, j):
                    raise ValueError(
                        f"{what} entry ({i + 1},{j + 1}) breaks even homogeneity: {e}"
                    )

    # -- inversion -----------------------------------------------------------------

    def inverse(self) -> "SuperMatrix":
        """Exact Gauss-Jordan inverse; every pivot must be a unit.

        Raises ValueError when no unit pivot is available, which is the
        declared limit of this inverter.  The result is verified on both
        sides before being returned.
        """
        n = self.size
        left = [list(r) for r in self.rows]
        right = [list(r) for r in SuperMatrix.identity(*self.signature).rows]
        for col in range(n):
            pivot_row = None
            for r in range(col, n):
                if left[r][col].is_unit():
                    pivot_row = r
                    break
            if pivot_row is None:
                raise ValueError(
                    f"no unit pivot in column {col + 1}; "
                    "inversion requires unit pivots"
                )
            left[col], left[pivot_row] = left[pivot_row], left[col]
            right[col], right[pivot_row] = right[pivot_row], right[col]
            inv = left[col][col].unit_inverse()
            left[col] = [inv * e for e in left[col]]
            right[col] = [inv * e for e in right[col]]
            for r in range(n):
                if r == col:
                    continue
                factor = left[r][col]
                if factor.is_zero():
                    continue
                left[r] = [
                    left[r][j] - factor * left[col][j] for j in range(n)
                ]
                right[r] = [
                    right[r][j] - factor * right[col][j] for j in range(n)
                ]
        result = SuperMatrix(self.even_size, self.odd_size, right)
        ident = SuperMatrix.identity(*self.signature)
        if result @ self != ident or self @ result != ident:
            raise ValueError("inverse verification failed")
        return result

    # -- text -------------------------------------------------------------------

    def entry_texts(self) -> list[list[str]]:
        from .superscalar import poly_to_text

        return [[poly_to_text(e) for e in row] for row in self.rows]

    def __str__(self):
        return "\n".join(
            "[" + ", ".join(row) + "]" for row in self.entry_texts()
        )

    def __repr__(self):
        p, q = self.signature
        return f"<SuperMatrix ({p}|{q})>\n{self}"


def supercommutator(a: SuperMatrix, b: SuperMatrix) -> SuperMatrix:
    """[A, B] = AB - (-1)^(p(A)p(B)) BA, bilinear over parity parts."""
    a._check_compatible(b)
    out = SuperMatrix.zero(*a.signature)
    for pa, part_a in a.parity_parts():
        for pb, part_b in b.parity_parts():
            ab = part_a @ part_b
            ba = part_b @ part_a
            out = out + (ab - ba if not (pa and pb) else ab + ba)
    return out


# ---------------------------------------------------------------------------
# horizontal forms with supermatrix coefficients
# ---------------------------------------------------------------------------


class MatrixForm:
    """A horizontal form of degree 0, 1, or 2 with supermatrix coefficients.

    Degree 0: M; degree 1: A dx + B dt; degree 2: C dx^dt.  The basis
    covectors dx, dt are even and ordered dx < dt.
    """

    __slots__ = ("degree", "parts")

    def __init__(self, degree: int, parts: dict[str, SuperMatrix]):
        self.degree = degree
        self.parts = parts
        expected = {0: ("",), 1: ("dx", "dt"), 2: ("dxdt",)}[degree]
        if tuple(parts.keys()) != expected:
            raise ValueError("malformed form parts")

    @staticmethod
    def of_degree_0(m: SuperMatrix) -> "MatrixForm":
        return MatrixForm(0, {"": m})

    @staticmethod
    def one_form(dx: SuperMatrix, dt: SuperMatrix) -> "MatrixForm":
        return MatrixForm(1, {"dx": dx, "dt": dt})

    @staticmethod
    def two_form(dxdt: SuperMatrix) -> "MatrixForm":
        return MatrixForm(2, {"dxdt": dxdt})

    def __add__(self, other: "MatrixForm") -> "MatrixForm":
        if self.degree != other.degree:
            raise ValueError("degree mismatch")
        return MatrixForm(
            self.degree,
            {k: self.parts[k] + other.parts[k] for k in self.parts},
        )

    def __sub__(self, other: "MatrixForm") -> "MatrixForm":
        if self.degree != other.degree:
            raise ValueError("degree mismatch")
        return MatrixForm(
            self.degree,
            {k: self.parts[k] - other.parts[k] for k in self.parts},
        )

    def __neg__(self) -> "MatrixForm":
        return MatrixForm(self.degree, {k: -m for k, m in self.parts.items()})

    def __eq__(self, other):
        if not isinstance(other, MatrixForm):
            return NotImplemented
        return self.degree == other.degree and self.parts == other.parts

    def is_zero(self) -> bool:
        return all(m.is_zero() for m in self.parts.values())


def dh_form(form: MatrixForm, system) -> MatrixForm:
    """Horizontal differential: dh(M) = D_x(M) dx + D_t(M) dt, and
    dh(A dx + B dt) = (D_x(B) - D_t(A)) dx^dt."""
    dx = lambda m: m.map_entries(system.total_x)
    dt = lambda m: m.map_entries(system.total_t)
    if form.degree == 0:
        m = form.parts[""]
        return MatrixForm.one_form(dx(m), dt(m))
    if form.degree == 1:
        a, b = form.parts["dx"], form.parts["dt"]
        return MatrixForm.two_form(dx(b) - dt(a))
    raise ValueError("dh of a top-degree form")


def bracket_forms(f1: MatrixForm, f2: MatrixForm) -> MatrixForm:
    """Graded bracket of matrix-valued horizontal forms.

    dx and dt are even, so termwise [M (x) mu, N (x) nu] =
    [M, N] (x) (mu ^ nu); the wedge of the basis covectors supplies the
    form-degree signs (dt^dx = -dx^dt, dx^dx = dt^dt = 0).
    """
    d1, d2 = f1.degree, f2.degree
    if d1 + d2 > 2:
        raise ValueError("bracket exceeds top degree")
    if d1 == 0 and d2 == 0:
        return MatrixForm.of_degree_0(
            supercommutator(f1.parts[""], f2.parts[""])
        )
    if d1 == 0 and d2 == 1:
        m = f1.parts[""]
        return MatrixForm.one_form(
            supercommutator(m, f2.parts["dx"]),
            supercommutator(m, f2.parts["dt"]),
        )
    if d1 == 1 and d2 == 0:
        m = f2.parts[""]
        return MatrixForm.one_form(
            supercommutator(f1.parts["dx"], m),
            supercommutator(f1.parts["dt"], m),
        )
    if d1 == 0 and d2 == 2:
        return MatrixForm.two_form(
            supercommutator(f1.parts[""], f2.parts["dxdt"])
        )
    if d1 == 2 and d2 == 0:
        return MatrixForm.two_form(
            supercommutator(f1.parts["dxdt"], f2.parts[""])
        )
    # degree 1 with degree 1:
    # [A dx + B dt, C dx + D dt] = ([A, D] - [B, C]) dx^dt
    a, b = f1.parts["dx"], f1.parts["dt"]
    c, d = f2.parts["dx"], f2.parts["dt"]
    return MatrixForm.two_form(
        supercommutator(a, d) - supercommutator(b, c)
    )
