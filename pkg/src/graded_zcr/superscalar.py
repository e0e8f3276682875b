"""Exact scalar arithmetic in a Z2-graded commutative superalgebra.

The ground field is the Gaussian rationals Q(i), kept exact (no floats
anywhere).  On top of it sit sparse multivariate polynomials in graded
variables: even variables commute with everything, odd variables
anticommute among themselves and square to zero.  Reordering a product
into canonical form picks up the Koszul sign (-1) for every transposition
of two odd factors.

Exponents are ordinary non-negative integers except for variables declared
invertible (deformation parameters such as ``eps``), which admit negative
powers, i.e. Laurent monomials.

Division is only defined by units: a unit is a single-term element whose
monomial involves invertible even variables only.
"""

from __future__ import annotations

import itertools
from enum import Enum
from typing import Iterable, Iterator

# ---------------------------------------------------------------------------
# exact rational backend: gmpy2.mpq when available, fractions.Fraction else
# ---------------------------------------------------------------------------

try:  # pragma: no cover - environment dependent
    from gmpy2 import mpq as _RAT

    _BACKEND = "gmpy2"
except ImportError:  # pragma: no cover
    from fractions import Fraction as _RAT

    _BACKEND = "fractions"


def rational(numerator, denominator=1):
    """Exact rational number from ints, strings like '3/4', or rationals."""
    return _RAT(numerator, denominator)


_R0 = rational(0)
_R1 = rational(1)


def rational_to_text(q) -> str:
    """Canonical text of a rational: '5', '-5', '3/4'."""
    n, d = q.numerator, q.denominator
    return str(n) if d == 1 else f"{n}/{d}"


# ---------------------------------------------------------------------------
# Gaussian rationals
# ---------------------------------------------------------------------------


class GaussianRational:
    """A number a + b*i with exact rational a, b."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _RAT(re))
        object.__setattr__(self, "im", _RAT(im))

    def __setattr__(self, name, value):  # immutability guard
        raise AttributeError("GaussianRational is immutable")

    # -- predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.re and not self.im

    def is_one(self) -> bool:
        return self.re == _R1 and not self.im

    def is_rational(self) -> bool:
        return not self.im

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, int):
            return GaussianRational(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def inverse(self):
        norm = self.re * self.re + self.im * self.im
        if not norm:
            raise ZeroDivisionError("inverse of zero")
        return GaussianRational(self.re / norm, -self.im / norm)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("exponent must be an int")
        base = self if n >= 0 else self.inverse()
        result = GaussianRational(1)
        for _ in range(abs(n)):
            result = result * base
        return result

    # -- comparisons --------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, int):
            return self.re == other and not self.im
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    # -- text ---------------------------------------------------------------

    def __repr__(self):
        return f"GaussianRational({self.re!r}, {self.im!r})"

    def __str__(self):
        return gaussian_to_text(self)


GR_ZERO = GaussianRational(0)
GR_ONE = GaussianRational(1)
GR_I = GaussianRational(0, 1)


def gaussian(value) -> GaussianRational:
    """Coerce an int, rational, or GaussianRational to a GaussianRational."""
    if isinstance(value, GaussianRational):
        return value
    return GaussianRational(value)


def gaussian_to_text(c: GaussianRational) -> str:
    """Canonical text: '3', '-1/2', 'i', '-i', '2*i', '1-2*i' (no parens)."""
    if not c.im:
        return rational_to_text(c.re)
    if not c.re:
        if c.im == _R1:
            return "i"
        if c.im == -_R1:
            return "-i"
        return f"{rational_to_text(c.im)}*i"
    sign = "+" if c.im > 0 else "-"
    mag = c.im if c.im > 0 else -c.im
    imag = "i" if mag == _R1 else f"{rational_to_text(mag)}*i"
    return f"{rational_to_text(c.re)}{sign}{imag}"


# ---------------------------------------------------------------------------
# graded variables
# ---------------------------------------------------------------------------


class VarKind(Enum):
    EVEN_JET = "even-jet"
    ODD_JET = "odd-jet"
    EVEN_NONLOCAL = "even-nonlocal"
    ODD_NONLOCAL = "odd-nonlocal"
    PARAMETER = "parameter"
    ODD_INDEPENDENT = "odd-independent"
    EVEN_INDEPENDENT = "even-independent"


_ODD_KINDS = frozenset({VarKind.ODD_JET, VarKind.ODD_NONLOCAL, VarKind.ODD_INDEPENDENT})

_variable_counter = itertools.count(1)


class Variable:
    """A graded symbol.  Identity-based: two calls create two variables.

    ``base``/``order`` are set for jet variables (``u_xx`` has base ``u``,
    order 2); the dependent itself is its own order-0 jet with base None.
    ``key`` is a total-order tag: (creation index of the family, jet order),
    so derivatives of one dependent sort together and later-declared symbols
    sort after earlier ones.
    """

    __slots__ = ("name", "kind", "invertible", "base", "order", "key")

    def __init__(self, name: str, kind: VarKind, *, invertible: bool = False,
                 base: "Variable | None" = None, order: int = 0):
        if invertible and kind is not VarKind.PARAMETER:
            raise ValueError("only parameters may be declared invertible")
        self.name = name
        self.kind = kind
        self.invertible = invertible
        self.base = base
        self.order = order
        if base is None:
            self.key = (next(_variable_counter), 0)
        else:
            self.key = (base.key[0], order)

    @property
    def parity(self) -> int:
        return 1 if self.kind in _ODD_KINDS else 0

    @property
    def is_jet(self) -> bool:
        return self.kind in (VarKind.EVEN_JET, VarKind.ODD_JET)

    def __lt__(self, other: "Variable"):
        return self.key < other.key

    def __repr__(self):
        return f"<{self.name}:{self.kind.value}>"


def parameter(name: str, *, invertible: bool = False) -> Variable:
    return Variable(name, VarKind.PARAMETER, invertible=invertible)


def odd_independent(name: str) -> Variable:
    return Variable(name, VarKind.ODD_INDEPENDENT)


def even_independent(name: str) -> Variable:
    return Variable(name, VarKind.EVEN_INDEPENDENT)


def nonlocal_variable(name: str, *, odd: bool) -> Variable:
    return Variable(name, VarKind.ODD_NONLOCAL if odd else VarKind.EVEN_NONLOCAL)


# ---------------------------------------------------------------------------
# monomials
# ---------------------------------------------------------------------------


class Monomial:
    """Canonical monomial: sorted even factors with exponents, sorted odd factors.

    ``evens``: tuple of (Variable, exponent) with exponent != 0, sorted by key;
    negative exponents only on invertible variables.
    ``odds``: tuple of distinct odd Variables sorted by key.
    """

    __slots__ = ("evens", "odds", "_hash", "_skey")

    def __init__(self, evens=(), odds=()):
        self.evens = tuple(evens)
        self.odds = tuple(odds)
        self._hash = hash((self.evens, self.odds))
        self._skey = None

    def __eq__(self, other):
        if not isinstance(other, Monomial):
            return NotImplemented
        return self.evens == other.evens and self.odds == other.odds

    def __hash__(self):
        return self._hash

    @property
    def parity(self) -> int:
        return len(self.odds) & 1

    def is_one(self) -> bool:
        return not self.evens and not self.odds

    def sort_key(self):
        if self._skey is None:
            self._skey = (
                tuple(v.key for v in self.odds),
                len(self.evens),
                tuple((v.key, e) for v, e in self.evens),
            )
        return self._skey

    def variables(self) -> Iterator[Variable]:
        for v, _ in self.evens:
            yield v
        yield from self.odds

    def even_exponent(self, var: Variable) -> int:
        for v, e in self.evens:
            if v is var:
                return e
        return 0

    def has_odd(self, var: Variable) -> bool:
        return var in self.odds

    def grassmann_degree(self) -> int:
        return len(self.odds)

    def multiply(self, other: "Monomial"):
        """Return (monomial, sign) or (None, 0) when an odd factor repeats."""
        # merge even factors (both sorted by key)
        evens = []
        a, b = self.evens, other.evens
        ia = ib = 0
        while ia < len(a) and ib < len(b):
            va, ea = a[ia]
            vb, eb = b[ib]
            if va is vb:
                s = ea + eb
                if s:
                    evens.append((va, s))
                ia += 1
                ib += 1
            elif va.key < vb.key:
                evens.append(a[ia])
                ia += 1
            else:
                evens.append(b[ib])
                ib += 1
        evens.extend(a[ia:])
        evens.extend(b[ib:])

        # merge odd factors, counting the transpositions the merge performs
        odds = []
        o1, o2 = self.odds, other.odds
        i = j = 0
        swaps = 0
        while i < len(o1) and j < len(o2):
            v1, v2 = o1[i], o2[j]
            if v1 is v2:
                return None, 0
            if v1.key < v2.key:
                odds.append(v1)
                i += 1
            else:
                # v2 jumps over the remaining len(o1)-i factors of o1
                swaps += len(o1) - i
                odds.append(v2)
                j += 1
        odds.extend(o1[i:])
        odds.extend(o2[j:])

        sign = -1 if swaps & 1 else 1
        return Monomial(evens, odds), sign

    def __str__(self):
        return monomial_to_text(self)

    def __repr__(self):
        return f"Monomial({monomial_to_text(self)})"


MONOMIAL_ONE = Monomial()


def monomial_to_text(m: Monomial) -> str:
    """Canonical text: factors merged by variable key, '*'-separated."""
    if m.is_one():
        return "1"
    factors = []
    evens = [(v.key, v.name, e) for v, e in m.evens]
    odds = [(v.key, v.name, 1) for v in m.odds]
    for _, name, e in sorted(evens + odds):
        factors.append(name if e == 1 else f"{name}^{e}")
    return "*".join(factors)


# ---------------------------------------------------------------------------
# graded polynomials
# ---------------------------------------------------------------------------


class GradedPoly:
    """Sparse polynomial: dict {Monomial: GaussianRational}, no zero values."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms = terms or {}

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero() -> "GradedPoly":
        return GradedPoly()

    @staticmethod
    def scalar(value) -> "GradedPoly":
        c = gaussian(value)
        return GradedPoly({MONOMIAL_ONE: c}) if c else GradedPoly()

    @staticmethod
    def variable(v: Variable, exponent: int = 1) -> "GradedPoly":
        if exponent == 0:
            return GradedPoly.scalar(1)
        if v.parity:
            if exponent != 1:
                raise ValueError(f"odd variable {v.name} only admits exponent 1")
            m = Monomial((), (v,))
        else:
            if exponent < 0 and not v.invertible:
                raise ValueError(f"negative power of non-invertible {v.name}")
            m = Monomial(((v, exponent),), ())
        return GradedPoly({m: GR_ONE})

    @staticmethod
    def term(m: Monomial, c: GaussianRational) -> "GradedPoly":
        return GradedPoly({m: c}) if c else GradedPoly()

    # -- predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_scalar(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and MONOMIAL_ONE in self.terms)

    def scalar_value(self) -> GaussianRational:
        if not self.terms:
            return GR_ZERO
        if self.is_scalar():
            return self.terms[MONOMIAL_ONE]
        raise ValueError("not a scalar")

    def parity(self):
        """0 or 1 when every term has that parity, None when mixed or zero."""
        p = None
        for m in self.terms:
            mp = m.parity
            if p is None:
                p = mp
            elif p != mp:
                return None
        return p

    def homogeneous_parity(self, *, zero_parity: int | None = None) -> int:
        """Parity of a homogeneous element; ValueError on mixed parity."""
        if not self.terms:
            if zero_parity is None:
                raise ValueError("zero element has no defined parity")
            return zero_parity
        p = self.parity()
        if p is None:
            raise ValueError(f"element of mixed parity: {self}")
        return p

    def is_unit(self) -> bool:
        if len(self.terms) != 1:
            return False
        (m, c), = self.terms.items()
        if m.odds or not c:
            return False
        return all(v.invertible for v, _ in m.evens)

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, GradedPoly):
            return other
        if isinstance(other, (int, GaussianRational)):
            return GradedPoly.scalar(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not other.terms:
            return self
        if not self.terms:
            return other
        terms = dict(self.terms)
        for m, c in other.terms.items():
            s = terms.get(m)
            if s is None:
                terms[m] = c
            else:
                s = s + c
                if s:
                    terms[m] = s
                else:
                    del terms[m]
        return GradedPoly(terms)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __neg__(self):
        return GradedPoly({m: -c for m, c in self.terms.items()})

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not self.terms or not other.terms:
            return GradedPoly()
        terms: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m, sign = m1.multiply(m2)
                if m is None:
                    continue
                c = c1 * c2
                if sign < 0:
                    c = -c
                s = terms.get(m)
                if s is None:
                    if c:
                        terms[m] = c
                else:
                    s = s + c
                    if s:
                        terms[m] = s
                    else:
                        del terms[m]
        return GradedPoly(terms)

    def __rmul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self

    def unit_inverse(self) -> "GradedPoly":
        if not self.is_unit():
            raise ValueError(f"division by a non-unit: {self}")
        (m, c), = self.terms.items()
        inv = Monomial(tuple((v, -e) for v, e in m.evens), ())
        return GradedPoly({inv: c.inverse()})

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.unit_inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("exponent must be an int")
        if n < 0:
            return self.unit_inverse() ** (-n)
        result = GradedPoly.scalar(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base2 = base * base if n > 1 else base
            base = base2
            n >>= 1
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # -- structure ----------------------------------------------------------

    def variables(self) -> set:
        out = set()
        for m in self.terms:
            out.update(m.variables())
        return out

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda mc: mc[0].sort_key())

    def map_coefficients(self, fn) -> "GradedPoly":
        terms = {}
        for m, c in self.terms.items():
            c2 = fn(c)
            if c2:
                terms[m] = c2
        return GradedPoly(terms)

    def conjugate(self) -> "GradedPoly":
        """Coefficientwise complex conjugation (i -> -i)."""
        return self.map_coefficients(lambda c: c.conjugate())

    def __str__(self):
        return poly_to_text(self)

    def __repr__(self):
        return f"GradedPoly({poly_to_text(self)})"


P_ZERO = GradedPoly()
P_ONE = GradedPoly.scalar(1)


# ---------------------------------------------------------------------------
# graded differentiation and substitution
# ---------------------------------------------------------------------------


def odd_partial(p: GradedPoly, v: Variable) -> GradedPoly:
    """Graded left derivative with respect to an odd variable.

    On a monomial o_1*...*o_k containing v at position j (0-based among the
    odd factors), the derivative removes v and multiplies by (-1)**j: the
    sign of commuting v leftwards past the preceding odd factors.
    """
    if not v.parity:
        raise ValueError(f"{v.name} is not odd")
    terms: dict = {}
    for m, c in p.terms.items():
        try:
            j = m.odds.index(v)
        except ValueError:
            continue
        rest = m.odds[:j] + m.odds[j + 1:]
        c2 = -c if j & 1 else c
        m2 = Monomial(m.evens, rest)
        s = terms.get(m2)
        terms[m2] = c2 if s is None else s + c2
        if not terms[m2]:
            del terms[m2]
    return GradedPoly(terms)


def even_partial(p: GradedPoly, v: Variable) -> GradedPoly:
    """Ordinary partial derivative with respect to an even variable."""
    if v.parity:
        raise ValueError(f"{v.name} is not even")
    terms: dict = {}
    for m, c in p.terms.items():
        e = m.even_exponent(v)
        if not e:
            continue
        evens = tuple(
            (w, e - 1) if w is v else (w, k)
            for w, k in m.evens
            if not (w is v and e == 1)
        )
        m2 = Monomial(evens, m.odds)
        c2 = c * e
        s = terms.get(m2)
        terms[m2] = c2 if s is None else s + c2
        if not terms[m2]:
            del terms[m2]
    return GradedPoly(terms)


def partial_left(p: GradedPoly, v: Variable) -> GradedPoly:
    """Graded left partial derivative (dispatches on the variable's parity)."""
    return odd_partial(p, v) if v.parity else even_partial(p, v)


def substitute(p: GradedPoly, bindings: dict) -> GradedPoly:
    """Substitute variables by polynomial values (parity-checked).

    Even variables require even (or zero) values, odd variables odd (or
    zero) values; this keeps the substitution a well-defined homomorphism
    of superalgebras.  Negative powers of an invertible variable require
    the value to be a unit.
    """
    normalized = {}
    for v, val in bindings.items():
        val = val if isinstance(val, GradedPoly) else GradedPoly.scalar(val)
        normalized[v] = val
        if val.is_zero():
            continue
        if val.parity() != v.parity:
            raise ValueError(
                f"substitution value for {v.name} must be homogeneous of parity {v.parity}"
            )
    bindings = normalized
    out = GradedPoly()
    for m, c in p.terms.items():
        acc = GradedPoly.scalar(c)
        for v, e in m.evens:
            val = bindings.get(v)
            if val is None:
                acc = acc * GradedPoly.variable(v, e)
            elif e >= 0:
                acc = acc * val ** e
            else:
                acc = acc * val.unit_inverse() ** (-e)
            if acc.is_zero():
                break
        if acc.is_zero():
            continue
        for v in m.odds:
            val = bindings.get(v)
            acc = acc * (val if val is not None else GradedPoly.variable(v))
            if acc.is_zero():
                break
        out = out + acc
    return out


# ---------------------------------------------------------------------------
# canonical printing
# ---------------------------------------------------------------------------


def _term_text(m: Monomial, c: GaussianRational):
    """Return (sign, body) where sign is '+' or '-' and body has no sign."""
    mono = None if m.is_one() else monomial_to_text(m)
    if not c.im:  # rational coefficient
        neg = c.re < 0
        mag = -c.re if neg else c.re
        if mono is None:
            body = rational_to_text(mag)
        elif mag == _R1:
            body = mono
        else:
            body = f"{rational_to_text(mag)}*{mono}"
        return ("-" if neg else "+", body)
    if not c.re:  # purely imaginary
        neg = c.im < 0
        mag = -c.im if neg else c.im
        head = "i" if mag == _R1 else f"{rational_to_text(mag)}*i"
        body = head if mono is None else f"{head}*{mono}"
        return ("-" if neg else "+", body)
    # mixed: keep the full value inside parentheses, always joined with '+'
    head = f"({gaussian_to_text(c)})"
    body = head if mono is None else f"{head}*{mono}"
    return ("+", body)


def poly_to_text(p: GradedPoly) -> str:
    """Deterministic canonical form; parses back to an equal polynomial."""
    if not p.terms:
        return "0"
    pieces = []
    for idx, (m, c) in enumerate(p.sorted_terms()):
        sign, body = _term_text(m, c)
        if idx == 0:
            pieces.append(body if sign == "+" else f"-{body}")
        else:
            pieces.append(f" {sign} {body}")
    return "".join(pieces)


def backend_name() -> str:
    """Which exact-rational backend is active ('gmpy2' or 'fractions')."""
    return _BACKEND
