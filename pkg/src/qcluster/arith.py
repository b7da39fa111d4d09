"""Exact arithmetic: rationals, multivariate Laurent polynomials, quadratic surds.

Rationals are :class:`fractions.Fraction`.  Laurent polynomials have integer
coefficients and allow negative exponents; division is exact or raises
:class:`NonExactDivision`.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

Rational = Fraction
Number = Union[int, Fraction]

__all__ = [
    "Rational",
    "LaurentPoly",
    "NonExactDivision",
    "VariableMismatch",
    "poly_arith",
    "poly_exact_div",
    "poly_eval",
    "exact_sqrt",
    "QSurd",
]


class NonExactDivision(ArithmeticError):
    """No Laurent-polynomial quotient exists."""


class VariableMismatch(ValueError):
    pass


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    raise TypeError(f"not an exact rational: {v!r}")


class LaurentPoly:
    """Immutable Laurent polynomial over Z in a fixed ordered variable list."""

    __slots__ = ("variables", "terms", "_hash")

    def __init__(self, variables: Sequence[str], terms: Mapping[tuple, int] | None = None):
        self.variables = tuple(variables)
        n = len(self.variables)
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != n:
                raise ValueError(f"exponent vector {exps} has wrong length for {n} variables")
            if not isinstance(c, int):
                if isinstance(c, Fraction) and c.denominator == 1:
                    c = c.numerator
                else:
                    raise TypeError(f"coefficients must be integers, got {c!r}")
            if c:
                clean[exps] = clean.get(exps, 0) + c
                if clean[exps] == 0:
                    del clean[exps]
        self.terms = clean
        self._hash = None

    # -- constructors -------------------------------------------------------
    @classmethod
    def const(cls, variables: Sequence[str], c: int) -> "LaurentPoly":
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def var(cls, variables: Sequence[str], name: str, power: int = 1) -> "LaurentPoly":
        variables = tuple(variables)
        exps = [0] * len(variables)
        exps[variables.index(name)] = power
        return cls(variables, {tuple(exps): 1})

    @classmethod
    def monomial(cls, variables: Sequence[str], exps: Sequence[int], c: int = 1) -> "LaurentPoly":
        return cls(variables, {tuple(exps): c})

    # -- predicates ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def __len__(self):
        return len(self.terms)

    def _check(self, other: "LaurentPoly"):
        if self.variables != other.variables:
            raise VariableMismatch(f"{self.variables} != {other.variables}")

    def _coerce(self, other) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            self._check(other)
            return other
        if isinstance(other, int) or (isinstance(other, Fraction) and other.denominator == 1):
            return LaurentPoly.const(self.variables, int(other))
        return NotImplemented

    # -- ring operations ----------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return LaurentPoly(self.variables, out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return LaurentPoly(self.variables, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            if not self.is_monomial():
                raise NonExactDivision("negative power of a non-monomial")
            (e, c), = self.terms.items()
            if abs(c) != 1:
                raise NonExactDivision("negative power of a non-unit coefficient")
            return LaurentPoly(self.variables, {tuple(k * x for x in e): c if k % 2 else 1})
        result = LaurentPoly.const(self.variables, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return poly_exact_div(self, other)

    def __eq__(self, other):
        if isinstance(other, LaurentPoly):
            return self.variables == other.variables and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return not self.terms
            return self.terms == {(0,) * len(self.variables): other}
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.variables, frozenset(self.terms.items())))
        return self._hash

    # -- inspection ---------------------------------------------------------
    def sorted_terms(self):
        return sorted(self.terms.items())

    def min_exponents(self) -> tuple:
        if not self.terms:
            return (0,) * len(self.variables)
        return tuple(min(col) for col in zip(*self.terms))

    def to_text(self) -> str:
        """Canonical text form, terms sorted lexicographically by exponent vector."""
        if not self.terms:
            return "0"
        parts = []
        for exps, c in self.sorted_terms():
            factors = []
            for name, e in zip(self.variables, exps):
                if e == 1:
                    factors.append(name)
                elif e:
                    factors.append(f"{name}^{e}")
            body = f"{abs(c)}" if not factors else f"{abs(c)}*" + "*".join(factors)
            if not parts:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append(("- " if c < 0 else "+ ") + body)
        return " ".join(parts)

    __str__ = to_text

    def __repr__(self):
        return f"LaurentPoly({self.to_text()!r})"

    @classmethod
    def from_text(cls, variables: Sequence[str], text: str) -> "LaurentPoly":
        """Parse the output of :meth:`to_text`."""
        variables = tuple(variables)
        text = text.strip()
        if text == "0":
            return cls(variables)
        terms: dict = {}
        sign = 1
        for tok in text.replace("^-", "^~").split():
            if tok in "+-":
                sign = -1 if tok == "-" else 1
                continue
            if tok.startswith("-"):
                sign, tok = -1, tok[1:]
            pieces = tok.split("*")
            coeff = int(pieces[0])
            exps = [0] * len(variables)
            for f in pieces[1:]:
                name, _, power = f.partition("^")
                exps[variables.index(name)] += int(power.replace("~", "-")) if power else 1
            key = tuple(exps)
            terms[key] = terms.get(key, 0) + sign * coeff
            sign = 1
        return cls(variables, terms)


def poly_arith(op: str, a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    a._check(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def _leading(terms: Mapping[tuple, int]):
    e = max(terms)
    return e, terms[e]


def poly_exact_div(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    """Return ``q`` with ``q * b == a`` or raise :class:`NonExactDivision`."""
    a._check(b)
    if b.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if a.is_zero():
        return LaurentPoly(a.variables)
    if b.is_monomial():
        (eb, cb), = b.terms.items()
        out = {}
        for e, c in a.terms.items():
            q, r = divmod(c, cb)
            if r:
                raise NonExactDivision(f"coefficient {c} not divisible by {cb}")
            out[tuple(x - y for x, y in zip(e, eb))] = q
        return LaurentPoly(a.variables, out)
    # shift both to polynomials with no monomial factor, then lex division
    ma, mb = a.min_exponents(), b.min_exponents()
    rem = {tuple(x - y for x, y in zip(e, ma)): c for e, c in a.terms.items()}
    div = {tuple(x - y for x, y in zip(e, mb)): c for e, c in b.terms.items()}
    lb, cb = _leading(div)
    quot: dict = {}
    while rem:
        lr, cr = _leading(rem)
        shift = tuple(x - y for x, y in zip(lr, lb))
        if any(s < 0 for s in shift):
            raise NonExactDivision(f"{b} does not divide {a}")
        q, r = divmod(cr, cb)
        if r:
            raise NonExactDivision(f"{b} does not divide {a} over the integers")
        quot[shift] = q
        for e, c in div.items():
            key = tuple(x + y for x, y in zip(e, shift))
            v = rem.get(key, 0) - q * c
            if v:
                rem[key] = v
            else:
                rem.pop(key, None)
    offset = tuple(x - y for x, y in zip(ma, mb))
    return LaurentPoly(a.variables, {tuple(x + o for x, o in zip(e, offset)): c for e, c in quot.items()})


def poly_eval(p: LaurentPoly, assignment: Mapping[str, Number]) -> Fraction:
    """Substitute rational values for every variable."""
    vals = []
    for name in p.variables:
        if name not in assignment:
            raise KeyError(f"no value for variable {name}")
        vals.append(_as_fraction(assignment[name]))
    total = Fraction(0)
    for exps, c in p.terms.items():
        term = Fraction(c)
        for v, e in zip(vals, exps):
            if e:
                if v == 0 and e < 0:
                    raise ZeroDivisionError("zero assigned to a variable with negative exponent")
                term *= v ** e
        total += term
    return total


# --------------------------------------------------------------------------
# square roots


def _isqrt_exact(n: int) -> int | None:
    if n < 0:
        return None
    r = math.isqrt(n)
    return r if r * r == n else None


def exact_sqrt(q: Number) -> Fraction | None:
    """Nonnegative rational square root of ``q``, or ``None`` if irrational."""
    q = _as_fraction(q)
    if q < 0:
        return None
    n, d = _isqrt_exact(q.numerator), _isqrt_exact(q.denominator)
    if n is None or d is None:
        return None
    return Fraction(n, d)


_TRIAL_LIMIT = 10_000


def _squarefree_radicand(d: Fraction) -> tuple[Fraction, int]:
    """Write ``d = s**2 * r`` with integer ``r``; return ``(s, r)``.

    Square factors are stripped by trial division up to a fixed bound, so
    ``r`` is squarefree for moderate inputs and at least canonical (a
    function of ``d``) for huge ones.
    """
    # d = p/q = p*q / q^2
    m = d.numerator * d.denominator
    s_num = 1
    k = 2
    while k <= _TRIAL_LIMIT and k * k <= m:
        while m % (k * k) == 0:
            m //= k * k
            s_num *= k
        k += 1
    root = _isqrt_exact(m)
    if root is not None:
        s_num, m = s_num * root, 1
    return Fraction(s_num, d.denominator), m


class QSurd:
    """Exact element ``a + b*sqrt(r)`` of the real field Q(sqrt(r)), r > 1 not a square.

    ``sqrt(r)`` denotes the positive root.  Elements with ``b == 0`` compare
    equal to the corresponding :class:`Fraction`.
    """

    __slots__ = ("a", "b", "r")

    def __init__(self, a: Number, b: Number = 0, r: int = 1):
        self.a = _as_fraction(a)
        self.b = _as_fraction(b)
        self.r = int(r)
        if self.r < 1:
            raise ValueError("radicand must be positive")
        if self.r == 1:
            self.a, self.b = self.a + self.b, Fraction(0)
        if self.b == 0:
            self.r = 1

    @classmethod
    def sqrt(cls, q: Number) -> "QSurd":
        """Positive square root of a nonnegative rational."""
        q = _as_fraction(q)
        if q < 0:
            raise ValueError("square root of a negative rational")
        if q == 0:
            return cls(0)
        s, r = _squarefree_radicand(q)
        return cls(0, s, r) if r > 1 else cls(s)

    def over(self, r: int) -> "QSurd":
        """Same number written with radicand ``r``.  Radicands of huge inputs
        may keep large square factors, so equal fields can show up with
        different ``r``; they agree iff ``self.r * r`` is a square."""
        if self.b == 0 or r == self.r:
            return self
        root = _isqrt_exact(self.r * r)
        if root is None:
            raise ValueError(f"incompatible radicands {self.r} and {r}")
        return QSurd(self.a, self.b * root / r, r)

    def _lift(self, other) -> "QSurd":
        if isinstance(other, QSurd):
            if self.r != 1 and other.r != 1 and self.r != other.r:
                return other.over(self.r)
            return other
        if isinstance(other, (int, Fraction)):
            return QSurd(other)
        return NotImplemented

    def _radicand(self, other: "QSurd") -> int:
        return self.r if self.r != 1 else other.r

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return QSurd(self.a + o.a, self.b + o.b, self._radicand(o))

    __radd__ = __add__

    def __neg__(self):
        return QSurd(-self.a, -self.b, self.r)

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        r = self._radicand(o)
        return QSurd(self.a * o.a + self.b * o.b * r, self.a * o.b + self.b * o.a, r)

    __rmul__ = __mul__

    def conjugate(self) -> "QSurd":
        return QSurd(self.a, -self.b, self.r)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.r

    def inverse(self) -> "QSurd":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        c = self.conjugate()
        return QSurd(c.a / n, c.b / n, self.r)

    def __truediv__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return QSurd(_as_fraction(other)) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result, base = QSurd(1), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def is_rational(self) -> bool:
        return self.b == 0

    def to_fraction(self) -> Fraction:
        if self.b:
            raise ValueError(f"{self} is irrational")
        return self.a

    def sign(self) -> int:
        """Sign of the real number, decided exactly."""
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sa == sb or sb == 0:
            return sa
        if sa == 0:
            return sb
        # opposite signs: compare a^2 with b^2 r
        diff = self.a * self.a - self.b * self.b * self.r
        return sa if diff > 0 else (sb if diff < 0 else 0)

    def sqrt_positive(self) -> "QSurd":
        """Positive square root inside the same field; raises if it is not there."""
        if self.sign() < 0:
            raise ValueError("square root of a negative number")
        if self.b == 0:
            if self.a == 0:
                return QSurd(0)
            s, r = _squarefree_radicand(self.a)
            return QSurd(0, s, r) if r > 1 else QSurd(s)
        # (x + y sqrt r)^2 = a + b sqrt r  =>  x^2 + r y^2 = a, 2xy = b
        disc = exact_sqrt(self.a * self.a - self.b * self.b * self.r)
        if disc is not None:
            for x2 in ((self.a + disc) / 2, (self.a - disc) / 2):
                x = exact_sqrt(x2)
                if x:
                    y = self.b / (2 * x)
                    root = QSurd(x, y, self.r)
                    if root.sign() < 0:
                        root = -root
                    if root * root == self:
                        return root
        raise ValueError(f"{self} has no square root in Q(sqrt({self.r}))")

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        if isinstance(other, QSurd):
            if self.a != other.a or (self.b > 0) != (other.b > 0) or (self.b < 0) != (other.b < 0):
                return False
            return self.b * self.b * self.r == other.b * other.b * other.r
        return NotImplemented

    def __hash__(self):
        # b^2 r does not depend on how the radicand was reduced
        return hash(self.a) if self.b == 0 else hash((self.a, self.b * self.b * self.r, self.b > 0))

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.r)

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}*sqrt({self.r})"
        return f"{self.a} + {self.b}*sqrt({self.r})"

    __repr__ = __str__


def as_surd(v) -> QSurd:
    return v if isinstance(v, QSurd) else QSurd(v)


def exact_str(v) -> str:
    """Fraction-string form used in reports and CSV files."""
    if isinstance(v, QSurd):
        return str(v)
    if isinstance(v, LaurentPoly):
        return v.to_text()
    return str(_as_fraction(v))


def product(values: Iterable, start=1):
    out = start
    for v in values:
        out = out * v
    return out
