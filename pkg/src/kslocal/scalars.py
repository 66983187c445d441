"""Scalar backends: exact elements of Q(sqrt 2) and tolerance-aware floats.

Exact scalars are :class:`QSqrt2` instances ``r + s*sqrt2`` with rational
``r`` and ``s``.  Float scalars are plain Python floats compared with a
tolerance; :data:`EPSILON` is the default used throughout the package.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Union

from .errors import MalformedInput

EPSILON = 1e-10
SQRT2 = math.sqrt(2.0)


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot use {type(x).__name__} as a rational")


@dataclass(frozen=True, slots=True)
class QSqrt2:
    """Exact number ``r + s*sqrt(2)``."""

    r: Fraction = Fraction(0)
    s: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "r", _frac(self.r))
        object.__setattr__(self, "s", _frac(self.s))

    @classmethod
    def coerce(cls, x) -> QSqrt2:
        if isinstance(x, QSqrt2):
            return x
        if isinstance(x, str):
            return parse_exact(x)
        if isinstance(x, float):
            raise TypeError("refusing to coerce a float into an exact scalar")
        return cls(_frac(x), Fraction(0))

    def __add__(self, other):
        try:
            o = QSqrt2.coerce(other)
        except TypeError:
            return NotImplemented
        return QSqrt2(self.r + o.r, self.s + o.s)

    __radd__ = __add__

    def __neg__(self):
        return QSqrt2(-self.r, -self.s)

    def __sub__(self, other):
        try:
            o = QSqrt2.coerce(other)
        except TypeError:
            return NotImplemented
        return QSqrt2(self.r - o.r, self.s - o.s)

    def __rsub__(self, other):
        return -self + other

    def __mul__(self, other):
        try:
            o = QSqrt2.coerce(other)
        except TypeError:
            return NotImplemented
        return QSqrt2(self.r * o.r + 2 * self.s * o.s, self.r * o.s + self.s * o.r)

    __rmul__ = __mul__

    def conjugate(self) -> QSqrt2:
        return QSqrt2(self.r, -self.s)

    def field_norm(self) -> Fraction:
        """``r**2 - 2*s**2``; zero only for the zero element."""
        return self.r * self.r - 2 * self.s * self.s

    def inverse(self) -> QSqrt2:
        n = self.field_norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in Q(sqrt2)")
        return QSqrt2(self.r / n, -self.s / n)

    def __truediv__(self, other):
        try:
            o = QSqrt2.coerce(other)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return QSqrt2.coerce(other) * self.inverse()

    def sign(self) -> int:
        r, s = self.r, self.s
        if s == 0:
            return (r > 0) - (r < 0)
        if r == 0:
            return (s > 0) - (s < 0)
        if (r > 0) == (s > 0):
            return 1 if r > 0 else -1
        # opposite signs: the larger magnitude term wins
        if r * r > 2 * s * s:
            return 1 if r > 0 else -1
        return 1 if s > 0 else -1

    def __bool__(self):
        return self.r != 0 or self.s != 0

    def __eq__(self, other):
        if isinstance(other, QSqrt2):
            return self.r == other.r and self.s == other.s
        if isinstance(other, (int, Fraction)):
            return self.s == 0 and self.r == other
        return NotImplemented

    def __hash__(self):
        return hash((self.r, self.s))

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __float__(self):
        return float(self.r) + float(self.s) * SQRT2

    def is_rational(self) -> bool:
        return self.s == 0

    def __str__(self):
        return format_exact(self)

    def __repr__(self):
        return f"QSqrt2({format_exact(self)!r})"


Scalar = Union[QSqrt2, float]

ZERO = QSqrt2(0, 0)
ONE = QSqrt2(1, 0)
ROOT2 = QSqrt2(0, 1)

_TERM = re.compile(
    r"""\s*(?P<sign>[+-])?\s*
        (?:
          (?P<coef>\d+(?:/\d+)?)\s*(?P<mul>\*\s*sqrt\s*\(?\s*2\s*\)?)?
          |
          (?P<bare>sqrt\s*\(?\s*2\s*\)?)
        )\s*""",
    re.VERBOSE,
)


def parse_exact(text: str) -> QSqrt2:
    """Parse ``"r+s*sqrt2"``-style text, e.g. ``"1/2-3/4*sqrt2"`` or ``"sqrt2"``."""
    src = text.strip()
    if not src:
        raise MalformedInput("empty exact scalar")
    pos = 0
    r = Fraction(0)
    s = Fraction(0)
    first = True
    while pos < len(src):
        m = _TERM.match(src, pos)
        if m is None or m.end() == pos:
            raise MalformedInput(f"cannot parse exact scalar {text!r}")
        if not first and m.group("sign") is None:
            raise MalformedInput(f"missing operator in exact scalar {text!r}")
        first = False
        sign = -1 if m.group("sign") == "-" else 1
        if m.group("bare"):
            s += sign
        elif m.group("mul"):
            s += sign * Fraction(m.group("coef"))
        else:
            r += sign * Fraction(m.group("coef"))
        pos = m.end()
    return QSqrt2(r, s)


def format_exact(x: QSqrt2) -> str:
    op = "-" if x.s < 0 else "+"
    return f"{x.r}{op}{abs(x.s)}*sqrt2"


def is_exact(x) -> bool:
    return isinstance(x, QSqrt2)


def to_float(x: Scalar) -> float:
    return float(x)


def is_zero(x: Scalar, eps: float = EPSILON) -> bool:
    if isinstance(x, QSqrt2):
        return not x
    return abs(x) <= eps


def approx_equal(a: Scalar, b: Scalar, eps: float = EPSILON) -> bool:
    if isinstance(a, QSqrt2) and isinstance(b, QSqrt2):
        return a == b
    return abs(float(a) - float(b)) <= eps


def parse_scalar(token) -> Scalar:
    """Read a JSON/CLI scalar: numbers become floats unless integral ints,
    strings go through the exact grammar unless they look like decimals."""
    if isinstance(token, bool):
        raise MalformedInput("booleans are not scalars")
    if isinstance(token, int):
        return QSqrt2(token)
    if isinstance(token, float):
        return token
    if isinstance(token, str):
        t = token.strip()
        if re.fullmatch(r"[+-]?(\d+\.\d*|\.\d+|\d+(\.\d*)?[eE][+-]?\d+)", t):
            return float(t)
        return parse_exact(t)
    raise MalformedInput(f"not a scalar: {token!r}")
