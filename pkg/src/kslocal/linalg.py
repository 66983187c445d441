"""Small real linear algebra over either scalar backend.

Vectors are projective representatives of rank-1 projectors: ``v`` and
``2*v`` name the same observable.  The constructions need cross products
and frame rotations, which are three-dimensional; inner products and
orthogonality work in any dimension so the 4-dimensional bundled set can
share the same code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import DegenerateInput, OverlapMismatch, ZeroVector
from .scalars import EPSILON, ROOT2, QSqrt2, Scalar, format_exact, parse_scalar


@dataclass(frozen=True, slots=True)
class Vector:
    coords: tuple

    def __post_init__(self):
        cs = tuple(self.coords)
        if any(isinstance(c, float) for c in cs):
            cs = tuple(float(c) for c in cs)
        else:
            cs = tuple(QSqrt2.coerce(c) for c in cs)
        object.__setattr__(self, "coords", cs)

    @classmethod
    def of(cls, *xs) -> Vector:
        return cls(tuple(parse_scalar(x) if isinstance(x, str) else x for x in xs))

    @property
    def exact(self) -> bool:
        return bool(self.coords) and isinstance(self.coords[0], QSqrt2)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __len__(self):
        return len(self.coords)

    def __add__(self, other: Vector) -> Vector:
        return Vector(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: Vector) -> Vector:
        return Vector(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> Vector:
        return Vector(tuple(-a for a in self.coords))

    def scale(self, k) -> Vector:
        return Vector(tuple(k * a for a in self.coords))

    def to_float(self) -> Vector:
        return Vector(tuple(float(c) for c in self.coords))

    def array(self) -> np.ndarray:
        return np.array([float(c) for c in self.coords], dtype=float)

    def norm(self) -> float:
        return float(np.linalg.norm(self.array()))

    def is_zero(self) -> bool:
        if self.exact:
            return not any(self.coords)
        return all(c == 0.0 for c in self.coords)

    def unit(self) -> Vector:
        n = self.norm()
        if n == 0.0:
            raise ZeroVector("cannot normalise the zero vector")
        return Vector(tuple(float(c) / n for c in self.coords))

    def to_json(self) -> list:
        if self.exact:
            return [format_exact(c) for c in self.coords]
        return [float(c) for c in self.coords]

    @classmethod
    def from_json(cls, data: Sequence) -> Vector:
        return cls(tuple(parse_scalar(x) for x in data))

    def __repr__(self):
        if self.exact:
            return f"Vector({', '.join(_short(c) for c in self.coords)})"
        return f"Vector({', '.join(f'{c:.6g}' for c in self.coords)})"


def _short(c: QSqrt2) -> str:
    if c.s == 0:
        return str(c.r)
    if c.r == 0:
        return f"{c.s}*sqrt2"
    return format_exact(c)


def _coerce_pair(u: Vector, v: Vector) -> tuple[Vector, Vector]:
    if u.exact == v.exact:
        return u, v
    return u.to_float(), v.to_float()


def inner(u: Vector, v: Vector) -> Scalar:
    """Real dot product."""
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} vs {len(v)}")
    u, v = _coerce_pair(u, v)
    if u.exact:
        return reduce(lambda acc, xy: acc + xy[0] * xy[1], zip(u.coords, v.coords), QSqrt2())
    return math.fsum(a * b for a, b in zip(u.coords, v.coords))


def is_orthogonal(u: Vector, v: Vector, eps: float = EPSILON) -> bool:
    u, v = _coerce_pair(u, v)
    if u.exact:
        return not inner(u, v)
    return abs(inner(u, v)) <= eps * u.norm() * v.norm()


def overlap(u: Vector, v: Vector) -> float:
    """``|<u|v>| / (|u| |v|)``, the absolute cosine between the two lines."""
    nu, nv = u.norm(), v.norm()
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector("overlap with the zero vector")
    return abs(float(inner(u, v))) / (nu * nv)


def cross(u: Vector, v: Vector, eps: float = EPSILON) -> Vector:
    if len(u) != 3 or len(v) != 3:
        raise ValueError("cross product needs 3-vectors")
    u, v = _coerce_pair(u, v)
    (a1, a2, a3), (b1, b2, b3) = u.coords, v.coords
    w = Vector((a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1))
    if w.exact:
        if w.is_zero():
            raise DegenerateInput("cross product of parallel vectors")
    elif w.norm() <= eps * u.norm() * v.norm():
        raise DegenerateInput("cross product of (numerically) parallel vectors")
    return w


def _height(v: Vector) -> tuple:
    parts = [abs(x) for c in v.coords for x in (c.r, c.s)]
    return (sum(parts), 0 if v.coords[_first_nonzero(v)].s == 0 else 1)


def _first_nonzero(v: Vector, eps: float = 0.0) -> int:
    for i, c in enumerate(v.coords):
        if (c if isinstance(c, QSqrt2) else abs(c) > eps):
            return i
    raise ZeroVector("zero vector has no canonical form")


def _clear_rationals(v: Vector) -> Vector:
    fracs = [x for c in v.coords for x in (c.r, c.s)]
    lcm = reduce(lambda a, b: a * b // math.gcd(a, b), (f.denominator for f in fracs), 1)
    ints = [int(f * lcm) for f in fracs]
    g = reduce(math.gcd, ints, 0) or 1
    k = Fraction(lcm, g)
    return v.scale(QSqrt2(k))


def normalize_canonical(v: Vector, eps: float = EPSILON) -> Vector:
    """Deterministic representative of the projective class of ``v``.

    Exact vectors are divided by their first nonzero coordinate, which pins
    the class down completely, and then rescaled by a positive rational (to
    integer coordinates without common factor) or by ``sqrt2`` times one,
    whichever gives the smaller coefficients.  This keeps hand-written forms
    such as ``(sqrt2, 1, 1)`` intact.  Float vectors are scaled to unit norm.
    Either way the first nonzero coordinate ends up positive.
    """
    if v.exact:
        i = _first_nonzero(v)
        w = v.scale(v.coords[i].inverse())
        plain = _clear_rationals(w)
        rooted = _clear_rationals(w.scale(ROOT2))
        return min(plain, rooted, key=_height)
    n = v.norm()
    if n == 0.0:
        raise ZeroVector("zero vector has no canonical form")
    u = v.unit()
    i = _first_nonzero(u, eps)
    return -u if u.coords[i] < 0 else u


def line_distance(u: Vector, v: Vector) -> float:
    """``min(|u^ - v^|, |u^ + v^|)`` for the unit vectors: about the angle between the lines.

    Computed from coordinate differences, so it stays accurate for nearly
    equal lines where ``1 - |cos|`` would be swamped by rounding.
    """
    a, b = _as_unit_array(u), _as_unit_array(v)
    return float(min(np.linalg.norm(a - b), np.linalg.norm(a + b)))


def same_line(u: Vector, v: Vector, eps: float = EPSILON) -> bool:
    """True when ``u`` and ``v`` span the same line (projectively equal).

    Float mode: :func:`line_distance` at most ``eps``, the same angular scale
    as the orthogonality test.
    """
    u, v = _coerce_pair(u, v)
    if u.exact:
        return normalize_canonical(u) == normalize_canonical(v)
    return line_distance(u, v) <= eps


@dataclass(frozen=True)
class Transform:
    """Orthogonal 3x3 map acting on column vectors."""

    matrix: np.ndarray

    def __call__(self, v: Vector) -> Vector:
        return Vector(tuple(float(x) for x in self.matrix @ v.array()))

    def is_orthogonal(self, eps: float = EPSILON) -> bool:
        m = self.matrix
        return bool(np.max(np.abs(m.T @ m - np.eye(3))) <= eps)


def _as_unit_array(v: Vector) -> np.ndarray:
    a = v.array()
    n = np.linalg.norm(a)
    if n == 0.0:
        raise ZeroVector("zero vector")
    return a / n


def frame_from_pair(a: Vector, b: Vector, eps: float = EPSILON) -> tuple[Vector, Vector, Vector]:
    """Right-handed orthonormal frame with ``e1 ~ a`` and ``b`` in span(e1, e2).

    ``b`` has a positive component along ``e2``.
    """
    e1 = _as_unit_array(a)
    bb = _as_unit_array(b)
    rest = bb - (bb @ e1) * e1
    n = np.linalg.norm(rest)
    if n <= eps:
        raise DegenerateInput("frame_from_pair needs independent vectors")
    e2 = rest / n
    e3 = np.cross(e1, e2)
    return tuple(Vector(tuple(float(x) for x in e)) for e in (e1, e2, e3))


def _frame_matrix(a: Vector, b: Vector, eps: float) -> np.ndarray:
    return np.column_stack([f.array() for f in frame_from_pair(a, b, eps)])


def map_pair(a: Vector, b: Vector, a2: Vector, b2: Vector, eps: float = EPSILON) -> Transform:
    """Rotation taking the line of ``a`` to ``a2`` and the line of ``b`` to ``b2``.

    Overlaps are compared in absolute value, so when the signed inner products
    disagree ``b2`` is replaced by ``-b2`` (the same observable) first; the
    result then satisfies ``R a = a2`` and ``R b = +-b2`` for unit inputs.
    """
    ua, ub, ua2, ub2 = (_as_unit_array(x) for x in (a, b, a2, b2))
    s, s2 = float(ua @ ub), float(ua2 @ ub2)
    if abs(abs(s) - abs(s2)) > eps:
        raise OverlapMismatch(f"overlaps differ: {abs(s):.12g} vs {abs(s2):.12g}")
    if s * s2 < 0:
        ub2 = -ub2
    f = _frame_matrix(Vector(tuple(ua)), Vector(tuple(ub)), eps)
    f2 = _frame_matrix(Vector(tuple(ua2)), Vector(tuple(ub2)), eps)
    return Transform(f2 @ f.T)
