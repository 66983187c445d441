from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from kslocal.errors import DegenerateInput, OverlapMismatch, ZeroVector
from kslocal.linalg import (
    Vector,
    cross,
    frame_from_pair,
    inner,
    is_orthogonal,
    map_pair,
    normalize_canonical,
    overlap,
    same_line,
)
from kslocal.scalars import ROOT2, QSqrt2

S = math.sqrt(2)

ints = st.integers(-6, 6)
exact_coord = st.builds(QSqrt2, ints, ints)
exact_vec = st.tuples(exact_coord, exact_coord, exact_coord).map(Vector)
float_vec = st.tuples(*[st.floats(-1, 1, allow_nan=False)] * 3).map(Vector)


def V(*xs):
    return Vector.of(*xs)


def test_inner_examples():
    assert inner(V(1, 0, 0), V(0, 1, 1)) == 0
    assert inner(V(ROOT2, 1, 1), V(ROOT2, -1, -1)) == 0
    assert inner(V(1, 0, 0), V(1, 0, 0)) == 1


def test_is_orthogonal_examples():
    assert is_orthogonal(V(0, 1, 1), V(0, 1, -1))
    assert not is_orthogonal(V(1, 0, 0), V(ROOT2, 1, 1))
    u = V(1, 2, 3)
    assert not is_orthogonal(u, u)
    assert overlap(V(1, 0, 0), V(ROOT2, 1, 1)) == pytest.approx(1 / S, abs=1e-15)


def test_float_orthogonality_is_relative():
    # scaling either vector does not change the verdict
    big = Vector((1e6, 0.0, 0.0))
    assert not is_orthogonal(big, Vector((1e-5, 1.0, 0.0)))
    assert is_orthogonal(big, Vector((1e-11, 1.0, 0.0)))
    assert is_orthogonal(Vector((1e-6, 0.0, 0.0)), Vector((1e-11, 1.0, 0.0)))
    # just above vs just below the tolerance
    assert is_orthogonal(Vector((1.0, 0.0, 0.0)), Vector((0.5e-10, 1.0, 0.0)))
    assert not is_orthogonal(Vector((1.0, 0.0, 0.0)), Vector((2e-10, 1.0, 0.0)))


def test_cross_examples():
    x, y, z = 0.3, 0.4, math.sqrt(1 - 0.25)
    assert cross(Vector((0.0, 0.0, 1.0)), Vector((x, y, z))).coords == pytest.approx((-y, x, 0.0))
    p, q = 0.6, 0.8
    got = cross(Vector((q, 0.0, p)), Vector((x, y, z))).coords
    assert got == pytest.approx((-p * y, p * x - q * z, q * y))
    with pytest.raises(DegenerateInput):
        cross(V(1, 0, 0), V(2, 0, 0))


def test_normalize_examples():
    assert normalize_canonical(V(0, -2, 2)) == V(0, 1, -1)
    assert normalize_canonical(V(-ROOT2, -1, -1)) == V(ROOT2, 1, 1)
    assert normalize_canonical(V(QSqrt2(0, 2), 1, -1)) == V(QSqrt2(0, 2), 1, -1)
    with pytest.raises(ZeroVector):
        normalize_canonical(V(0, 0, 0))
    f = normalize_canonical(Vector((0.0, -3.0, 4.0)))
    assert f.coords == pytest.approx((0.0, 0.6, -0.8))


@given(exact_vec, st.builds(QSqrt2, ints, ints))
def test_normalize_projective_invariance(v, lam):
    assume(not v.is_zero() and lam)
    c = normalize_canonical(v)
    assert normalize_canonical(c) == c
    assert normalize_canonical(v.scale(lam)) == c
    assert same_line(v, c)


@given(exact_vec, exact_vec)
def test_cross_is_orthogonal_exact(u, v):
    try:
        w = cross(u, v)
    except DegenerateInput:
        return
    assert inner(w, u) == 0 and inner(w, v) == 0


@given(float_vec, float_vec)
def test_cross_is_orthogonal_float(u, v):
    assume(u.norm() > 1e-3 and v.norm() > 1e-3)
    try:
        w = cross(u, v)
    except DegenerateInput:
        return
    assert abs(inner(w, u)) <= 1e-10 * w.norm() * u.norm()
    assert abs(inner(w, v)) <= 1e-10 * w.norm() * v.norm()


def test_frame_examples():
    p, q = 0.6, 0.8
    e = frame_from_pair(Vector((1.0, 0.0, 0.0)), Vector((p, q, 0.0)))
    assert np.allclose([x.array() for x in e], np.eye(3))
    e = frame_from_pair(Vector((0.0, 0.0, 1.0)), Vector((q, 0.0, p)))
    assert np.allclose([x.array() for x in e], [[0, 0, 1], [1, 0, 0], [0, 1, 0]])
    with pytest.raises(DegenerateInput):
        frame_from_pair(Vector((1.0, 2.0, 3.0)), Vector((1.0, 2.0, 3.0)))


def test_map_pair_identity_and_rotated():
    a, b = Vector((1.0, 0.0, 0.0)), Vector((S / 2, 0.5, 0.5))
    r = map_pair(a, b, a, b)
    assert np.allclose(r.matrix, np.eye(3), atol=1e-14)

    rng = np.random.default_rng(7)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    a2, b2 = Vector(tuple(q @ a.array())), Vector(tuple(q @ b.array()))
    r = map_pair(a, b, a2, b2)
    assert r.is_orthogonal(1e-12)
    assert np.allclose(r(a).array(), a2.array(), atol=1e-12)
    assert np.allclose(r(b).array(), b2.array(), atol=1e-12)

    with pytest.raises(OverlapMismatch):
        map_pair(a, Vector((0.5, math.sqrt(0.75), 0.0)), a, Vector((0.6, 0.8, 0.0)))


def test_map_pair_flips_to_the_same_line():
    a, b = Vector((1.0, 0.0, 0.0)), Vector((0.5, math.sqrt(0.75), 0.0))
    b_neg = Vector((-0.5, 0.0, math.sqrt(0.75)))
    r = map_pair(a, b, a, b_neg)
    assert same_line(r(b), b_neg)


unit = st.tuples(*[st.floats(-1, 1, allow_nan=False)] * 3).filter(lambda t: np.linalg.norm(t) > 0.1)


@given(unit, unit, unit, unit)
def test_map_pair_preserves_inner_products(a, b, u, v):
    a, b = np.array(a) / np.linalg.norm(a), np.array(b) / np.linalg.norm(b)
    assume(abs(a @ b) < 0.99)
    rng = np.random.default_rng(abs(hash((tuple(a), tuple(b)))) % 2**32)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    va, vb = Vector(tuple(a)), Vector(tuple(b))
    r = map_pair(va, vb, Vector(tuple(q @ a)), Vector(tuple(q @ b)))
    assert r.is_orthogonal(1e-10)
    vu, vv = Vector(u), Vector(v)
    assert inner(r(vu), r(vv)) == pytest.approx(inner(vu, vv), abs=1e-10)


def test_vector_json_roundtrip():
    v = V(ROOT2, QSqrt2(1, -1), 0)
    assert Vector.from_json(v.to_json()) == v
    w = Vector((0.1, -0.2, 1e-17))
    assert Vector.from_json(w.to_json()) == w


def test_mixed_coordinates_become_float():
    v = Vector((QSqrt2(1), 0.5, 0))
    assert not v.exact and all(isinstance(c, float) for c in v.coords)
