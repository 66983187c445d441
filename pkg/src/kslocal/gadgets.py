"""Forcing gadgets: finite vector sets whose diagrams force values on anchors.

Every constructor checks its own contract by propagating on the diagram of
the vectors it returns, and raises :class:`GadgetError` if the promised
values are not forced.  Contraction and expansion are computed in a fixed
reference frame and rotated onto the caller's anchors with :func:`map_pair`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Optional

import numpy as np

from .datasets import bundled_payload
from .diagram import Diagram, build_diagram, load_vectors
from .engine import propagate
from .errors import DomainError, GadgetError, OverlapMismatch, PreconditionViolated
from .linalg import Vector, cross, inner, line_distance, map_pair, overlap
from .scalars import EPSILON

INV_SQRT2 = 1.0 / math.sqrt(2.0)
THIRD = 1.0 / 3.0
LEMMA1_TOL = 1e-9
# Exact trajectories can land on 1/3 itself; rounding must not buy an extra
# step that would collapse the pair to numerically orthogonal vectors.
STOP_SLACK = 1e-9
# Smallest angle between c and b in a contraction; closer pairs leave the
# cross product b x c dominated by rounding.
MIN_SEPARATION = 1e-5


@dataclass(frozen=True)
class Gadget:
    """Vectors plus named anchors and the forcing contract they realise.

    ``assume`` and ``force`` are ``(anchor, value)`` pairs.  ``indefinite``
    lists anchors that cannot take any value once ``assume`` holds (both
    extensions contradict); only the 37-vector set uses it.
    """

    kind: str
    vectors: tuple
    anchors: dict
    assume: tuple
    force: tuple = ()
    indefinite: tuple = ()
    params: dict = field(default_factory=dict)
    epsilon: float = EPSILON

    def anchor(self, name: str) -> Vector:
        return self.vectors[self.anchors[name]]

    @cached_property
    def diagram(self) -> Diagram:
        labels = [None] * len(self.vectors)
        for name, idx in self.anchors.items():
            if labels[idx] is None:
                labels[idx] = name
        return build_diagram(self.vectors, labels, self.epsilon)

    def anchor_id(self, name: str, d: Optional[Diagram] = None) -> int:
        d = d or self.diagram
        oid = d.index_of(self.anchor(name))
        if oid is None:
            raise GadgetError(f"anchor {name!r} missing from diagram")
        return oid

    def contract_json(self) -> dict:
        out = {
            "assume": [list(p) for p in self.assume],
            "force": [list(p) for p in self.force],
        }
        if self.indefinite:
            out["indefinite"] = list(self.indefinite)
        return out

    def to_json(self) -> dict:
        d = self.diagram
        return {
            "gadget": self.kind,
            "params": self.params,
            "anchors": {name: self.anchor_id(name, d) for name in self.anchors},
            "contract": self.contract_json(),
            "diagram": d.to_json(),
        }


def verify_contract(g: Gadget, d: Optional[Diagram] = None) -> None:
    """Propagate the contract's assumptions on ``d`` (default: the gadget's
    own diagram) and raise unless the promised values are forced."""
    d = d or g.diagram
    seed = {g.anchor_id(n, d): v for n, v in g.assume}
    if g.indefinite:
        for name in g.indefinite:
            oid = g.anchor_id(name, d)
            for val in (0, 1):
                res = propagate(d, {**seed, oid: val})
                if not res.is_contradiction:
                    raise GadgetError(f"{g.kind}: {name}={val} is not refuted")
        return
    res = propagate(d, seed)
    if res.is_contradiction:
        raise GadgetError(f"{g.kind}: assumptions already contradictory")
    for name, val in g.force:
        got = res.assignment.get(g.anchor_id(name, d))
        if got != val:
            raise GadgetError(f"{g.kind}: expected {name}={val}, propagation gave {got}")


def _positive_pair(a: Vector, b: Vector) -> tuple[Vector, Vector]:
    """Float copies of ``a``, ``b`` with ``b`` flipped so their inner product is >= 0."""
    a, b = a.to_float(), b.to_float()
    if float(inner(a, b)) < 0:
        b = -b
    return a, b


def _vec(arr) -> Vector:
    return Vector(tuple(float(x) for x in arr))


@lru_cache(maxsize=None)
def lemma1_canonical() -> Gadget:
    """The exact 37-vector set with anchors ``a=(1,0,0)`` and ``b=(sqrt2,1,1)``.

    Assuming ``a=1``, both values of ``b`` propagate to a contradiction.
    """
    vectors, labels = load_vectors(bundled_payload("table1.json"))
    anchors = {"a": labels.index("P_a"), "b": labels.index("P_b")}
    g = Gadget("lemma1", tuple(vectors), anchors, (("a", 1),), indefinite=("b",), params={"overlap": INV_SQRT2})
    verify_contract(g)
    return g


def lemma1_for(a: Vector, b: Vector, tol: float = LEMMA1_TOL, epsilon: float = EPSILON) -> Gadget:
    """Rotated copy of the canonical set whose anchors sit on ``a`` and ``b``.

    Requires ``overlap(a, b) = 1/sqrt2`` within ``tol``.
    """
    p = overlap(a, b)
    if abs(p - INV_SQRT2) > tol:
        raise OverlapMismatch(f"lemma1 needs overlap 1/sqrt2, got {p:.12g}")
    base = lemma1_canonical()
    ca, cb = base.anchor("a").to_float(), base.anchor("b").to_float()
    a, b = _positive_pair(a, b)
    rot = map_pair(ca, cb, a, b, eps=max(tol, epsilon))
    vectors = tuple(rot(v.to_float()) for v in base.vectors)
    g = Gadget(
        "lemma1",
        vectors,
        dict(base.anchors),
        (("a", 1),),
        indefinite=("b",),
        params={"overlap": p},
        epsilon=epsilon,
    )
    verify_contract(g)
    return g


def contraction(a: Vector, b: Vector, z: float, epsilon: float = EPSILON) -> Gadget:
    """Seven vectors forcing ``c`` to 1 whenever ``a`` and ``b`` are both 1.

    ``c`` satisfies ``<a|c> = z`` for unit ``a``; ``z`` must lie strictly
    between ``overlap(a, b)`` and 1.  Of the two admissible ``c`` the one with
    positive second coordinate in the reference frame is used.
    """
    p = overlap(a, b)
    if not (0.0 < p < 1.0):
        raise PreconditionViolated(f"contraction needs 0 < overlap < 1, got {p!r}")
    if not (p < z < 1.0):
        raise PreconditionViolated(f"contraction needs overlap {p:.12g} < z={z!r} < 1")
    q = math.sqrt(1.0 - p * p)
    x = p * (1.0 - z * z) / (q * z)
    y = math.sqrt(max(0.0, 1.0 - x * x - z * z))

    fa = Vector((0.0, 0.0, 1.0))
    fb = Vector((q, 0.0, p))
    fc = Vector((x, y, z))
    if line_distance(fb, fc) < MIN_SEPARATION:
        # b x c would have no reliable direction
        raise PreconditionViolated(f"z={z!r} is too close to the overlap {p!r}: c nearly equals b")
    f_alpha = cross(fa, fc, epsilon)
    f_beta = cross(fb, fc, epsilon)
    f_alpha2 = cross(fa, f_alpha, epsilon)
    f_beta2 = cross(fb, f_beta, epsilon)

    ua, ub = _positive_pair(a, b)
    rot = map_pair(fa, fb, ua, ub, epsilon)
    vectors = (ua, ub) + tuple(rot(v) for v in (fc, f_alpha, f_beta, f_alpha2, f_beta2))
    anchors = {"a": 0, "b": 1, "c": 2, "alpha": 3, "beta": 4, "alpha'": 5, "beta'": 6}
    g = Gadget(
        "contraction",
        vectors,
        anchors,
        (("a", 1), ("b", 1)),
        force=(("c", 1),),
        params={"p": p, "z": z, "x": x, "y": y},
        epsilon=epsilon,
    )
    verify_contract(g)
    return g


def expansion(a: Vector, b: Vector, epsilon: float = EPSILON) -> Gadget:
    """Twelve vectors forcing ``c`` and ``d`` to 1 whenever ``a`` and ``b`` are.

    The new pair is further apart: ``overlap(c, d) = 3 - 4/(alpha + 1)`` for
    ``alpha = overlap(a, b)`` in (1/3, 1).  Besides the auxiliaries
    ``e, f, g, h`` orthogonal to an anchor and to ``c`` or ``d``, the set
    contains the four vectors completing ``{a, e}``, ``{b, f}``, ``{a, g}``
    and ``{b, h}`` to full orthogonal triples.
    """
    alpha = overlap(a, b)
    if not (THIRD < alpha < 1.0):
        raise PreconditionViolated(f"expansion needs 1/3 < overlap < 1, got {alpha!r}")
    # 1 - alpha from the chord keeps full relative precision as alpha -> 1
    gap = 0.5 * line_distance(a, b) ** 2
    beta = math.sqrt((2.0 - gap) / 2.0)
    gamma = math.sqrt(2.0 * (1.0 - gap) / (2.0 - gap))
    sb = math.sqrt(gap / 2.0)  # sqrt(1 - beta^2)
    sg = math.sqrt(gap / (2.0 - gap))  # sqrt(1 - gamma^2)

    fa = Vector((sb, 0.0, beta))
    fb = Vector((-sb, 0.0, beta))
    fc = Vector((0.0, sg, gamma))
    fd = Vector((0.0, -sg, gamma))
    fe, ff = cross(fa, fc, epsilon), cross(fb, fc, epsilon)
    fg, fh = cross(fa, fd, epsilon), cross(fb, fd, epsilon)
    for u, v, name in ((fe, ff, "e,f"), (fg, fh, "g,h")):
        if abs(float(inner(u, v))) > epsilon * u.norm() * v.norm():
            raise GadgetError(f"expansion: auxiliaries {name} are not orthogonal")
    completions = (cross(fa, fe, epsilon), cross(fb, ff, epsilon), cross(fa, fg, epsilon), cross(fb, fh, epsilon))

    ua, ub = _positive_pair(a, b)
    rot = map_pair(fa, fb, ua, ub, epsilon)
    vectors = (ua, ub) + tuple(rot(v) for v in (fc, fd, fe, ff, fg, fh) + completions)
    names = ("a", "b", "c", "d", "e", "f", "g", "h", "axe", "bxf", "axg", "bxh")
    g = Gadget(
        "expansion",
        vectors,
        {n: i for i, n in enumerate(names)},
        (("a", 1), ("b", 1)),
        force=(("c", 1), ("d", 1)),
        params={"alpha": alpha, "beta": beta, "gamma": gamma, "overlap_cd": 2.0 * gamma * gamma - 1.0},
        epsilon=epsilon,
    )
    verify_contract(g)
    return g


def overlap_step(u: float) -> float:
    """Overlap of the pair produced by one expansion of a pair with overlap ``u``."""
    if not (THIRD < u < 1.0):
        raise DomainError(f"overlap_step is defined on (1/3, 1), got {u!r}")
    return 3.0 - 4.0 / (u + 1.0)


def iteration_bound(alpha0: float) -> int:
    """Smallest integer above ``(alpha0 - 1/3) / (alpha0 - s(alpha0))``.

    Since ``u - s(u)`` decreases on (1/3, 1), that many expansions always
    bring the overlap to 1/3 or below.
    """
    gap = alpha0 - overlap_step(alpha0)
    return math.floor((alpha0 - THIRD) / gap) + 1


@dataclass(frozen=True)
class OverlapTrajectory:
    alphas: tuple

    @property
    def k(self) -> int:
        return len(self.alphas) - 1


def overlap_trajectory(alpha0: float) -> OverlapTrajectory:
    """Closed-form overlaps ``alpha0, s(alpha0), ...`` down to the first value <= 1/3
    (up to ``STOP_SLACK``)."""
    alphas = [alpha0]
    cap = iteration_bound(alpha0)
    while alphas[-1] > THIRD + STOP_SLACK:
        if len(alphas) > cap:
            raise GadgetError(f"trajectory from {alpha0!r} exceeded its bound {cap}")
        alphas.append(overlap_step(alphas[-1]))
    return OverlapTrajectory(tuple(alphas))


# Above this many vectors the union is not re-verified as one diagram; each
# step's contract was verified on its own and forcing composes under union.
UNION_VERIFY_LIMIT = 4000


def iterate_expansion(a: Vector, b: Vector, epsilon: float = EPSILON) -> tuple[Gadget, OverlapTrajectory]:
    """Chain expansions from ``(a, b)`` until the forced pair has overlap <= 1/3.

    The returned gadget is the union of every step; its anchors ``c``/``d``
    are the final pair and ``c<i>``/``d<i>`` the intermediate ones.
    """
    alpha0 = overlap(a, b)
    if not (THIRD < alpha0 < 1.0):
        raise PreconditionViolated(f"iteration needs 1/3 < overlap < 1, got {alpha0!r}")
    cap = iteration_bound(alpha0)
    ua, ub = _positive_pair(a, b)
    vectors = [ua, ub]
    anchors = {"a": 0, "b": 1}
    alphas = [alpha0]
    c, d = ua, ub
    i = 0
    while alphas[-1] > THIRD + STOP_SLACK:
        if i >= cap:
            raise GadgetError(f"iteration exceeded its bound {cap} (alpha={alphas[-1]!r})")
        step = expansion(c, d, epsilon)
        c, d = step.anchor("c"), step.anchor("d")
        new = overlap(c, d)
        if not new < alphas[-1]:
            raise GadgetError(f"iteration stalled at overlap {new!r}")
        base = len(vectors)
        vectors.extend(step.vectors[2:])
        i += 1
        anchors[f"c{i}"] = base + step.anchors["c"] - 2
        anchors[f"d{i}"] = base + step.anchors["d"] - 2
        alphas.append(new)
    anchors["c"], anchors["d"] = anchors[f"c{i}"], anchors[f"d{i}"]
    g = Gadget(
        "iteration",
        tuple(vectors),
        anchors,
        (("a", 1), ("b", 1)),
        force=(("c", 1), ("d", 1)),
        params={"k": i, "alphas": list(alphas), "bound": cap},
        epsilon=epsilon,
    )
    if len(vectors) <= UNION_VERIFY_LIMIT:
        verify_contract(g)
    return g, OverlapTrajectory(tuple(alphas))


def zero_branch(psi: Vector, phi: Vector, epsilon: float = EPSILON) -> Gadget:
    """Two contexts turning ``v(psi)=1, v(phi)=0`` into ``v(phi')=1``.

    In a frame with ``psi=(1,0,0)`` and ``phi=(p,q,0)`` this adds
    ``(0,1,0)``, ``(0,0,1)`` and ``phi'=(q,-p,0)``, so ``overlap(psi, phi') = q``.
    """
    p = overlap(psi, phi)
    if not (0.0 < p < 1.0):
        raise PreconditionViolated(f"zero branch needs 0 < overlap < 1, got {p!r}")
    upsi, uphi = _positive_pair(psi, phi)
    e1 = upsi.array() / np.linalg.norm(upsi.array())
    f = uphi.array() / np.linalg.norm(uphi.array())
    rest = f - (f @ e1) * e1
    e2 = rest / np.linalg.norm(rest)
    e3 = np.cross(e1, e2)
    q = math.sqrt(1.0 - p * p)
    phi_prime = _vec(q * e1 - p * e2)
    vectors = (upsi, uphi, _vec(e2), _vec(e3), phi_prime)
    g = Gadget(
        "zero-branch",
        vectors,
        {"psi": 0, "phi": 1, "alpha": 2, "beta": 3, "phi'": 4},
        (("psi", 1), ("phi", 0)),
        force=(("phi'", 1),),
        params={"p": p, "q": q},
        epsilon=epsilon,
    )
    verify_contract(g)
    return g
