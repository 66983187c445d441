"""End-to-end localisation: a finite diagram plus a two-branch certificate.

Given ``psi`` and ``phi`` with ``0 < overlap < 1``, :func:`localize` builds a
set of observables on which ``v(psi)=1`` together with either value of
``phi`` propagates to a contradiction.

Value-1 branch (refute ``v(phi)=1``):

* overlap 1/sqrt2: the rotated 37-vector set directly;
* overlap below 1/sqrt2: contract to a partner at 1/sqrt2, then the 37-set;
* overlap above 1/sqrt2: iterate expansions down to overlap <= 1/3, contract
  the resulting pair to 1/sqrt2, then the 37-set.

Value-0 branch: two contexts force ``phi' ⟂ phi`` to 1, and the value-1
machinery is reused on ``(psi, phi')``, whose overlap is ``sqrt(1 - p^2)``.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Mapping

from .diagram import Diagram, build_diagram
from .engine import Conflict, DeductionStep, propagate
from .errors import DegenerateOverlap, GadgetError, MalformedInput, ZeroVector
from .gadgets import (
    INV_SQRT2,
    THIRD,
    Gadget,
    STOP_SLACK,
    contraction,
    iterate_expansion,
    lemma1_for,
    zero_branch,
)
from .linalg import Vector, is_orthogonal, overlap, same_line
from .scalars import EPSILON

log = logging.getLogger(__name__)

DIRECT_WINDOW = 1e-9
DEGENERATE_WINDOW = 1e-9


class StarClass(enum.Enum):
    FORCED1 = "forced1"
    FORCED0 = "forced0"
    INDEFINITE = "indefinite"


@dataclass(frozen=True)
class BranchProof:
    assumption: tuple
    trace: tuple
    contradiction: Conflict

    def to_json(self) -> dict:
        return {
            "assumption": list(self.assumption),
            "trace": [s.to_json() for s in self.trace],
            "contradiction": self.contradiction.to_json(),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> BranchProof:
        try:
            oid, val = data["assumption"]
            return cls(
                (int(oid), int(val)),
                tuple(DeductionStep.from_json(s) for s in data["trace"]),
                Conflict.from_json(data["contradiction"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad branch proof: {exc}") from exc


@dataclass(frozen=True)
class Certificate:
    psi: int
    phi: int
    overlap: float
    branches: tuple
    construction_log: tuple = ()
    epsilon: float = EPSILON
    paths: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "psi": self.psi,
            "phi": self.phi,
            "overlap": self.overlap,
            "epsilon": self.epsilon,
            "paths": dict(self.paths),
            "construction_log": [dict(e) for e in self.construction_log],
            "branches": [b.to_json() for b in self.branches],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> Certificate:
        try:
            return cls(
                int(data["psi"]),
                int(data["phi"]),
                float(data["overlap"]),
                tuple(BranchProof.from_json(b) for b in data["branches"]),
                tuple(data.get("construction_log", ())),
                float(data.get("epsilon", EPSILON)),
                dict(data.get("paths", {})),
            )
        except MalformedInput:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad certificate: {exc}") from exc


def classify_star(psi: Vector, others: list, eps: float = EPSILON) -> list:
    """Which observables have their value fixed once ``v(psi)=1``.

    Same line as ``psi``: forced to 1.  Orthogonal: forced to 0.  Anything
    else is value indefinite, by the localisation construction.
    """
    if psi.is_zero():
        raise ZeroVector("psi is the zero vector")
    out = []
    for v in others:
        if v.is_zero():
            raise ZeroVector("zero vector in star")
        if same_line(psi, v, eps):
            out.append(StarClass.FORCED1)
        elif is_orthogonal(psi, v, eps):
            out.append(StarClass.FORCED0)
        else:
            out.append(StarClass.INDEFINITE)
    return out


def refute_both_one(psi: Vector, phi: Vector, epsilon: float = EPSILON) -> tuple[list, str]:
    """Gadgets on which ``v(psi)=v(phi)=1`` propagates to a contradiction.

    Returns the gadgets in application order and a short path description.
    """
    p = overlap(psi, phi)
    if abs(p - INV_SQRT2) <= DIRECT_WINDOW:
        return [lemma1_for(psi, phi, epsilon=epsilon)], "direct"
    if p < INV_SQRT2:
        con = contraction(psi, phi, INV_SQRT2, epsilon)
        return [con, lemma1_for(psi, con.anchor("c"), epsilon=epsilon)], "contract+lemma1"
    it, traj = iterate_expansion(psi, phi, epsilon)
    c, d = it.anchor("c"), it.anchor("d")
    pk = overlap(c, d)
    if not (0.0 < pk <= THIRD + STOP_SLACK):
        raise GadgetError(f"iteration ended at overlap {pk!r}, outside (0, 1/3]")
    if pk < 1e3 * epsilon:
        raise GadgetError(f"iteration ended at overlap {pk!r}, too close to orthogonal for epsilon={epsilon}")
    con = contraction(c, d, INV_SQRT2, epsilon)
    lem = lemma1_for(c, con.anchor("c"), epsilon=epsilon)
    return [it, con, lem], f"iterate({traj.k})+contract+lemma1"


def _log_entry(branch: int, g: Gadget, d: Diagram) -> dict:
    anchors = {}
    for name in g.anchors:
        if g.kind == "iteration" and name not in ("a", "b", "c", "d"):
            continue
        oid = d.index_of(g.anchor(name))
        if oid is None:
            raise GadgetError(f"{g.kind} anchor {name!r} lost in the merged diagram")
        anchors[name] = oid
    params = dict(g.params)
    return {"branch": branch, "gadget": g.kind, "params": params, "anchors": anchors}


def localize(psi: Vector, phi: Vector, epsilon: float = EPSILON) -> tuple[Diagram, Certificate]:
    """Diagram and certificate showing ``phi`` is value indefinite when ``v(psi)=1``.

    Raises :class:`DegenerateOverlap` when ``phi`` commutes with or equals
    ``psi``; there ``phi`` is value definite, see :func:`classify_star`.
    """
    p = overlap(psi, phi)
    if p <= DEGENERATE_WINDOW or p >= 1.0 - DEGENERATE_WINDOW:
        cls = classify_star(psi, [phi], epsilon)[0]
        if cls is StarClass.INDEFINITE:
            cls = StarClass.FORCED0 if p < 0.5 else StarClass.FORCED1
        raise DegenerateOverlap(f"overlap {p!r} is degenerate: phi is {cls.value}", cls)

    one_gadgets, path1 = refute_both_one(psi, phi, epsilon)
    zb = zero_branch(psi, phi, epsilon)
    zero_gadgets, path0 = refute_both_one(psi, zb.anchor("phi'"), epsilon)
    log.info("branch 1: %s, branch 0: zero-branch+%s", path1, path0)

    psi_f, phi_f = psi.to_float(), phi.to_float()
    vectors = [psi_f, phi_f]
    labels = ["psi", "phi"]
    tagged = [(1, g) for g in one_gadgets] + [(0, zb)] + [(0, g) for g in zero_gadgets]
    for _, g in tagged:
        vectors.extend(g.vectors)
        labels.extend([None] * len(g.vectors))
    # gadgets share anchors, so merges are expected here
    d = build_diagram(vectors, labels, epsilon, merge_log_level=logging.INFO)
    for msg in d.diagnostics:
        log.debug(msg)

    psi_id, phi_id = d.resolve("psi"), d.resolve("phi")
    construction = [_log_entry(branch, g, d) for branch, g in tagged]

    branches = []
    for val in (1, 0):
        res = propagate(d, {psi_id: 1, phi_id: val})
        if not res.is_contradiction:
            raise GadgetError(f"assumption phi={val} did not propagate to a contradiction")
        branches.append(BranchProof((phi_id, val), res.trace, res.conflict))

    cert = Certificate(
        psi_id,
        phi_id,
        overlap(d.vector(psi_id), d.vector(phi_id)),
        tuple(branches),
        tuple(construction),
        epsilon,
        {"branch1": path1, "branch0": f"zero-branch+{path0}"},
    )
    log.info("localised with %d observables, %d contexts", len(d), len(d.contexts))
    return d, cert


def unit_pair(p: float) -> tuple[Vector, Vector]:
    """A convenient ``(psi, phi)`` with overlap ``p``: ``(1,0,0)`` and ``(p, sqrt(1-p^2), 0)``."""
    return Vector((1.0, 0.0, 0.0)), Vector((p, math.sqrt(1.0 - p * p), 0.0))
