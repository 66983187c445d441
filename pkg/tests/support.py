"""Helpers shared by the engine tests and the acceptance suite."""

from __future__ import annotations

import random

from kslocal.diagram import Diagram, build_diagram
from kslocal.engine import RULE_A, RULE_B, SEED, propagate
from kslocal.linalg import Vector
from kslocal.scalars import ROOT2


def replay(d: Diagram, trace) -> tuple[dict, bool]:
    """Test-side replay: returns the values and whether the last step conflicts."""
    values: dict = {}
    for k, s in enumerate(trace):
        oid, val = s.conclusion
        if s.rule == SEED:
            assert not s.premises
        else:
            ctx = d.contexts[s.context]
            assert oid in ctx and all(p in ctx for p, _ in s.premises)
            assert all(values.get(p) == v for p, v in s.premises)
            if s.rule == RULE_A:
                assert len(s.premises) == 1 and s.premises[0][1] == 1 and val == 0
            else:
                assert s.rule == RULE_B and val == 1
                assert {p for p, _ in s.premises} | {oid} == set(ctx)
                assert all(v == 0 for _, v in s.premises)
        if oid in values and values[oid] != val:
            assert k == len(trace) - 1, "conflict before the final step"
            return values, True
        values[oid] = val
    return values, False


def random_diagram(rng: random.Random, n: int = 12) -> Diagram:
    pool = [-1, 0, 1, 2, ROOT2]
    vecs = []
    while len(vecs) < n:
        v = Vector.of(*(rng.choice(pool) for _ in range(3)))
        if not v.is_zero():
            vecs.append(v)
    return build_diagram(vecs)


def check_confluent(d: Diagram, seed: dict, orders: int, rng: random.Random) -> str:
    """Propagate under ``orders`` random rule orders; returns the common verdict."""
    ref = propagate(d, seed)
    for _ in range(orders):
        other = propagate(d, seed, rng=random.Random(rng.random()))
        assert other.kind == ref.kind
        if not ref.is_contradiction:
            assert other.assignment == ref.assignment
        replay(d, other.trace)
    return ref.kind


def small_diagram_suite(t1: Diagram, rng: random.Random) -> list:
    """Twenty ``(diagram, seed)`` cases.

    Ten random-vector diagrams, then ten variants of the 37-vector set: five
    with a few observables removed and five with random vectors added.  Random
    diagrams rarely contradict, so the supersets supply the contradictions.
    """
    cases = []
    while len(cases) < 10:
        d = random_diagram(rng)
        if not d.contexts:
            continue
        cases.append((d, {i: rng.randint(0, 1) for i in rng.sample(d.ids, k=2)}))
    anchors = {t1.resolve("a"), t1.resolve("b")}
    others = [o for o in t1.observables if o.id not in anchors]
    for k in range(10):
        if k < 5:
            drop = set(rng.sample(range(len(others)), k=rng.randint(1, 4)))
            kept = [t1.observable(i) for i in sorted(anchors)] + [o for j, o in enumerate(others) if j not in drop]
            vecs, labs = [o.vector for o in kept], [o.label for o in kept]
        else:
            extra = random_diagram(rng, 6)
            vecs = [o.vector for o in t1.observables] + [o.vector for o in extra.observables]
            labs = [o.label for o in t1.observables] + [None] * len(extra)
        cases.append((build_diagram(vecs, labs), {"a": 1, "b": rng.randint(0, 1)}))
    return cases
