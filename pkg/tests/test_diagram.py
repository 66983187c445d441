from __future__ import annotations

import itertools
import logging
import math
import random
import re
import time

import pytest

from conftest import load_golden
from kslocal.diagram import EMPTY, Diagram, build_diagram, export_dot, load_vectors, merge
from kslocal.engine import propagate
from kslocal.errors import MalformedInput, UnknownObservable, ZeroVector
from kslocal.gadgets import contraction
from kslocal.linalg import Vector, is_orthogonal, normalize_canonical
from kslocal.scalars import ROOT2


def V(*xs):
    return Vector.of(*xs)


def labelled_contexts(d: Diagram) -> set:
    return {frozenset(d.label(i) for i in c) for c in d.contexts}


def shape(d: Diagram) -> tuple:
    """Id-free description: canonical vectors and contexts as vector sets."""
    key = lambda v: tuple(round(float(c), 9) for c in normalize_canonical(v.to_float()).coords)
    vecs = frozenset(key(o.vector) for o in d.observables)
    ctxs = frozenset(frozenset(key(d.vector(i)) for i in c) for c in d.contexts)
    return vecs, ctxs


def test_table1_contexts_match_golden(t1):
    golden = {frozenset(c) for c in load_golden("table2_contexts.json")["contexts"].values()}
    assert len(t1) == 37
    assert len(t1.contexts) == 26
    assert labelled_contexts(t1) == golden


def test_table1_is_exact(t1):
    assert t1.mode == "exact"
    assert all(o.vector.exact for o in t1.observables)


def test_small_examples():
    d = build_diagram([V(1, 0, 0), V(0, 1, 0), V(0, 0, 1)])
    assert (len(d), len(d.contexts)) == (3, 1)
    d = build_diagram([V(1, 0, 0), V(0, 1, 0)])
    assert (len(d), len(d.contexts)) == (2, 0)
    with pytest.raises(ZeroVector):
        build_diagram([V(1, 0, 0), V(0, 0, 0)])
    with pytest.raises(MalformedInput):
        build_diagram([])


def test_every_context_is_orthogonal(t1, localized):
    for d in [t1] + [pair[0] for pair in localized.values()]:
        for c in d.contexts:
            assert len(c) == 3
            for i, j in itertools.combinations(c, 2):
                assert is_orthogonal(d.vector(i), d.vector(j), d.epsilon)


def test_contexts_are_all_triples():
    rng = random.Random(3)
    coords = [-1, 0, 1, ROOT2]
    vecs = []
    while len(vecs) < 14:
        v = V(*(rng.choice(coords) for _ in range(3)))
        if not v.is_zero():
            vecs.append(v)
    d = build_diagram(vecs)
    brute = {
        c for c in itertools.combinations(d.ids, 3)
        if all(is_orthogonal(d.vector(i), d.vector(j)) for i, j in itertools.combinations(c, 2))
    }
    assert set(d.contexts) == brute


def test_duplicates_merge_with_warning(caplog):
    with caplog.at_level(logging.WARNING, logger="kslocal.diagram"):
        d = build_diagram([V(1, 0, 0), V(-2, 0, 0), V(0, 1, 0)], ["x", "y", "z"])
    assert len(d) == 2
    assert d.label(d.resolve("x")) == "x"
    assert "merged 1 duplicate" in caplog.text
    assert any("duplicate" in m for m in d.diagnostics)


def test_determinism_and_order_independence(t1):
    vectors, labels = load_vectors(load_golden_vectors())
    rng = random.Random(11)
    idx = list(range(len(vectors)))
    rng.shuffle(idx)
    d2 = build_diagram([vectors[i] for i in idx], [labels[i] for i in idx])
    assert d2.observables == t1.observables
    assert d2.contexts == t1.contexts


def load_golden_vectors():
    from kslocal.datasets import bundled_payload

    return bundled_payload("table1.json")


def test_resolve_by_label_id_and_short_name(t1):
    a = t1.resolve("P_a")
    assert t1.resolve("a") == a == t1.resolve(a)
    # strings try labels first: "7" is P_7, the integer 7 is an id
    assert t1.label(t1.resolve("7")) == "P_7"
    unlabelled = build_diagram([V(1, 0, 0), V(0, 1, 0)])
    assert unlabelled.resolve("1") == 1
    with pytest.raises(UnknownObservable):
        t1.resolve("P_99")
    with pytest.raises(UnknownObservable):
        t1.resolve(10_000)


def test_json_roundtrip(t1, localized):
    assert Diagram.from_json(t1.to_json()) == t1
    d = localized[0.5][0]
    back = Diagram.from_json(d.to_json())
    assert back.contexts == d.contexts
    assert [o.vector for o in back.observables] == [o.vector for o in d.observables]


def test_from_json_rejects_garbage():
    with pytest.raises(MalformedInput):
        Diagram.from_json({"observables": [{"id": 0}], "contexts": []})
    with pytest.raises(MalformedInput):
        Diagram.from_json({"mode": "fuzzy", "observables": [], "contexts": []})


def test_merge_identities(t1):
    assert merge(t1, t1) == t1
    assert merge(EMPTY, t1) == t1
    assert merge(t1, EMPTY) == t1


def test_merge_with_contraction_counts(t1):
    a = Vector((1.0, 0.0, 0.0))
    b = Vector((0.3, math.sqrt(1 - 0.09), 0.0))
    g = contraction(a, b, 0.6)
    merged = merge(t1, g.diagram)
    shared = sum(1 for o in g.diagram.observables if t1.index_of(o.vector) is not None)
    assert shared == 1
    assert len(merged) == 37 + len(g.diagram) - shared
    assert len(merged.contexts) >= 26 + 3


def test_merge_commutative_and_associative():
    rng = random.Random(5)

    def rnd():
        vs = [Vector(tuple(float(rng.choice([-1, 0, 1, 2])) for _ in range(3))) for _ in range(6)]
        return build_diagram([v for v in vs if not v.is_zero()] or [Vector((1.0, 0.0, 0.0))])

    for _ in range(10):
        x, y, z = rnd(), rnd(), rnd()
        assert shape(merge(x, y)) == shape(merge(y, x))
        assert shape(merge(merge(x, y), z)) == shape(merge(x, merge(y, z)))


def test_merge_can_create_new_contexts():
    d1 = build_diagram([V(1, 0, 0), V(0, 1, 0)])
    d2 = build_diagram([V(0, 0, 1)])
    assert len(merge(d1, d2).contexts) == 1


def test_near_threshold_diagnostic():
    d = build_diagram([Vector((1.0, 0.0, 0.0)), Vector((5e-10, 1.0, 0.0)), Vector((0.0, 0.0, 1.0))])
    assert any("near-orthogonal" in m for m in d.diagnostics)
    assert len(d.contexts) == 0


def test_cabello_structure(cab):
    assert len(cab) == 18 and cab.dimension == 4
    assert len(cab.contexts) == 9
    assert all(len(c) == 4 for c in cab.contexts)
    counts = {i: 0 for i in cab.ids}
    for c in cab.contexts:
        for m in c:
            counts[m] += 1
    assert set(counts.values()) == {2}


def test_table1_build_time():
    start = time.perf_counter()
    vectors, labels = load_vectors(load_golden_vectors())
    build_diagram(vectors, labels)
    assert time.perf_counter() - start < 1.0


def _nodes_and_edges(dot: str) -> tuple[int, int]:
    nodes = len(re.findall(r"^\s*o\d+ \[", dot, re.M))
    hyper = len(re.findall(r"^\s*c\d+ \[shape=point", dot, re.M))
    return nodes, hyper


def test_export_dot_small_and_table1(t1):
    d = build_diagram([V(1, 0, 0), V(0, 1, 0), V(0, 0, 1)])
    assert _nodes_and_edges(export_dot(d)) == (3, 1)
    dot = export_dot(t1)
    assert dot.startswith("graph") and dot.rstrip().endswith("}")
    assert _nodes_and_edges(dot) == (37, 26)
    assert "shape=box" not in dot


def test_export_dot_with_both_one_closure(t1):
    res = propagate(t1, {"a": 1, "b": 1})
    dot = export_dot(t1, res.assignment)
    boxed = set(re.findall(r'label="([^"]+)", shape=box', dot))
    assert boxed == {"P_a", "P_b", "P_10", "P_11", "P_16", "P_17", "P_22", "P_23"}
    hollow = re.findall(r'label="([^"]+)", shape=circle, style=solid', dot)
    assert len(hollow) == 37 - len(res.assignment)
