"""Observable sets and their context hypergraphs (Greechie diagrams).

A context in dimension ``n`` is a set of ``n`` pairwise orthogonal
observables.  :func:`build_diagram` always enumerates *every* such set over
the observables it is given, never a hand-picked subset.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import MalformedInput, UnknownObservable, ZeroVector
from .linalg import Vector, inner, normalize_canonical, overlap
from .scalars import EPSILON

log = logging.getLogger(__name__)

Context = tuple  # sorted tuple of observable ids


@dataclass(frozen=True)
class Observable:
    id: int
    vector: Vector
    label: Optional[str] = None


@dataclass(frozen=True)
class Diagram:
    observables: tuple
    contexts: tuple
    mode: str = "exact"
    epsilon: float = EPSILON
    dimension: int = 3
    diagnostics: tuple = field(default=(), compare=False)

    def __len__(self):
        return len(self.observables)

    @cached_property
    def _by_id(self) -> dict:
        return {o.id: o for o in self.observables}

    @cached_property
    def _by_label(self) -> dict:
        out = {}
        for o in self.observables:
            if o.label is not None:
                out.setdefault(o.label, o.id)
        return out

    @cached_property
    def incidence(self) -> dict:
        """Observable id -> list of context indices containing it."""
        inc = {o.id: [] for o in self.observables}
        for ci, ctx in enumerate(self.contexts):
            for m in ctx:
                inc.setdefault(m, []).append(ci)
        return inc

    @cached_property
    def _unit_array(self) -> np.ndarray:
        if not self.observables:
            return np.zeros((0, self.dimension))
        arr = np.array([o.vector.array() for o in self.observables])
        return arr / np.linalg.norm(arr, axis=1, keepdims=True)

    @property
    def ids(self) -> list:
        return [o.id for o in self.observables]

    def observable(self, oid: int) -> Observable:
        try:
            return self._by_id[oid]
        except KeyError:
            raise UnknownObservable(oid) from None

    def vector(self, oid: int) -> Vector:
        return self.observable(oid).vector

    def label(self, oid: int) -> Optional[str]:
        return self.observable(oid).label

    def resolve(self, key) -> int:
        """Map an id or a label to an id; a bare name like ``"a"`` also finds ``"P_a"``."""
        if isinstance(key, int):
            if key in self._by_id:
                return key
            raise UnknownObservable(key)
        text = str(key).strip()
        for cand in (text, f"P_{text}"):
            if cand in self._by_label:
                return self._by_label[cand]
        if text.lstrip("-").isdigit() and int(text) in self._by_id:
            return int(text)
        raise UnknownObservable(key)

    def index_of(self, v: Vector) -> Optional[int]:
        """Id of the observable on the same line as ``v``, or None."""
        if not self.observables:
            return None
        if self.mode == "exact" and v.exact:
            target = normalize_canonical(v)
            for o in self.observables:
                if o.vector == target:
                    return o.id
            return None
        u = v.array()
        n = np.linalg.norm(u)
        if n == 0.0:
            raise ZeroVector("zero vector")
        dist = _line_distances(self._unit_array, u / n)
        i = int(np.argmin(dist))
        if dist[i] <= self.epsilon:
            return self.observables[i].id
        return None

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "epsilon": self.epsilon,
            "dimension": self.dimension,
            "observables": [
                {"id": o.id, "label": o.label, "vector": o.vector.to_json()}
                for o in self.observables
            ],
            "contexts": [list(c) for c in self.contexts],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> Diagram:
        """Load a serialized diagram exactly as stored; contexts are not recomputed."""
        try:
            mode = data.get("mode", "exact")
            if mode not in ("exact", "float"):
                raise MalformedInput(f"unknown mode {mode!r}")
            obs = []
            for entry in data["observables"]:
                vec = Vector.from_json(entry["vector"])
                if mode == "float":
                    vec = vec.to_float()
                obs.append(Observable(int(entry["id"]), vec, entry.get("label")))
            if len({o.id for o in obs}) != len(obs):
                raise MalformedInput("duplicate observable ids")
            contexts = tuple(tuple(int(i) for i in c) for c in data["contexts"])
            dims = {o.vector.dim for o in obs}
            dim = int(data.get("dimension", dims.pop() if len(dims) == 1 else 3))
            eps = float(data.get("epsilon", EPSILON) or EPSILON)
        except MalformedInput:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad diagram JSON: {exc}") from exc
        return cls(tuple(obs), contexts, mode, eps, dim)


EMPTY = Diagram((), ())


def _line_distances(units: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Row-wise ``min(|w - u|, |w + u|)`` for unit rows ``w`` and unit ``u``."""
    return np.minimum(np.linalg.norm(units - u, axis=1), np.linalg.norm(units + u, axis=1))


def _dedup(vectors: Sequence[Vector], labels: Sequence, eps: float):
    """Canonicalise and merge projectively equal vectors, first label wins."""
    kept: list[Vector] = []
    kept_labels: list = []
    merged = 0
    if vectors and vectors[0].exact:
        seen: dict = {}
        for v, lab in zip(vectors, labels):
            c = normalize_canonical(v)
            if c in seen:
                merged += 1
                j = seen[c]
                if kept_labels[j] is None:
                    kept_labels[j] = lab
                continue
            seen[c] = len(kept)
            kept.append(c)
            kept_labels.append(lab)
        return kept, kept_labels, merged

    canon = [normalize_canonical(v, eps) for v in vectors]
    if not canon:
        return kept, kept_labels, merged
    arr = np.array([c.array() for c in canon])
    rep = list(range(len(canon)))
    for i in range(len(canon)):
        earlier = np.nonzero(_line_distances(arr[:i], arr[i]) <= eps)[0]
        if earlier.size:
            rep[i] = rep[int(earlier[0])]
    index_of_rep: dict = {}
    for i, c in enumerate(canon):
        r = rep[i]
        if r == i:
            index_of_rep[i] = len(kept)
            kept.append(c)
            kept_labels.append(labels[i])
        else:
            merged += 1
            j = index_of_rep[r]
            if kept_labels[j] is None:
                kept_labels[j] = labels[i]
    return kept, kept_labels, merged


def _cliques(adj: list, size: int) -> list:
    """All ``size``-cliques (as ascending index tuples) of a graph given by adjacency sets."""
    out = []

    def extend(clique, cands):
        if len(clique) == size:
            out.append(tuple(clique))
            return
        for v in sorted(cands):
            extend(clique + [v], {w for w in cands if w > v and w in adj[v]})

    for v in range(len(adj)):
        extend([v], {w for w in adj[v] if w > v})
    return out


def build_diagram(
    vectors: Iterable[Vector],
    labels: Optional[Sequence] = None,
    epsilon: float = EPSILON,
    merge_log_level: int = logging.WARNING,
) -> Diagram:
    """Diagram whose contexts are all maximal orthogonal sets of the vectors.

    Duplicate lines are merged (logged at ``merge_log_level``, not an
    error).  Ids follow the sort order of the canonical vectors, so equal
    inputs give equal diagrams.
    """
    vectors = list(vectors)
    if not vectors:
        raise MalformedInput("build_diagram needs at least one vector")
    labels = list(labels) if labels is not None else [None] * len(vectors)
    if len(labels) != len(vectors):
        raise ValueError("labels and vectors differ in length")
    for v in vectors:
        if v.is_zero():
            raise ZeroVector("zero vector in diagram input")
    dims = {v.dim for v in vectors}
    if len(dims) != 1:
        raise MalformedInput(f"mixed dimensions {sorted(dims)}")
    dim = dims.pop()
    exact = all(v.exact for v in vectors)
    if not exact:
        vectors = [v.to_float() for v in vectors]

    kept, kept_labels, merged = _dedup(vectors, labels, epsilon)
    diagnostics = []
    if merged:
        msg = f"merged {merged} duplicate vector(s)"
        log.log(merge_log_level, msg)
        diagnostics.append(msg)

    order = sorted(range(len(kept)), key=lambda i: kept[i].coords)
    kept = [kept[i] for i in order]
    kept_labels = [kept_labels[i] for i in order]
    n = len(kept)

    adj: list = [set() for _ in range(n)]
    if exact:
        for i, j in itertools.combinations(range(n), 2):
            if not inner(kept[i], kept[j]):
                adj[i].add(j)
                adj[j].add(i)
    else:
        arr = np.array([v.array() for v in kept])
        gram = np.abs(arr @ arr.T)
        np.fill_diagonal(gram, 1.0)
        ii, jj = np.nonzero(gram <= epsilon)
        for i, j in zip(ii.tolist(), jj.tolist()):
            adj[i].add(j)
        near = np.argwhere(np.triu((gram > epsilon) & (gram < 10 * epsilon), 1))
        for i, j in near.tolist():
            msg = f"near-orthogonal pair ({i}, {j}): residual {gram[i, j]:.3e}"
            log.warning(msg)
            diagnostics.append(msg)

    contexts = tuple(sorted(_cliques(adj, dim)))
    observables = tuple(Observable(i, v, lab) for i, (v, lab) in enumerate(zip(kept, kept_labels)))
    return Diagram(
        observables,
        contexts,
        "exact" if exact else "float",
        epsilon,
        dim,
        tuple(diagnostics),
    )


def merge(d1: Diagram, d2: Diagram) -> Diagram:
    """Union of two diagrams; contexts are recomputed over the union.

    The recomputation can produce contexts present in neither input.
    """
    if not d1.observables:
        return d2
    if not d2.observables:
        return d1
    obs = list(d1.observables) + list(d2.observables)
    eps = min(d1.epsilon, d2.epsilon) if d1.mode == d2.mode else (
        d1.epsilon if d1.mode == "float" else d2.epsilon
    )
    return build_diagram([o.vector for o in obs], [o.label for o in obs], eps)


def merge_all(diagrams: Iterable[Diagram]) -> Diagram:
    """Merge many diagrams with a single context recomputation."""
    obs = [o for d in diagrams for o in d.observables]
    if not obs:
        return EMPTY
    return build_diagram([o.vector for o in obs], [o.label for o in obs])


def load_vectors(data) -> tuple[list, list]:
    """Vectors and labels from a vectors file payload.

    Accepts a bare list of coordinate arrays, ``{"vectors": [...]}`` whose
    entries are arrays or ``{"label", "vector"}`` objects, or a diagram JSON.
    """
    if isinstance(data, Mapping):
        if "observables" in data:
            entries = data["observables"]
        elif "vectors" in data:
            entries = data["vectors"]
        else:
            raise MalformedInput("expected a 'vectors' or 'observables' list")
        force_float = data.get("mode") == "float"
    elif isinstance(data, list):
        entries, force_float = data, False
    else:
        raise MalformedInput("vectors payload must be a list or an object")
    if not entries:
        raise MalformedInput("no vectors given")
    vectors, labels = [], []
    for e in entries:
        try:
            if isinstance(e, Mapping):
                v, lab = Vector.from_json(e["vector"]), e.get("label")
            else:
                v, lab = Vector.from_json(e), None
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad vector entry {e!r}: {exc}") from exc
        if not len(v):
            raise MalformedInput("empty vector")
        vectors.append(v.to_float() if force_float else v)
        labels.append(lab)
    return vectors, labels


def export_dot(d: Diagram, assignment: Optional[Mapping[int, int]] = None) -> str:
    """Graphviz text with one point-shaped node per context (the hyperedge).

    With an assignment, value 1 draws a filled box and value 0 a filled
    circle; unassigned observables stay hollow.
    """
    lines = ["graph greechie {", "  node [fontsize=10];"]
    for o in d.observables:
        name = o.label or f"#{o.id}"
        if assignment is None or o.id not in assignment:
            style = "shape=circle, style=solid"
        elif assignment[o.id] == 1:
            style = "shape=box, style=filled, fillcolor=black, fontcolor=white"
        else:
            style = "shape=circle, style=filled, fillcolor=gray30, fontcolor=white"
        lines.append(f'  o{o.id} [label="{name}", {style}];')
    for ci, ctx in enumerate(d.contexts):
        lines.append(f'  c{ci} [shape=point, xlabel="C{ci}"];')
        for m in ctx:
            lines.append(f"  c{ci} -- o{m};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def overlap_of(d: Diagram, i: int, j: int) -> float:
    return overlap(d.vector(i), d.vector(j))
