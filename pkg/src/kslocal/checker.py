"""Independent replay of localisation certificates.

The checker trusts only the serialized diagram and certificate.  It re-tests
orthogonality from the stored vectors and replays every deduction step by
hand; it never calls the propagation engine or any gadget constructor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

from .diagram import Diagram
from .errors import MalformedInput
from .linalg import inner, is_orthogonal, overlap

CHECK_EPSILON = 1e-8

ORTHOGONALITY = "orthogonality"
MEMBERSHIP = "context-membership"
REPLAY = "step-replay"
CONTRADICTION = "contradiction"
SEED_SHAPE = "seed-shape"
STAGES = (ORTHOGONALITY, MEMBERSHIP, REPLAY, CONTRADICTION, SEED_SHAPE)


@dataclass
class Verdict:
    failures: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    epsilons: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, stage: str, detail: str) -> None:
        self.failures.append((stage, detail))

    def stages(self) -> set:
        return {s for s, _ in self.failures}

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "failures": [list(f) for f in self.failures],
            "warnings": list(self.warnings),
            "epsilons": dict(self.epsilons),
        }


def _as_dict(cert: Any) -> Mapping:
    return cert.to_json() if hasattr(cert, "to_json") else cert


def _pair(x) -> tuple[int, int]:
    a, b = x
    if isinstance(a, bool) or isinstance(b, bool):
        raise TypeError("boolean in id/value pair")
    return int(a), int(b)


def _check_contexts(d: Diagram, eps: float, v: Verdict) -> None:
    known = set(d.ids)
    seen = set()
    for ci, ctx in enumerate(d.contexts):
        members = list(ctx)
        if len(members) != d.dimension or len(set(members)) != len(members):
            v.fail(ORTHOGONALITY, f"context {ci} has members {members}, expected {d.dimension} distinct")
            continue
        missing = [m for m in members if m not in known]
        if missing:
            v.fail(ORTHOGONALITY, f"context {ci} references unknown observables {missing}")
            continue
        key = tuple(sorted(members))
        if key in seen:
            v.fail(ORTHOGONALITY, f"context {ci} duplicates an earlier context")
        seen.add(key)
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                a, b = d.vector(members[i]), d.vector(members[j])
                if a.is_zero() or b.is_zero():
                    v.fail(ORTHOGONALITY, f"context {ci} contains a zero vector")
                elif not is_orthogonal(a, b, eps):
                    v.fail(
                        ORTHOGONALITY,
                        f"context {ci}: observables {members[i]} and {members[j]} are not orthogonal "
                        f"(inner product {float(inner(a, b)):.3e})",
                    )


def _check_rule_shape(step: Mapping, ctx: tuple, premises: list, conclusion: tuple) -> str | None:
    rule = step.get("rule")
    cid, cval = conclusion
    if rule == "A":
        if len(premises) != 1 or premises[0][1] != 1:
            return "rule A needs exactly one premise valued 1"
        if cval != 0 or premises[0][0] == cid:
            return "rule A must conclude 0 on a different member"
        return None
    if rule == "B":
        ids = [p for p, _ in premises]
        if any(val != 0 for _, val in premises):
            return "rule B premises must all be 0"
        if cval != 1:
            return "rule B must conclude 1"
        if len(set(ids)) != len(ids) or set(ids) | {cid} != set(ctx) or cid in ids:
            return "rule B premises must be every other member of the context"
        return None
    return f"unknown rule {rule!r}"


def _replay_branch(d: Diagram, index: int, branch: Mapping, psi: int, phi: int, v: Verdict) -> None:
    tag = f"branch {index}"
    try:
        assumption = _pair(branch["assumption"])
        steps = list(branch["trace"])
        record = branch["contradiction"]
    except (KeyError, TypeError, ValueError) as exc:
        v.fail(SEED_SHAPE, f"{tag}: malformed branch ({exc})")
        return

    # seeds: a leading block with exactly psi=1 and the assumption on phi
    n_seed = 0
    while n_seed < len(steps) and steps[n_seed].get("rule") == "seed":
        n_seed += 1
    seeds = []
    for s in steps[:n_seed]:
        try:
            seeds.append(_pair(s["conclusion"]))
        except (KeyError, TypeError, ValueError):
            v.fail(SEED_SHAPE, f"{tag}: malformed seed step")
            return
        if s.get("premises"):
            v.fail(SEED_SHAPE, f"{tag}: seed step with premises")
    if assumption[0] != phi:
        v.fail(SEED_SHAPE, f"{tag}: assumption is on {assumption[0]}, not phi={phi}")
    expected = sorted({(psi, 1), assumption})
    if sorted(seeds) != expected or len(seeds) != 2:
        v.fail(SEED_SHAPE, f"{tag}: seeds {sorted(seeds)} differ from {expected}")
    if any(s.get("rule") == "seed" for s in steps[n_seed:]):
        v.fail(SEED_SHAPE, f"{tag}: seed step after the first deduction")

    values: dict = {}
    origin: dict = {}
    for k, (oid, val) in enumerate(seeds):
        if val not in (0, 1):
            v.fail(SEED_SHAPE, f"{tag}: seed value {val} for {oid}")
        values.setdefault(oid, val)
        origin.setdefault(oid, k)

    body = steps[n_seed:]
    if not body:
        v.fail(CONTRADICTION, f"{tag}: no deductions after the seeds")
        return
    known = set(d.ids)
    for k, step in enumerate(body, start=n_seed):
        where = f"{tag} step {k}"
        try:
            cidx = step["context"]
            premises = [_pair(p) for p in step["premises"]]
            conclusion = _pair(step["conclusion"])
        except (KeyError, TypeError, ValueError) as exc:
            v.fail(REPLAY, f"{where}: malformed step ({exc})")
            return
        if not isinstance(cidx, int) or isinstance(cidx, bool) or not 0 <= cidx < len(d.contexts):
            v.fail(MEMBERSHIP, f"{where}: no context {cidx!r}")
            return
        ctx = tuple(d.contexts[cidx])
        outside = [p for p, _ in premises if p not in ctx]
        if conclusion[0] not in ctx:
            outside.append(conclusion[0])
        if outside:
            v.fail(MEMBERSHIP, f"{where}: observables {outside} are not in context {cidx}")
            return
        if conclusion[0] not in known:
            v.fail(MEMBERSHIP, f"{where}: unknown observable {conclusion[0]}")
            return
        unproven = [p for p in premises if values.get(p[0]) != p[1]]
        if unproven:
            v.fail(REPLAY, f"{where}: premises {unproven} not established")
            return
        problem = _check_rule_shape(step, ctx, premises, conclusion)
        if problem:
            v.fail(REPLAY, f"{where}: {problem}")
            return
        oid, val = conclusion
        last = k == len(steps) - 1
        if oid in values and values[oid] != val:
            if not last:
                v.fail(CONTRADICTION, f"{where}: contradiction reached before the final step")
                return
            _check_record(steps, origin[oid], k, oid, record, tag, v)
            return
        if last:
            v.fail(CONTRADICTION, f"{tag}: final step does not oppose an established value")
            return
        values.setdefault(oid, val)
        origin.setdefault(oid, k)


def _check_record(steps: list, est: int, final: int, oid: int, record: Mapping, tag: str, v: Verdict) -> None:
    try:
        ok = (
            int(record["observable"]) == oid
            and record["conflicting"] == steps[final]
            and record["established"] == steps[est]
        )
    except (KeyError, TypeError, ValueError):
        ok = False
    if not ok:
        v.fail(CONTRADICTION, f"{tag}: contradiction record does not match the replay (observable {oid})")


def _cross_check_log(d: Diagram, log: list, v: Verdict) -> None:
    """Parameter sanity checks; warnings only, never failures."""
    tol = 1e-6
    for n, entry in enumerate(log):
        try:
            kind = entry["gadget"]
            anchors = {k: d.vector(int(i)) for k, i in entry["anchors"].items()}
            params = entry.get("params", {})
        except Exception as exc:  # noqa: BLE001 - diagnostics only
            v.warnings.append(f"log entry {n}: unreadable ({exc})")
            continue
        checks = []
        if kind == "lemma1" and {"a", "b"} <= anchors.keys():
            checks.append(("overlap(a,b)", overlap(anchors["a"], anchors["b"]), 1 / math.sqrt(2)))
        if kind == "contraction" and {"a", "c"} <= anchors.keys() and "z" in params:
            checks.append(("overlap(a,c)", overlap(anchors["a"], anchors["c"]), float(params["z"])))
        if kind == "expansion" and {"c", "d"} <= anchors.keys() and "alpha" in params:
            a = float(params["alpha"])
            checks.append(("overlap(c,d)", overlap(anchors["c"], anchors["d"]), 3 - 4 / (a + 1)))
        if kind == "iteration" and {"c", "d"} <= anchors.keys() and params.get("alphas"):
            checks.append(("overlap(c,d)", overlap(anchors["c"], anchors["d"]), float(params["alphas"][-1])))
        if kind == "zero-branch" and {"phi", "phi'"} <= anchors.keys():
            checks.append(("overlap(phi,phi')", overlap(anchors["phi"], anchors["phi'"]), 0.0))
        for name, got, want in checks:
            if abs(got - want) > tol:
                v.warnings.append(f"log entry {n} ({kind}): {name}={got:.12g}, parameters imply {want:.12g}")


def check_certificate(d: Diagram | Mapping, cert: Any, eps: float = CHECK_EPSILON) -> Verdict:
    """Verify a certificate against its companion diagram.

    ``d`` may be a :class:`Diagram` or its JSON form; ``cert`` may be a
    certificate object or its JSON form.  Problems are collected, not raised.
    """
    v = Verdict()
    if not isinstance(d, Diagram):
        try:
            d = Diagram.from_json(d)
        except MalformedInput as exc:
            v.fail(ORTHOGONALITY, f"unreadable diagram: {exc}")
            return v
    data = _as_dict(cert)
    v.epsilons = {"checker": eps, "construction": data.get("epsilon"), "diagram": d.epsilon}

    _check_contexts(d, eps, v)

    known = set(d.ids)
    try:
        psi, phi = int(data["psi"]), int(data["phi"])
        declared = float(data["overlap"])
        branches = list(data["branches"])
    except (KeyError, TypeError, ValueError) as exc:
        v.fail(SEED_SHAPE, f"certificate header unreadable: {exc}")
        return v
    if psi not in known or phi not in known or psi == phi:
        v.fail(SEED_SHAPE, f"psi={psi} / phi={phi} are not two observables of the diagram")
        return v
    actual = overlap(d.vector(psi), d.vector(phi))
    if not math.isfinite(declared) or abs(actual - declared) > max(eps, 1e-12):
        v.fail(SEED_SHAPE, f"declared overlap {declared!r} but the vectors give {actual!r}")
    if len(branches) != 2:
        v.fail(SEED_SHAPE, f"expected 2 branches, found {len(branches)}")
    else:
        vals = []
        for b in branches:
            try:
                vals.append(_pair(b["assumption"])[1])
            except (KeyError, TypeError, ValueError):
                vals.append(None)
        if sorted(vals, key=str) != [0, 1]:
            v.fail(SEED_SHAPE, f"branch assumptions {vals} should be one 1 and one 0")
    for i, b in enumerate(branches):
        _replay_branch(d, i, b, psi, phi, v)

    log = data.get("construction_log") or []
    if isinstance(log, list):
        _cross_check_log(d, log, v)
    return v


def load_certificate_json(data: Any) -> Mapping:
    """Minimal structural validation used by the CLI before checking."""
    if not isinstance(data, Mapping) or not {"psi", "phi", "overlap", "branches"} <= data.keys():
        raise MalformedInput("certificate JSON needs psi, phi, overlap and branches")
    return data


__all__ = ["CHECK_EPSILON", "STAGES", "Verdict", "check_certificate", "load_certificate_json"]
