"""Partial value assignments and the admissibility rules.

Rule A: a context member valued 1 forces every other member to 0.
Rule B: when all members but one are valued 0, the remaining one is forced to 1.

:func:`propagate` applies both rules in breadth-first rounds: every rule
instance enabled by the values known at the start of a round fires in that
round, scanned in ascending context id and then observable id.  A round that
derives the opposite of a known value ends propagation with a contradiction;
the returned assignment is then the closure reached before that round.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from .diagram import Diagram
from .errors import MalformedInput

Assignment = dict  # observable id -> 0 | 1

RULE_A = "A"
RULE_B = "B"
SEED = "seed"


@dataclass(frozen=True)
class DeductionStep:
    context: Optional[int]
    rule: str
    premises: tuple
    conclusion: tuple

    def to_json(self) -> dict:
        return {
            "context": self.context,
            "rule": self.rule,
            "premises": [list(p) for p in self.premises],
            "conclusion": list(self.conclusion),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> DeductionStep:
        try:
            ctx = data["context"]
            return cls(
                None if ctx is None else int(ctx),
                str(data["rule"]),
                tuple((int(i), int(v)) for i, v in data["premises"]),
                (int(data["conclusion"][0]), int(data["conclusion"][1])),
            )
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise MalformedInput(f"bad deduction step: {exc}") from exc


@dataclass(frozen=True)
class Conflict:
    """The same observable derived with both values."""

    observable: int
    established: DeductionStep
    conflicting: DeductionStep

    def to_json(self) -> dict:
        return {
            "observable": self.observable,
            "established": self.established.to_json(),
            "conflicting": self.conflicting.to_json(),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> Conflict:
        try:
            return cls(
                int(data["observable"]),
                DeductionStep.from_json(data["established"]),
                DeductionStep.from_json(data["conflicting"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad contradiction record: {exc}") from exc


@dataclass(frozen=True)
class PropagationResult:
    assignment: dict
    trace: tuple
    conflict: Optional[Conflict] = None

    @property
    def is_contradiction(self) -> bool:
        return self.conflict is not None

    @property
    def kind(self) -> str:
        return "contradiction" if self.conflict else "fixpoint"


def _derivations(d: Diagram, ci: int, values: Mapping[int, int]):
    """Rule instances enabled in context ``ci`` whose conclusion is not already known."""
    ctx = d.contexts[ci]
    for p in ctx:
        if values.get(p) == 1:
            for m in ctx:
                if m != p and values.get(m) != 0:
                    yield DeductionStep(ci, RULE_A, ((p, 1),), (m, 0))
    for m in ctx:
        others = [o for o in ctx if o != m]
        if values.get(m) != 1 and all(values.get(o) == 0 for o in others):
            yield DeductionStep(ci, RULE_B, tuple((o, 0) for o in others), (m, 1))


def _seed_steps(d: Diagram, seed: Mapping) -> tuple[dict, dict, list]:
    values: dict = {}
    origin: dict = {}
    trace: list = []
    for key, val in sorted(((d.resolve(k), v) for k, v in seed.items())):
        if val not in (0, 1):
            raise ValueError(f"seed value for {key} must be 0 or 1, got {val!r}")
        step = DeductionStep(None, SEED, (), (key, int(val)))
        values[key] = int(val)
        origin[key] = step
        trace.append(step)
    return values, origin, trace


def propagate(
    d: Diagram,
    seed: Mapping,
    rng: Optional[random.Random] = None,
) -> PropagationResult:
    """Close ``seed`` under rules A and B.

    ``seed`` keys may be ids or labels.  With ``rng`` the rule instances fire
    one at a time in random order instead of in deterministic rounds; the
    verdict and any fixpoint closure do not depend on the order.
    """
    values, origin, trace = _seed_steps(d, seed)
    if rng is not None:
        return _propagate_random(d, values, origin, trace, rng)

    frontier = set()
    for oid in values:
        frontier.update(d.incidence.get(oid, ()))
    while frontier:
        derived = []
        for ci in sorted(frontier):
            derived.extend(_derivations(d, ci, values))
        if not derived:
            break
        for step in derived:
            oid, val = step.conclusion
            if oid in values and values[oid] != val:
                return PropagationResult(
                    dict(values), tuple(trace) + (step,), Conflict(oid, origin[oid], step)
                )
        before = dict(values)
        round_steps = []
        for step in derived:
            oid, val = step.conclusion
            if oid in values:
                if values[oid] != val:
                    # opposite derivations within a single round
                    return PropagationResult(
                        before,
                        tuple(trace) + tuple(round_steps) + (step,),
                        Conflict(oid, origin[oid], step),
                    )
                continue
            values[oid] = val
            origin[oid] = step
            round_steps.append(step)
        trace.extend(round_steps)
        frontier = set()
        for step in round_steps:
            frontier.update(d.incidence.get(step.conclusion[0], ()))
    return PropagationResult(dict(values), tuple(trace))


def _propagate_random(d, values, origin, trace, rng) -> PropagationResult:
    while True:
        pending = [s for ci in range(len(d.contexts)) for s in _derivations(d, ci, values)]
        if not pending:
            return PropagationResult(dict(values), tuple(trace))
        step = rng.choice(pending)
        oid, val = step.conclusion
        if oid in values:
            return PropagationResult(
                dict(values), tuple(trace) + (step,), Conflict(oid, origin[oid], step)
            )
        values[oid] = val
        origin[oid] = step
        trace.append(step)


def is_admissible(d: Diagram, a: Mapping[int, int]) -> bool:
    """Check both rules directly on every context, without propagating."""
    for ctx in d.contexts:
        ones = [m for m in ctx if a.get(m) == 1]
        if ones and any(a.get(m) != 0 for m in ctx if m != ones[0]):
            return False
        for m in ctx:
            if all(a.get(o) == 0 for o in ctx if o != m) and a.get(m) != 1:
                return False
    return True


def _close(d: Diagram, values: dict) -> Optional[dict]:
    """Trace-free closure used by the search; None on contradiction."""
    values = dict(values)
    queue = list(values)
    while queue:
        oid = queue.pop()
        for ci in d.incidence.get(oid, ()):
            ctx = d.contexts[ci]
            ones = [m for m in ctx if values.get(m) == 1]
            if len(ones) > 1:
                return None
            if ones:
                for m in ctx:
                    if m != ones[0]:
                        if values.get(m) == 1:
                            return None
                        if m not in values:
                            values[m] = 0
                            queue.append(m)
                continue
            free = [m for m in ctx if m not in values]
            if not free:
                return None  # every member is 0
            if len(free) == 1:
                values[free[0]] = 1
                queue.append(free[0])
    return values


def search_total_admissible(d: Diagram, cap: int = 16, seed: Optional[Mapping] = None) -> list:
    """Total admissible assignments, at most ``cap`` of them.

    An empty result is a proof that none exist (the Kochen-Specker property).
    Branching is on the lowest undefined id, trying 0 before 1, with
    propagation pruning each branch, so results come out in a fixed order.
    """
    start = {}
    if seed:
        start = {d.resolve(k): int(v) for k, v in seed.items()}
    found: list = []
    ids = sorted(d.ids)

    def visit(values):
        if len(found) >= cap:
            return
        closed = _close(d, values)
        if closed is None:
            return
        free = next((i for i in ids if i not in closed), None)
        if free is None:
            if is_admissible(d, closed):
                found.append(dict(sorted(closed.items())))
            return
        for val in (0, 1):
            visit({**closed, free: val})

    if cap > 0:
        visit(start)
    return found


def assignment_from_trace(steps: Iterable[DeductionStep]) -> dict:
    """Values established by a trace, first writer wins.

    A trailing conflicting step therefore does not overwrite anything, and
    the result is the closure reached before the contradiction.
    """
    values: dict = {}
    for s in steps:
        oid, val = s.conclusion
        values.setdefault(oid, val)
    return values

