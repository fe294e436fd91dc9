"""Problem-agnostic synthesis engine.

An :class:`Environment` is a grid of points, each carrying exactly one
:class:`PointState`. A solve repeatedly marks the Potential point of
highest valency; every marking fires the environment's contact rules,
which may forbid further points, until the reaction reaches a fixpoint.
The run stops when the requested number of points is marked or when no
Potential point is left.
"""
from __future__ import annotations

import enum
import itertools
import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

PointId = tuple[int, ...]


class PointState(enum.Enum):
    POTENTIAL = "Potential"
    MARKED = "Marked"
    FORBIDDEN_USER = "ForbiddenUser"
    FORBIDDEN_ALGORITHMIC = "ForbiddenAlgorithmic"
    NONEXISTENT = "Nonexistent"
    NOT_MAKING_SENSE = "NotMakingSense"


# states that may only be assigned when the environment is built
INITIAL_ONLY = frozenset(
    {PointState.FORBIDDEN_USER, PointState.NONEXISTENT, PointState.NOT_MAKING_SENSE}
)
OFF_GRID = frozenset({PointState.NONEXISTENT, PointState.NOT_MAKING_SENSE})


class EngineFault(RuntimeError):
    """An engine contract was broken (bad transition, bad rule, bad valency)."""


class NoDecision(ValueError):
    """Raised when a quality measure is requested for an empty answer."""


Action = tuple[PointId, PointState]


@dataclass(frozen=True)
class ContactRule:
    """Reaction fired when any point enters ``trigger``.

    ``action(env, point)`` returns the state assignments induced by
    ``point`` having just entered ``trigger``. Only
    ``FORBIDDEN_ALGORITHMIC`` may be assigned; assignments that are
    already in effect are ignored.
    """

    name: str
    trigger: PointState
    action: Callable[["Environment", PointId], Iterable[Action]]


@dataclass(frozen=True)
class Reaction:
    point: PointId
    old: PointState
    new: PointState


@dataclass(frozen=True)
class StepRecord:
    step_index: int
    transition: PointId
    valency_value: float | None
    reactions: tuple[Reaction, ...]

    def to_json(self) -> str:
        doc = {
            "step": self.step_index,
            "point": list(self.transition),
            "valency": self.valency_value,
            "reactions": [
                {"point": list(r.point), "from": r.old.value, "to": r.new.value}
                for r in self.reactions
            ],
        }
        return json.dumps(doc, separators=(", ", ": "), allow_nan=False)

    @classmethod
    def from_json(cls, line: str) -> "StepRecord":
        doc = json.loads(line)
        return cls(
            step_index=int(doc["step"]),
            transition=tuple(doc["point"]),
            valency_value=doc["valency"],
            reactions=tuple(
                Reaction(tuple(r["point"]), PointState(r["from"]), PointState(r["to"]))
                for r in doc["reactions"]
            ),
        )


@dataclass(frozen=True)
class SummaryDecision:
    singles: tuple[PointId, ...]
    complete: bool


class Environment:
    """Point grid, state registries, factor table and contact rules."""

    def __init__(
        self,
        axes: Sequence[int],
        states: dict[PointId, PointState],
        factors: Mapping[PointId, float],
        rules: Sequence[ContactRule],
    ):
        self.axes = tuple(axes)
        self.states = states
        self.factors = dict(factors)
        self.rules = list(rules)
        self.potential = {p for p, s in states.items() if s is PointState.POTENTIAL}
        self.counterpotential: set[PointId] = set()
        self.marked: list[PointId] = []
        self.step_counter = 0
        # scratch space owned by problem-specific rules
        self.aux: dict[str, Any] = {}

    @property
    def dimensions(self) -> int:
        return len(self.axes)

    @property
    def grid_size(self) -> int:
        return math.prod(self.axes)

    def points(self) -> Iterable[PointId]:
        return itertools.product(*(range(a) for a in self.axes))

    def state(self, p: PointId) -> PointState:
        try:
            return self.states[p]
        except KeyError:
            raise EngineFault(f"point {p} is outside the grid {self.axes}") from None

    def in_grid(self, p: PointId) -> bool:
        return len(p) == len(self.axes) and all(0 <= i < a for i, a in zip(p, self.axes))

    def count(self, state: PointState) -> int:
        return sum(1 for s in self.states.values() if s is state)

    def snapshot(self) -> dict[PointId, PointState]:
        return dict(self.states)

    def check(self) -> None:
        """Raise :class:`EngineFault` if the registries disagree with the states."""
        if len(self.states) != self.grid_size:
            raise EngineFault("state table does not cover the grid")
        potential = {p for p, s in self.states.items() if s is PointState.POTENTIAL}
        if potential != self.potential:
            raise EngineFault("potential registry out of sync")
        forbidden = {
            p for p, s in self.states.items() if s is PointState.FORBIDDEN_ALGORITHMIC
        }
        if forbidden != self.counterpotential:
            raise EngineFault("counterpotential registry out of sync")
        marked = {p for p, s in self.states.items() if s is PointState.MARKED}
        if marked != set(self.marked) or len(self.marked) != self.step_counter:
            raise EngineFault("step counter does not match the marked points")


def init_environment(
    axes: Sequence[int],
    initial_states: Mapping[PointId, PointState] | None = None,
    factors: Mapping[PointId, float] | None = None,
    rules: Sequence[ContactRule] = (),
) -> Environment:
    """Build an environment where every unlisted point starts Potential."""
    axes = tuple(int(a) for a in axes)
    if not axes or any(a < 1 for a in axes):
        raise ValueError(f"axis extents must be positive, got {axes}")
    initial_states = dict(initial_states or {})
    factors = dict(factors or {})
    states = {p: PointState.POTENTIAL for p in itertools.product(*(range(a) for a in axes))}
    for p, s in initial_states.items():
        p = tuple(p)
        if p not in states:
            raise ValueError(f"point {p} is outside the grid {axes}")
        if s not in INITIAL_ONLY:
            raise ValueError(f"point {p}: {s.value} cannot be an initial state")
        states[p] = s
    for p, v in factors.items():
        if tuple(p) not in states:
            raise ValueError(f"factor given for point {p} outside the grid {axes}")
        if not math.isfinite(v) or v < 0:
            raise ValueError(f"factor at {p} must be finite and non-negative, got {v}")
    for p, s in states.items():
        if s is PointState.POTENTIAL and p not in factors:
            raise ValueError(f"missing factor for Potential point {p}")
    return Environment(axes, states, factors, rules)


Valency = Callable[[Environment, PointId], float]


def _argmax(env: Environment, valency: Valency) -> tuple[PointId, float] | None:
    best_p = None
    best_v = -math.inf
    for p in env.potential:
        v = valency(env, p)
        if not math.isfinite(v):
            raise EngineFault(f"valency at {p} is not finite: {v}")
        if best_p is None or v > best_v or (v == best_v and p < best_p):
            best_p, best_v = p, v
    if best_p is None:
        return None
    return best_p, float(best_v)


def select_transition(env: Environment, valency: Valency) -> PointId | None:
    """The Potential point of maximum valency, smallest point on ties."""
    found = _argmax(env, valency)
    return None if found is None else found[0]


def _react(env: Environment, target: PointId, new: PointState) -> PointState | None:
    if new is not PointState.FORBIDDEN_ALGORITHMIC:
        raise EngineFault(f"rules may only forbid points, got {new.value} for {target}")
    old = env.state(target)
    if old is new or old is PointState.FORBIDDEN_USER:
        return None
    if old is not PointState.POTENTIAL:
        raise EngineFault(f"rule tried to move {target} from {old.value} to {new.value}")
    env.states[target] = new
    env.potential.discard(target)
    env.counterpotential.add(target)
    return old


def apply_transition(
    env: Environment, p: PointId, valency_value: float | None = None
) -> StepRecord:
    """Mark ``p`` and run the contact rules to a fixpoint."""
    p = tuple(p)
    if env.state(p) is not PointState.POTENTIAL:
        raise EngineFault(f"cannot mark {p}: state is {env.states[p].value}")
    env.states[p] = PointState.MARKED
    env.potential.discard(p)
    env.marked.append(p)
    step_index = env.step_counter
    env.step_counter += 1

    reactions: list[Reaction] = []
    queue: deque[tuple[PointId, PointState]] = deque([(p, PointState.MARKED)])
    while queue:
        point, entered = queue.popleft()
        for rule in env.rules:
            if rule.trigger is not entered:
                continue
            for target, new in rule.action(env, point):
                old = _react(env, tuple(target), new)
                if old is not None:
                    reactions.append(Reaction(tuple(target), old, new))
                    queue.append((tuple(target), new))
    return StepRecord(step_index, p, valency_value, tuple(reactions))


def run_synthesis(
    env: Environment,
    valency: Valency,
    target_count: int,
    on_step: Callable[[Environment, StepRecord], None] | None = None,
) -> tuple[SummaryDecision, list[StepRecord]]:
    """Mark points one per step until ``target_count`` are marked or none remain."""
    if target_count < 1:
        raise ValueError("target_count must be at least 1")
    trace: list[StepRecord] = []
    while env.step_counter < target_count:
        found = _argmax(env, valency)
        if found is None:
            break
        record = apply_transition(env, *found)
        trace.append(record)
        if on_step is not None:
            on_step(env, record)
    summary = SummaryDecision(tuple(env.marked), env.step_counter >= target_count)
    return summary, trace


def completeness(summary: SummaryDecision, target_count: int) -> float:
    """Fraction of the required single decisions that were synthesized."""
    if target_count < 1:
        raise ValueError("target_count must be at least 1")
    if not summary.singles:
        raise NoDecision("no single decision was synthesized")
    return len(summary.singles) / target_count


def dump_trace(trace: Iterable[StepRecord]) -> str:
    return "".join(record.to_json() + "\n" for record in trace)


def load_trace(text: str) -> list[StepRecord]:
    return [StepRecord.from_json(line) for line in text.splitlines() if line.strip()]


def replay_trace(env: Environment, trace: Iterable[StepRecord]) -> None:
    """Re-apply recorded transitions to a fresh environment.

    Raises :class:`EngineFault` if any step's reactions differ from the
    recorded ones.
    """
    for expected in trace:
        if expected.step_index != env.step_counter:
            raise EngineFault(
                f"trace step {expected.step_index} out of order (at {env.step_counter})"
            )
        got = apply_transition(env, expected.transition, expected.valency_value)
        if got.reactions != expected.reactions:
            raise EngineFault(f"reactions differ at step {expected.step_index}")


@dataclass
class InvariantMonitor:
    """``on_step`` hook that audits every step of a run.

    Checks registry coherence, the state partition, monotonicity against
    the previous snapshot and that exactly one point was marked.
    """

    env: Environment
    violations: list[str] = field(default_factory=list)
    steps: int = 0

    def __post_init__(self) -> None:
        self._previous = self.env.snapshot()

    def __call__(self, env: Environment, record: StepRecord) -> None:
        try:
            env.check()
        except EngineFault as exc:
            self.violations.append(f"step {record.step_index}: {exc}")
        if record.step_index != self.steps:
            self.violations.append(f"step index {record.step_index} != {self.steps}")
        self.steps += 1
        if sum(1 for _ in env.points()) != len(env.states):
            self.violations.append("state partition does not cover the grid")
        newly_marked = 0
        for p, before in self._previous.items():
            after = env.states[p]
            if after is before:
                continue
            if before is not PointState.POTENTIAL:
                self.violations.append(f"{p} left terminal state {before.value}")
            if after is PointState.MARKED:
                newly_marked += 1
        if newly_marked != 1:
            self.violations.append(f"step {record.step_index} marked {newly_marked} points")
        if any(r.new is PointState.MARKED for r in record.reactions):
            self.violations.append(f"step {record.step_index} reaction marked a point")
        self._previous = env.snapshot()

    def finish(self, trace: Sequence[StepRecord]) -> None:
        if not (len(trace) == len(self.env.marked) == self.env.step_counter):
            self.violations.append("trace length, marked count and step counter differ")
