"""Two-way number partitioning ("heap" task) on the synthesis engine.

The main grid is ``item x side``. Marking ``(i, s)`` places item ``i`` in
heap ``s`` and the single contact rule forbids ``(i, 1 - s)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

from synthopt.engine import (
    ContactRule,
    Environment,
    PointId,
    PointState,
    SummaryDecision,
    StepRecord,
    init_environment,
    run_synthesis,
)

HEAP1, HEAP2 = 0, 1
# kernels and oracles work in int64
MAX_TOTAL = 2**62


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class PartitionInstance:
    weights: tuple[int, ...]

    def __post_init__(self):
        if len(self.weights) < 1:
            raise PartitionError("weights: at least one item is required")
        for i, w in enumerate(self.weights):
            if isinstance(w, bool) or not isinstance(w, int):
                raise PartitionError(f"weights[{i}]: expected an integer, got {w!r}")
            if w < 1:
                raise PartitionError(f"weights[{i}]: weight must be >= 1, got {w}")
        if sum(self.weights) >= MAX_TOTAL:
            raise PartitionError("weights: total weight overflows 64-bit arithmetic")

    @classmethod
    def from_numbers(cls, values: Sequence) -> "PartitionInstance":
        """Accept integers or rationals; rationals are scaled to a common integer grid."""
        fracs = []
        for i, v in enumerate(values):
            if isinstance(v, bool):
                raise PartitionError(f"weights[{i}]: expected a number, got {v!r}")
            try:
                fracs.append(Fraction(str(v)) if isinstance(v, float) else Fraction(v))
            except (TypeError, ValueError):
                raise PartitionError(f"weights[{i}]: expected a number, got {v!r}") from None
        scale = lcm(1, *(f.denominator for f in fracs))
        return cls(tuple(int(f * scale) for f in fracs))

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def total(self) -> int:
        return sum(self.weights)


@dataclass(frozen=True)
class Assignment:
    sides: tuple[int, ...]
    sums: tuple[int, int]

    @classmethod
    def from_sides(cls, inst: PartitionInstance, sides: Sequence[int]) -> "Assignment":
        if len(sides) != inst.n or any(s not in (HEAP1, HEAP2) for s in sides):
            raise PartitionError("every item needs exactly one side")
        s2 = sum(w for w, s in zip(inst.weights, sides) if s == HEAP2)
        return cls(tuple(sides), (inst.total - s2, s2))

    @classmethod
    def from_mask(cls, inst: PartitionInstance, mask: int) -> "Assignment":
        return cls.from_sides(inst, [mask >> i & 1 for i in range(inst.n)])

    def heap(self, side: int, inst: PartitionInstance) -> list[int]:
        return [w for w, s in zip(inst.weights, self.sides) if s == side]


def _forbid_other_side(env: Environment, p: PointId):
    item, side = p
    return [((item, 1 - side), PointState.FORBIDDEN_ALGORITHMIC)]


ONE_SIDE_RULE = ContactRule("one-side", PointState.MARKED, _forbid_other_side)


def build_partition_environment(inst: PartitionInstance) -> Environment:
    factors = {(i, s): float(w) for i, w in enumerate(inst.weights) for s in (HEAP1, HEAP2)}
    env = init_environment([inst.n, 2], factors=factors, rules=[ONE_SIDE_RULE])
    env.aux["weights"] = inst.weights
    return env


class PartitionValency:
    """Heaviest unplaced item first, into the currently lighter heap.

    Score is ``2 * weight + 1`` on the lighter side (heap 1 on ties) and
    ``2 * weight`` otherwise, so the side bonus never outranks a heavier
    item. Heap sums are cached per engine step.
    """

    def __init__(self):
        self._env = None
        self._step = -1
        self._lighter = HEAP1

    def heap_sums(self, env: Environment) -> tuple[int, int]:
        weights = env.aux["weights"]
        sums = [0, 0]
        for item, side in env.marked:
            sums[side] += weights[item]
        return sums[0], sums[1]

    def __call__(self, env: Environment, p: PointId) -> float:
        if env is not self._env or env.step_counter != self._step:
            s1, s2 = self.heap_sums(env)
            self._lighter = HEAP1 if s1 <= s2 else HEAP2
            self._env, self._step = env, env.step_counter
        item, side = p
        return 2.0 * env.aux["weights"][item] + (1.0 if side == self._lighter else 0.0)


def partition_valency(env: Environment, p: PointId) -> float:
    return PartitionValency()(env, p)


def summary_to_assignment(inst: PartitionInstance, summary: SummaryDecision) -> Assignment:
    sides = [None] * inst.n
    for item, side in summary.singles:
        sides[item] = side
    if any(s is None for s in sides):
        raise PartitionError("summary decision leaves items unassigned")
    return Assignment.from_sides(inst, sides)


def discrepancy(a: Assignment) -> int:
    return abs(a.sums[0] - a.sums[1])


def polish(inst: PartitionInstance, a: Assignment) -> Assignment:
    """Steepest descent over single moves and pairwise swaps.

    Applies the best strictly improving move until none is left. Moves are
    scanned before swaps, items in index order; the first best wins.
    """
    sides = list(a.sides)
    w = inst.weights
    s1, s2 = a.sums
    while True:
        diff = s1 - s2
        best = abs(diff)
        best_move = None
        for i, wi in enumerate(w):
            # moving i from heap 1 lowers diff by 2w, from heap 2 raises it
            nd = abs(diff - 2 * wi) if sides[i] == HEAP1 else abs(diff + 2 * wi)
            if nd < best:
                best, best_move = nd, (i,)
        for i in range(len(w)):
            if sides[i] != HEAP1:
                continue
            for j in range(len(w)):
                if sides[j] != HEAP2:
                    continue
                nd = abs(diff - 2 * (w[i] - w[j]))
                if nd < best:
                    best, best_move = nd, (i, j)
        if best_move is None:
            break
        for k in best_move:
            if sides[k] == HEAP1:
                sides[k] = HEAP2
                s1, s2 = s1 - w[k], s2 + w[k]
            else:
                sides[k] = HEAP1
                s1, s2 = s1 + w[k], s2 - w[k]
    return Assignment(tuple(sides), (s1, s2))


def partition_metrics(inst: PartitionInstance, a: Assignment) -> tuple[int, float]:
    d = discrepancy(a)
    return d, 1.0 - d / inst.total


@dataclass(frozen=True)
class PartitionResult:
    summary: SummaryDecision
    trace: list[StepRecord]
    greedy: Assignment
    assignment: Assignment
    env: Environment

    @property
    def discrepancy(self) -> int:
        return discrepancy(self.assignment)


def solve_partition(inst: PartitionInstance, polish_result: bool = True, on_step=None):
    env = build_partition_environment(inst)
    summary, trace = run_synthesis(env, PartitionValency(), inst.n, on_step=on_step)
    greedy = summary_to_assignment(inst, summary)
    final = polish(inst, greedy) if polish_result else greedy
    return PartitionResult(summary, trace, greedy, final, env)
