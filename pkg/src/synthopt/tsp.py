"""Symmetric TSP on the synthesis engine.

The main grid is ``n x n``: point ``(i, j)`` with ``i < j`` is the
undirected edge between nodes ``i`` and ``j``; the diagonal is
NotMakingSense and the lower triangle Nonexistent. Each step marks one
edge. Three contact rules keep the marked edges a set of simple paths
until the last edge closes the tour.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from synthopt.engine import (
    ContactRule,
    EngineFault,
    Environment,
    PointId,
    PointState,
    StepRecord,
    SummaryDecision,
    completeness,
    init_environment,
    run_synthesis,
)

DEFAULT_LAMBDA = 0.3
EUCLIDEAN_DECIMALS = 6


class TspError(ValueError):
    pass


def edge(i: int, j: int) -> PointId:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class TspInstance:
    n: int
    dist: tuple[tuple[float, ...], ...]
    forbidden: frozenset[PointId] = frozenset()

    def __post_init__(self):
        if self.n < 3:
            raise TspError(f"n: at least 3 nodes are required, got {self.n}")
        if len(self.dist) != self.n or any(len(row) != self.n for row in self.dist):
            raise TspError(f"matrix: expected {self.n}x{self.n}")
        for i in range(self.n):
            for j in range(self.n):
                if i == j:
                    continue
                v = self.dist[i][j]
                if not math.isfinite(v) or v < 0:
                    raise TspError(f"matrix[{i}][{j}]: must be finite and >= 0, got {v}")
                if v != self.dist[j][i]:
                    raise TspError(f"matrix[{i}][{j}]: asymmetric ({v} != {self.dist[j][i]})")
        for i, j in self.forbidden:
            if i == j:
                raise TspError(f"forbidden: pair [{i}, {j}] is a diagonal pair")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise TspError(f"forbidden: pair [{i}, {j}] out of range")

    @classmethod
    def from_matrix(cls, matrix, forbidden: Iterable[Sequence[int]] = ()) -> "TspInstance":
        rows = tuple(tuple(float(v) for v in row) for row in matrix)
        pairs = []
        for pair in forbidden:
            if len(pair) != 2:
                raise TspError(f"forbidden: expected node pairs, got {pair!r}")
            pairs.append(edge(int(pair[0]), int(pair[1])))
        return cls(len(rows), rows, frozenset(pairs))

    @classmethod
    def from_points(cls, points, forbidden: Iterable[Sequence[int]] = ()) -> "TspInstance":
        """Euclidean instance; distances are rounded for reproducibility."""
        xy = np.asarray(points, dtype=np.float64)
        if xy.ndim != 2 or xy.shape[1] != 2:
            raise TspError("points: expected a list of [x, y] pairs")
        diff = xy[:, None, :] - xy[None, :, :]
        d = np.round(np.sqrt((diff**2).sum(axis=2)), EUCLIDEAN_DECIMALS)
        d = np.minimum(d, d.T)
        return cls.from_matrix(d.tolist(), forbidden)

    def d(self, i: int, j: int) -> float:
        return self.dist[i][j]

    def allowed(self, i: int, j: int) -> bool:
        return i != j and edge(i, j) not in self.forbidden

    def masked_matrix(self) -> np.ndarray:
        """Distance matrix with ``inf`` on forbidden pairs and the diagonal."""
        m = np.array(self.dist, dtype=np.float64)
        np.fill_diagonal(m, math.inf)
        for i, j in self.forbidden:
            m[i, j] = m[j, i] = math.inf
        return m


@dataclass(frozen=True)
class Tour:
    order: tuple[int, ...]
    length: float


@dataclass(frozen=True)
class Incomplete:
    edges: tuple[PointId, ...]
    completeness: float | None


def tour_length(inst: TspInstance, order: Sequence[int]) -> float:
    n = len(order)
    return sum(inst.dist[order[k]][order[(k + 1) % n]] for k in range(n))


def canonical_order(order: Sequence[int]) -> tuple[int, ...]:
    """Rotate to start at node 0 and orient towards the lower neighbour."""
    order = list(order)
    k = order.index(0)
    order = order[k:] + order[:k]
    if len(order) > 2 and order[-1] < order[1]:
        order = [order[0]] + order[1:][::-1]
    return tuple(order)


def make_tour(inst: TspInstance, order: Sequence[int]) -> Tour:
    order = canonical_order(order)
    if sorted(order) != list(range(inst.n)):
        raise TspError(f"tour is not a permutation of 0..{inst.n - 1}")
    return Tour(order, tour_length(inst, order))


# contact rules; their shared bookkeeping lives in env.aux["tsp"]


@dataclass
class _Paths:
    n: int
    degree: list[int]
    # other end of the path for nodes that are path ends (isolated: itself)
    other_end: list[int | None]
    marked: int = 0
    last: tuple[int, int] | None = field(default=None)


def _bookkeeping(env: Environment, p: PointId):
    i, j = p
    st: _Paths = env.aux["tsp"]
    st.degree[i] += 1
    st.degree[j] += 1
    st.marked += 1
    ei, ej = st.other_end[i], st.other_end[j]
    if ei == j:
        # closing edge of the full cycle
        st.other_end[i] = st.other_end[j] = None
        st.last = None
        return ()
    if st.degree[i] == 2:
        st.other_end[i] = None
    if st.degree[j] == 2:
        st.other_end[j] = None
    st.other_end[ei] = ej
    st.other_end[ej] = ei
    st.last = (ei, ej)
    return ()


def _saturation(env: Environment, p: PointId):
    st: _Paths = env.aux["tsp"]
    out = []
    for v in p:
        if st.degree[v] == 2:
            for u in range(st.n):
                if u != v:
                    e = edge(u, v)
                    if env.states[e] is PointState.POTENTIAL:
                        out.append((e, PointState.FORBIDDEN_ALGORITHMIC))
    return out


def _subtour(env: Environment, p: PointId):
    st: _Paths = env.aux["tsp"]
    if st.last is None or st.marked >= st.n - 1:
        return ()
    e = edge(*st.last)
    if env.states[e] is PointState.POTENTIAL:
        return [(e, PointState.FORBIDDEN_ALGORITHMIC)]
    return ()


DEGREE_RULE = ContactRule("degree-bookkeeping", PointState.MARKED, _bookkeeping)
SATURATION_RULE = ContactRule("saturation", PointState.MARKED, _saturation)
SUBTOUR_RULE = ContactRule("subtour", PointState.MARKED, _subtour)
TSP_RULES = (DEGREE_RULE, SATURATION_RULE, SUBTOUR_RULE)


def build_tsp_environment(inst: TspInstance) -> Environment:
    n = inst.n
    initial = {}
    factors = {}
    for i in range(n):
        for j in range(n):
            if i == j:
                initial[(i, j)] = PointState.NOT_MAKING_SENSE
            elif i > j:
                initial[(i, j)] = PointState.NONEXISTENT
            else:
                factors[(i, j)] = inst.dist[i][j]
    for e in inst.forbidden:
        initial[e] = PointState.FORBIDDEN_USER
    env = init_environment([n, n], initial, factors, TSP_RULES)
    env.aux["tsp"] = _Paths(n, [0] * n, list(range(n)))
    return env


class TspValency:
    """Edge desirability: ``-d`` (greedy) or ``-d + lam * regret`` (regret).

    ``regret`` sums, over both endpoints, the gap between the cheapest and
    second-cheapest Potential edge at that node (0 with fewer than two).
    Gaps are recomputed once per engine step.
    """

    def __init__(self, mode: str = "greedy", lam: float = DEFAULT_LAMBDA):
        if mode not in ("greedy", "regret"):
            raise ValueError(f"unknown valency mode {mode!r}")
        if not math.isfinite(lam):
            raise ValueError("lambda must be finite")
        self.mode = mode
        self.lam = lam
        self._env = None
        self._step = -1
        self._gap: list[float] = []

    def _gaps(self, env: Environment) -> list[float]:
        n = env.axes[0]
        cheapest = [[] for _ in range(n)]
        for i, j in env.potential:
            d = env.factors[(i, j)]
            cheapest[i].append(d)
            cheapest[j].append(d)
        gaps = []
        for ds in cheapest:
            if len(ds) < 2:
                gaps.append(0.0)
            else:
                a, b = sorted(ds)[:2]
                gaps.append(b - a)
        return gaps

    def regret(self, env: Environment, e: PointId) -> float:
        if env is not self._env or env.step_counter != self._step:
            self._gap = self._gaps(env)
            self._env, self._step = env, env.step_counter
        return self._gap[e[0]] + self._gap[e[1]]

    def __call__(self, env: Environment, e: PointId) -> float:
        base = -env.factors[e]
        if self.mode == "greedy":
            return base
        return base + self.lam * self.regret(env, e)


def tsp_valency(env: Environment, e: PointId, mode: str = "greedy", lam: float = DEFAULT_LAMBDA):
    return TspValency(mode, lam)(env, e)


def extract_tour(inst: TspInstance, summary: SummaryDecision) -> Tour | Incomplete:
    if not summary.complete:
        # no marked edge at all: completeness is undefined, not 0
        frac = completeness(summary, inst.n) if summary.singles else None
        return Incomplete(tuple(summary.singles), frac)
    if len(summary.singles) != inst.n:
        raise EngineFault(f"complete summary has {len(summary.singles)} edges, expected {inst.n}")
    adj = [[] for _ in range(inst.n)]
    for i, j in summary.singles:
        adj[i].append(j)
        adj[j].append(i)
    if any(len(a) != 2 for a in adj):
        raise EngineFault("marked edges do not give every node degree 2")
    order = [0]
    prev, cur = 0, min(adj[0])
    while cur != 0:
        order.append(cur)
        a, b = adj[cur]
        prev, cur = cur, (b if a == prev else a)
        if len(order) > inst.n:
            break
    if len(order) != inst.n:
        raise EngineFault("marked edges form more than one cycle")
    return Tour(canonical_order(order), tour_length(inst, canonical_order(order)))


def tsp_metrics(inst: TspInstance, tour: Tour, optimal_length: float) -> tuple[float, float]:
    """``(length, optimal_length / length)``."""
    if optimal_length <= 0:
        raise ValueError("optimal_length must be positive")
    if optimal_length > tour.length * (1 + 1e-12):
        raise EngineFault(
            f"optimum {optimal_length} exceeds heuristic tour length {tour.length}"
        )
    return tour.length, min(1.0, optimal_length / tour.length)


@dataclass(frozen=True)
class TspResult:
    summary: SummaryDecision
    trace: list[StepRecord]
    tour: Tour | Incomplete
    env: Environment

    @property
    def complete(self) -> bool:
        return isinstance(self.tour, Tour)


def solve_tsp(inst: TspInstance, mode: str = "greedy", lam: float = DEFAULT_LAMBDA, on_step=None):
    env = build_tsp_environment(inst)
    summary, trace = run_synthesis(env, TspValency(mode, lam), inst.n, on_step=on_step)
    return TspResult(summary, trace, extract_tour(inst, summary), env)
