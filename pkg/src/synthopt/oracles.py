"""Exact solvers and classical baselines.

These anchor the quality numbers: exact partition by enumeration or
meet-in-the-middle, exact TSP by Held-Karp, plus Karmarkar-Karp and
nearest-neighbour/2-opt as comparison heuristics.
"""
from __future__ import annotations

import enum
import heapq
import itertools
from dataclasses import dataclass

from synthopt import kernels
from synthopt.partition import Assignment, PartitionInstance, discrepancy
from synthopt.tsp import Incomplete, Tour, TspInstance, edge, make_tour

ENUMERATION_MAX = 24
PARTITION_MAX = 32
TSP_MAX = 15
BRUTE_FORCE_MAX = 10


class OracleRefusal(ValueError):
    """The instance is larger than the oracle's exactness bound."""


class Method(enum.Enum):
    ENUMERATION = "Enumeration"
    DP = "DP"
    MEET_IN_MIDDLE = "MeetInMiddle"


@dataclass(frozen=True)
class OracleResult:
    optimum: float | None
    witness: Assignment | Tour | None
    method: Method

    @property
    def feasible(self) -> bool:
        return self.witness is not None


def exact_partition(inst: PartitionInstance, method: Method | None = None) -> OracleResult:
    """Minimum heap difference over all bipartitions.

    Enumeration up to 24 items, meet-in-the-middle above (up to 32).
    """
    if inst.n > PARTITION_MAX:
        raise OracleRefusal(f"exact partition is limited to {PARTITION_MAX} items, got {inst.n}")
    if method is None:
        method = Method.ENUMERATION if inst.n <= ENUMERATION_MAX else Method.MEET_IN_MIDDLE
    if method is Method.ENUMERATION:
        if inst.n > ENUMERATION_MAX:
            raise OracleRefusal(f"enumeration is limited to {ENUMERATION_MAX} items")
        best, mask = kernels.partition_enumerate(inst.weights)
    elif method is Method.MEET_IN_MIDDLE:
        best, mask = kernels.partition_mitm(inst.weights)
    else:
        raise ValueError(f"{method.value} is not a partition method")
    witness = Assignment.from_mask(inst, mask)
    if discrepancy(witness) != best:
        raise AssertionError("partition kernel witness does not match its optimum")
    return OracleResult(best, witness, method)


def exact_tsp(inst: TspInstance) -> OracleResult:
    """Held-Karp over subsets; forbidden edges count as infinitely long.

    An infeasible instance (no Hamiltonian cycle avoiding forbidden edges)
    gives ``optimum=None`` and no witness.
    """
    if inst.n > TSP_MAX:
        raise OracleRefusal(f"Held-Karp is limited to {TSP_MAX} nodes, got {inst.n}")
    cost, order = kernels.held_karp(inst.masked_matrix())
    if order is None:
        return OracleResult(None, None, Method.DP)
    # re-evaluated in canonical order so it compares exactly with heuristic tours
    tour = make_tour(inst, order)
    return OracleResult(tour.length, tour, Method.DP)


def brute_force_tsp(inst: TspInstance) -> float | None:
    """Minimum tour length by enumerating permutations (cross-check only)."""
    if inst.n > BRUTE_FORCE_MAX:
        raise OracleRefusal(f"brute force is limited to {BRUTE_FORCE_MAX} nodes")
    best = None
    for perm in itertools.permutations(range(1, inst.n)):
        if perm[0] > perm[-1]:
            continue
        order = (0,) + perm
        if any(not inst.allowed(order[k], order[(k + 1) % inst.n]) for k in range(inst.n)):
            continue
        length = make_tour(inst, order).length
        if best is None or length < best:
            best = length
    return best


def baseline_partition_kk(inst: PartitionInstance) -> Assignment:
    """Karmarkar-Karp largest differencing."""
    # entries: (-difference, tiebreak, heap_a items, heap_b items); sum(a) - sum(b) = difference
    heap = [(-w, i, (i,), ()) for i, w in enumerate(inst.weights)]
    heapq.heapify(heap)
    counter = inst.n
    while len(heap) > 1:
        d1, _, a1, b1 = heapq.heappop(heap)
        d2, _, a2, b2 = heapq.heappop(heap)
        heapq.heappush(heap, (d1 - d2, counter, a1 + b2, b1 + a2))
        counter += 1
    _, _, a, _ = heap[0]
    a = set(a)
    return Assignment.from_sides(inst, [0 if i in a else 1 for i in range(inst.n)])


def baseline_tsp(inst: TspInstance, improve: bool = False) -> Tour | Incomplete:
    """Nearest neighbour from node 0, optionally followed by 2-opt."""
    n = inst.n
    order = [0]
    seen = {0}
    while len(order) < n:
        cur = order[-1]
        nxt = None
        for v in range(n):
            if v in seen or not inst.allowed(cur, v):
                continue
            if nxt is None or inst.dist[cur][v] < inst.dist[cur][nxt]:
                nxt = v
        if nxt is None:
            break
        order.append(nxt)
        seen.add(nxt)
    if len(order) < n or not inst.allowed(order[-1], 0):
        edges = tuple(edge(order[k], order[k + 1]) for k in range(len(order) - 1))
        return Incomplete(edges, len(edges) / n if edges else None)
    if improve:
        order = kernels.two_opt(inst.masked_matrix(), order)
    return make_tour(inst, order)


def within_bounds(task: str, n: int) -> bool:
    return n <= (TSP_MAX if task == "tsp" else PARTITION_MAX)

