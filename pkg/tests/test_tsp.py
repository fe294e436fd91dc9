import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_tsp
from synthopt.engine import (
    EngineFault,
    InvariantMonitor,
    PointState,
    SummaryDecision,
    apply_transition,
    dump_trace,
    run_synthesis,
    select_transition,
)
from synthopt.tsp import (
    Incomplete,
    Tour,
    TspError,
    TspInstance,
    TspValency,
    build_tsp_environment,
    edge,
    extract_tour,
    solve_tsp,
    tour_length,
    tsp_metrics,
    tsp_valency,
)

SQUARE = [[0, 1, 5, 1], [1, 0, 1, 5], [5, 1, 0, 1], [1, 5, 1, 0]]


def uniform(n, d=1.0):
    return TspInstance.from_matrix([[0 if i == j else d for j in range(n)] for i in range(n)])


def random_instance(seed, n):
    rng = np.random.default_rng(seed)
    return TspInstance.from_points(rng.random((n, 2)))


def test_environment_n3():
    env = build_tsp_environment(uniform(3))
    assert len(env.potential) == 3
    assert env.count(PointState.NOT_MAKING_SENSE) == 3
    assert env.count(PointState.NONEXISTENT) == 3
    assert len(env.rules) == 3


def test_environment_n8_with_interdictions():
    forbidden = [(0, 3), (1, 6), (2, 5), (4, 7), (5, 6)]
    inst = TspInstance.from_matrix(uniform(8).dist, forbidden)
    env = build_tsp_environment(inst)
    assert len(env.potential) == 28 - len(forbidden)
    assert env.count(PointState.FORBIDDEN_USER) == len(forbidden)
    assert env.count(PointState.NOT_MAKING_SENSE) == 8


def test_rules_on_four_node_path():
    # hand fired: after {0,1},{1,2} node 1 is saturated -> {1,3} forbidden;
    # path 0-1-2 has ends 0 and 2 -> {0,2} forbidden (2 < n-1 marked)
    env = build_tsp_environment(uniform(4))
    apply_transition(env, (0, 1))
    rec = apply_transition(env, (1, 2))
    assert {r.point for r in rec.reactions} == {(1, 3), (0, 2)}
    assert env.potential == {(0, 3), (2, 3)}


def test_closing_edge_allowed_at_n_minus_one():
    env = build_tsp_environment(uniform(4))
    for e in [(0, 1), (1, 2), (2, 3)]:
        apply_transition(env, e)
    assert env.potential == {(0, 3)}


def test_greedy_valency():
    env = build_tsp_environment(TspInstance.from_matrix([[0, 5, 5], [5, 0, 5], [5, 5, 0]]))
    assert tsp_valency(env, (0, 1)) == -5


def test_greedy_picks_first_shortest():
    inst = TspInstance.from_matrix([[0, 5, 1], [5, 0, 1], [1, 1, 0]])
    env = build_tsp_environment(inst)
    assert select_transition(env, TspValency()) == (0, 2)


def test_regret_gaps():
    inst = TspInstance.from_matrix(SQUARE)
    env = build_tsp_environment(inst)
    v = TspValency("regret", 0.5)
    # every node sees {1, 1, 5}: gap 0
    assert v(env, (0, 1)) == -1.0
    apply_transition(env, (0, 1))
    # node 0 now sees {5, 1} over {0,2},{0,3}: gap 4; node 3 sees {1 (0,3), 1 (2,3), 5 (1,3)}
    assert v.regret(env, (0, 3)) == 4.0 + 0.0


def test_valency_mode_validation():
    with pytest.raises(ValueError):
        TspValency("best")


@pytest.mark.parametrize("seed", range(20))
def test_regret_lambda_zero_matches_greedy(seed):
    inst = random_instance(seed, 9)
    a = solve_tsp(inst, "greedy")
    b = solve_tsp(inst, "regret", 0.0)
    assert [r.transition for r in a.trace] == [r.transition for r in b.trace]


def test_extract_square_tour():
    inst = TspInstance.from_matrix(SQUARE)
    summary = SummaryDecision(((0, 1), (1, 2), (2, 3), (0, 3)), True)
    tour = extract_tour(inst, summary)
    assert tour == Tour((0, 1, 2, 3), 4.0)


def test_all_tours_of_square():
    # three distinct tours: 4, 12, 12
    lengths = sorted(
        {tour_length(TspInstance.from_matrix(SQUARE), (0,) + p) for p in itertools.permutations((1, 2, 3))}
    )
    assert lengths == [4.0, 12.0]
    res = solve_tsp(TspInstance.from_matrix(SQUARE))
    assert res.tour == Tour((0, 1, 2, 3), 4.0)


def test_uniform_length():
    res = solve_tsp(uniform(4))
    assert res.tour.length == 4


def test_extract_rejects_broken_complete_summary():
    inst = uniform(6)
    two_triangles = ((0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5))
    with pytest.raises(EngineFault):
        extract_tour(inst, SummaryDecision(two_triangles, True))
    with pytest.raises(EngineFault):
        extract_tour(inst, SummaryDecision(two_triangles[:5], True))


def test_extract_incomplete():
    inst = uniform(4)
    out = extract_tour(inst, SummaryDecision(((0, 1), (0, 2)), False))
    assert out == Incomplete(((0, 1), (0, 2)), 0.5)


def test_metrics():
    inst = uniform(4)
    assert tsp_metrics(inst, Tour((0, 1, 2, 3), 4.0), 4.0) == (4.0, 1.0)
    assert tsp_metrics(inst, Tour((0, 1, 2, 3), 5.0), 4.0) == (5.0, 0.8)
    with pytest.raises(ValueError):
        tsp_metrics(inst, Tour((0, 1, 2, 3), 5.0), 0.0)
    with pytest.raises(EngineFault):
        tsp_metrics(inst, Tour((0, 1, 2, 3), 4.0), 5.0)


def test_instance_validation():
    with pytest.raises(TspError):
        TspInstance.from_matrix([[0, 1], [1, 0]])
    with pytest.raises(TspError):
        TspInstance.from_matrix([[0, 1, 2], [1, 0, 1], [3, 1, 0]])
    with pytest.raises(TspError):
        TspInstance.from_matrix(uniform(3).dist, [(1, 1)])
    with pytest.raises(TspError):
        TspInstance.from_matrix([[0, -1, 1], [-1, 0, 1], [1, 1, 0]])


def test_euclidean_rounding():
    inst = TspInstance.from_points([[0, 0], [1, 1], [0, 1]])
    assert inst.dist[0][1] == 1.414214


def test_latent_risk_stall():
    inst = TspInstance.from_matrix(uniform(4).dist, [(2, 3), (1, 3)])
    env = build_tsp_environment(inst)
    monitor = InvariantMonitor(env)
    summary, trace = run_synthesis(env, TspValency(), 4, on_step=monitor)
    monitor.finish(trace)
    assert monitor.violations == []
    assert not summary.complete
    assert extract_tour(inst, summary) == Incomplete(((0, 1), (0, 2)), 0.5)


def _check_structure(inst, res):
    assert res.complete
    deg = [0] * inst.n
    for i, j in res.summary.singles:
        deg[i] += 1
        deg[j] += 1
    assert deg == [2] * inst.n
    assert sorted(res.tour.order) == list(range(inst.n))
    assert all(edge(a, b) not in inst.forbidden for a, b in res.summary.singles)
    assert res.tour.length == pytest.approx(tour_length(inst, res.tour.order), rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 12), st.integers(0, 2**32), st.sampled_from(["greedy", "regret"]))
def test_complete_graph_properties(n, seed, mode):
    inst = random_instance(seed, n)
    env = build_tsp_environment(inst)
    monitor = InvariantMonitor(env)
    degrees = []

    def audit(env, rec):
        monitor(env, rec)
        st_ = env.aux["tsp"]
        degrees.append(max(st_.degree))
        for v in range(n):
            if st_.degree[v] == 2:
                assert not any(v in e for e in env.potential)
        marked = env.marked
        if len(marked) < n:
            # acyclic: union-find over marked edges
            parent = list(range(n))

            def find(x):
                while parent[x] != x:
                    x = parent[x]
                return x

            for a, b in marked:
                ra, rb = find(a), find(b)
                assert ra != rb, "premature cycle"
                parent[ra] = rb

    summary, trace = run_synthesis(env, TspValency(mode), n, on_step=audit)
    monitor.finish(trace)
    assert monitor.violations == []
    assert max(degrees) <= 2
    res = solve_tsp(inst, mode)
    _check_structure(inst, res)
    if n <= 8:
        assert res.tour.length >= brute_tsp(inst.dist) - 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 8), st.integers(0, 2**32), st.data())
def test_interdicted_instances_never_crash(n, seed, data):
    base = random_instance(seed, n)
    pairs = list(itertools.combinations(range(n), 2))
    forbidden = data.draw(st.lists(st.sampled_from(pairs), max_size=len(pairs) // 2, unique=True))
    inst = TspInstance.from_matrix(base.dist, forbidden)
    env = build_tsp_environment(inst)
    monitor = InvariantMonitor(env)
    summary, trace = run_synthesis(env, TspValency(), n, on_step=monitor)
    monitor.finish(trace)
    assert monitor.violations == []
    out = extract_tour(inst, summary)
    if summary.complete:
        assert isinstance(out, Tour)
        assert all(edge(a, b) not in inst.forbidden for a, b in summary.singles)
    else:
        assert isinstance(out, Incomplete)
        assert out.completeness is None or out.completeness < 1


def test_trace_deterministic():
    inst = random_instance(3, 10)
    assert dump_trace(solve_tsp(inst).trace) == dump_trace(solve_tsp(inst).trace)
