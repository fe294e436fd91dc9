import itertools
import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synthopt.engine import (
    ContactRule,
    EngineFault,
    InvariantMonitor,
    NoDecision,
    PointState,
    StepRecord,
    SummaryDecision,
    apply_transition,
    completeness,
    dump_trace,
    init_environment,
    load_trace,
    replay_trace,
    run_synthesis,
    select_transition,
)

P = PointState


def grid(axes, initial=None, rules=()):
    pts = itertools.product(*(range(a) for a in axes))
    return init_environment(axes, initial, {p: 1.0 for p in pts}, rules)


def zero(env, p):
    return 0.0


def test_default_construction():
    env = grid([2, 2])
    assert len(env.potential) == 4
    assert env.counterpotential == set()
    assert env.step_counter == 0
    env.check()


def test_diagonal_not_making_sense():
    initial = {(i, i): P.NOT_MAKING_SENSE for i in range(8)}
    env = grid([8, 8], initial)
    assert len(env.potential) == 56
    assert env.count(P.NOT_MAKING_SENSE) == 8


def test_one_user_forbidden_point():
    env = grid([3], {(1,): P.FORBIDDEN_USER})
    assert env.potential == {(0,), (2,)}


def test_init_rejects_out_of_range_and_missing_factor():
    with pytest.raises(ValueError):
        grid([3], {(3,): P.FORBIDDEN_USER})
    with pytest.raises(ValueError):
        init_environment([2], factors={(0,): 1.0})
    with pytest.raises(ValueError):
        grid([2], {(0,): P.MARKED})
    with pytest.raises(ValueError):
        init_environment([1], factors={(0,): -1.0})
    with pytest.raises(ValueError):
        init_environment([1], factors={(0,): math.inf})


def test_missing_factor_allowed_for_non_potential():
    env = init_environment([2], {(1,): P.NONEXISTENT}, {(0,): 2.0})
    assert env.potential == {(0,)}


def test_select_max_then_lexicographic():
    env = grid([3])
    val = {(0,): 3.0, (1,): 5.0, (2,): 5.0}
    assert select_transition(env, lambda e, p: val[p]) == (1,)


def test_select_empty_and_singleton():
    env = grid([1])
    assert select_transition(env, lambda e, p: -7.0) == (0,)
    apply_transition(env, (0,))
    assert select_transition(env, zero) is None


def test_select_rejects_non_finite_valency():
    env = grid([2])
    with pytest.raises(EngineFault):
        select_transition(env, lambda e, p: math.nan)


def test_mark_only_point_without_rules():
    env = grid([1])
    rec = apply_transition(env, (0,))
    assert rec.reactions == ()
    assert env.step_counter == 1


def forbid_row_mate(env, p):
    i, s = p
    return [((i, 1 - s), P.FORBIDDEN_ALGORITHMIC)]


def test_single_rule_reaction():
    env = grid([1, 2], rules=[ContactRule("mate", P.MARKED, forbid_row_mate)])
    rec = apply_transition(env, (0, 0))
    assert [(r.point, r.old, r.new) for r in rec.reactions] == [
        ((0, 1), P.POTENTIAL, P.FORBIDDEN_ALGORITHMIC)
    ]
    assert env.counterpotential == {(0, 1)}
    env.check()


def test_two_rule_cascade():
    # hand trace: mark (0) -> rule A forbids (1) -> rule B sees (1) forbidden, forbids (2)
    a = ContactRule("a", P.MARKED, lambda e, p: [((1,), P.FORBIDDEN_ALGORITHMIC)] if p == (0,) else [])
    b = ContactRule(
        "b",
        P.FORBIDDEN_ALGORITHMIC,
        lambda e, p: [((2,), P.FORBIDDEN_ALGORITHMIC)] if p == (1,) else [],
    )
    env = grid([4], rules=[a, b])
    rec = apply_transition(env, (0,))
    assert [r.point for r in rec.reactions] == [(1,), (2,)]
    assert env.potential == {(3,)}
    env.check()


def test_rule_idempotent_refire():
    rule = ContactRule("twice", P.MARKED, lambda e, p: [((1,), P.FORBIDDEN_ALGORITHMIC)] * 2)
    env = grid([3], rules=[rule])
    rec = apply_transition(env, (0,))
    assert len(rec.reactions) == 1
    rec = apply_transition(env, (2,))
    assert rec.reactions == ()


def test_mark_non_potential_is_fault():
    env = grid([2], {(1,): P.FORBIDDEN_USER})
    with pytest.raises(EngineFault):
        apply_transition(env, (1,))
    apply_transition(env, (0,))
    with pytest.raises(EngineFault):
        apply_transition(env, (0,))


@pytest.mark.parametrize(
    "action",
    [
        lambda e, p: [((1,), P.MARKED)],
        lambda e, p: [((1,), P.POTENTIAL)],
        lambda e, p: [(p, P.FORBIDDEN_ALGORITHMIC)],  # marked -> forbidden
        lambda e, p: [((9,), P.FORBIDDEN_ALGORITHMIC)],
    ],
)
def test_monotonicity_guard(action):
    env = grid([2], rules=[ContactRule("bad", P.MARKED, action)])
    with pytest.raises(EngineFault):
        apply_transition(env, (0,))


def test_forbid_user_forbidden_point_is_noop():
    rule = ContactRule("r", P.MARKED, lambda e, p: [((1,), P.FORBIDDEN_ALGORITHMIC)])
    env = grid([2], {(1,): P.FORBIDDEN_USER}, [rule])
    assert apply_transition(env, (0,)).reactions == ()


def test_run_rule_free_completes():
    env = grid([4])
    summary, trace = run_synthesis(env, zero, 4)
    assert summary.complete
    assert len(trace) == 4
    assert summary.singles == ((0,), (1,), (2,), (3,))


def test_run_stalls_when_rules_forbid_everything():
    def after_two(env, p):
        if env.step_counter < 2:
            return []
        return [(q, P.FORBIDDEN_ALGORITHMIC) for q in sorted(env.potential)]

    env = grid([6], rules=[ContactRule("wipe", P.MARKED, after_two)])
    summary, trace = run_synthesis(env, zero, 4)
    assert not summary.complete
    assert len(summary.singles) == 2
    assert completeness(summary, 4) == 0.5


def test_run_rejects_bad_target():
    with pytest.raises(ValueError):
        run_synthesis(grid([1]), zero, 0)


@pytest.mark.parametrize("count,target,expected", [(8, 8, 1.0), (6, 8, 0.75), (1, 4, 0.25)])
def test_completeness(count, target, expected):
    summary = SummaryDecision(tuple((i,) for i in range(count)), count == target)
    assert completeness(summary, target) == expected


def test_completeness_of_nothing_is_no_decision():
    with pytest.raises(NoDecision):
        completeness(SummaryDecision((), False), 4)


def test_trace_line_format():
    rec = StepRecord(0, (1, 2), -1.5, ())
    assert rec.to_json() == '{"step": 0, "point": [1, 2], "valency": -1.5, "reactions": []}'
    env = grid([1, 2], rules=[ContactRule("mate", P.MARKED, forbid_row_mate)])
    rec = apply_transition(env, (0, 1), 3.0)
    doc = json.loads(rec.to_json())
    assert list(doc) == ["step", "point", "valency", "reactions"]
    assert doc["reactions"] == [{"point": [0, 0], "from": "Potential", "to": "ForbiddenAlgorithmic"}]


def test_trace_round_trip_and_replay():
    rules = [ContactRule("mate", P.MARKED, forbid_row_mate)]
    env = grid([3, 2], rules=rules)
    _, trace = run_synthesis(env, lambda e, p: p[0] + 0.5 * p[1], 3)
    text = dump_trace(trace)
    assert load_trace(text) == trace
    fresh = grid([3, 2], rules=rules)
    replay_trace(fresh, load_trace(text))
    assert fresh.states == env.states


def test_replay_detects_tampering():
    rules = [ContactRule("mate", P.MARKED, forbid_row_mate)]
    env = grid([2, 2], rules=rules)
    _, trace = run_synthesis(env, zero, 2)
    bad = [StepRecord(r.step_index, r.transition, r.valency_value, ()) for r in trace]
    with pytest.raises(EngineFault):
        replay_trace(grid([2, 2], rules=rules), bad)


@st.composite
def random_environments(draw):
    n = draw(st.integers(1, 6))
    forbidden = draw(st.sets(st.integers(0, 2 * n - 1), max_size=n))
    initial = {(k // 2, k % 2): P.FORBIDDEN_USER for k in forbidden}
    weights = draw(st.lists(st.integers(0, 5), min_size=2 * n, max_size=2 * n))
    return n, initial, weights


@settings(max_examples=60, deadline=None)
@given(random_environments())
def test_invariants_hold_on_random_runs(case):
    n, initial, weights = case
    rules = [ContactRule("mate", P.MARKED, forbid_row_mate)]
    env = grid([n, 2], initial, rules)
    monitor = InvariantMonitor(env)
    val = lambda e, p: float(weights[2 * p[0] + p[1]])
    summary, trace = run_synthesis(env, val, n, on_step=monitor)
    monitor.finish(trace)
    assert monitor.violations == []
    assert len(set(summary.singles)) == len(summary.singles)
    assert set(summary.singles) == {p for p, s in env.states.items() if s is P.MARKED}
    # every item row has at most one marked side
    assert len({i for i, _ in summary.singles}) == len(summary.singles)
    # determinism
    env2 = grid([n, 2], initial, rules)
    _, trace2 = run_synthesis(env2, val, n)
    assert dump_trace(trace) == dump_trace(trace2)
