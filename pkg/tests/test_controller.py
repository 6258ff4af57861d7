"""Closed-loop agent: delay decisions, execution loop, soundness, accounting."""

import math

import pytest

from mgplan.controller import (
    DelayDecision,
    InapplicableAction,
    MgpConfig,
    can_delay_new_search,
    execute_step,
    run_mgp,
)
from mgplan.goal_dynamics import GoalDynamicsConfig, GoalEnvironment
from mgplan.heuristics import HeuristicEvaluator
from mgplan.search_tree import SearchTree
from mgplan.strips import Goal, goal_satisfied, validate_plan
from mgplan.wastar import search
from oracles import build_problem, replay_trace


class FakeEval:
    """Returns scripted values keyed by (state, goal props)."""

    def __init__(self, table, default=1.0):
        self.table = table
        self.default = default
        self.calls = 0

    def __call__(self, state, goal):
        self.calls += 1
        mask = goal.props if isinstance(goal, Goal) else goal
        return self.table.get((state, mask), self.default)


def chain_setup():
    problem = build_problem(6, [([i], [i + 1], [i]) for i in range(5)], init=[0], goal=[5])
    ev = HeuristicEvaluator("zero", problem.actions, problem.num_props)
    tree = SearchTree(problem.init, problem.goal, 1.0, ev)
    out = search(problem.actions, tree, problem.goal, 1, ev)
    assert out.success
    return problem, tree, out.node


def static_env(problem, seed=0):
    return GoalEnvironment(
        problem.actions, problem.goal, GoalDynamicsConfig(1, seed=seed, enabled=False)
    )


def moving_env(problem, g_r, seed=0):
    return GoalEnvironment(problem.actions, problem.goal, GoalDynamicsConfig(g_r, seed=seed))


# -- can_delay_new_search -----------------------------------------------------


def test_delay_pf_arithmetic():
    problem, tree, target = chain_setup()
    s = tree.root.state
    g = Goal(1 << 5, complete=True)
    p = Goal(1 << 4, complete=True)
    ev = FakeEval({(s, g.props): 10.0, (s, p.props): 4.0, (p.props, g.props): 3.0})
    cfg = MgpConfig(pf_enabled=True, delay_coefficient=1.2)
    decision = can_delay_new_search(tree, s, g, p, cfg, ev, target=target)
    assert decision.kind == "pf"  # 12 > 7
    # Push the right side past 12: following the plan no longer looks better.
    ev2 = FakeEval({(s, g.props): 10.0, (s, p.props): 9.0, (p.props, g.props): 4.0})
    decision = can_delay_new_search(tree, s, g, p, cfg, ev2, target=target)
    assert decision.kind == "search"


def test_delay_unchanged_goal_continues_without_heuristic():
    problem, tree, target = chain_setup()
    g = Goal(1 << 5, complete=True)
    ev = FakeEval({})
    cfg = MgpConfig(pf_enabled=True, delay_coefficient=1.2)
    decision = can_delay_new_search(tree, tree.root.state, g, g, cfg, ev, target=target)
    assert decision.kind == "continue"
    assert ev.calls == 0


def test_delay_oc_open_leaf():
    # Two branches from the root; the goal-satisfying branch tip stays an
    # OPEN leaf because the other branch is the search target.
    problem = build_problem(3, [([0], [1], [0]), ([0], [2], [0])], init=[0], goal=[1])
    ev = HeuristicEvaluator("zero", problem.actions, problem.num_props)
    tree = SearchTree(problem.init, problem.goal, 1.0, ev)
    out = search(problem.actions, tree, problem.goal, 1, ev)
    assert out.success
    target = out.node
    leaf = tree.nodes[1 << 2]
    assert leaf.status == 0 and leaf is not target
    g = Goal(leaf.state, complete=True)
    p = Goal(target.state, complete=True)
    cfg = MgpConfig(oc_enabled=True)
    decision = can_delay_new_search(tree, tree.root.state, g, p, cfg, FakeEval({}), target=target)
    assert decision.kind == "oc" and decision.node is leaf


def test_delay_without_oc_checks_closed_only():
    # Same two-branch shape as above: with OC off the OPEN leaf is invisible,
    # a CLOSED hit is still served from the tree.
    problem = build_problem(3, [([0], [1], [0]), ([0], [2], [0])], init=[0], goal=[1])
    ev = HeuristicEvaluator("zero", problem.actions, problem.num_props)
    tree = SearchTree(problem.init, problem.goal, 1.0, ev)
    out = search(problem.actions, tree, problem.goal, 1, ev)
    target = out.node
    open_leaf = tree.nodes[1 << 2]
    cfg = MgpConfig(oc_enabled=False)
    p = Goal(target.state, complete=True)
    miss = can_delay_new_search(
        tree, tree.root.state, Goal(open_leaf.state, complete=True), p, cfg, FakeEval({}), target=target
    )
    assert miss.kind == "search"
    hit = can_delay_new_search(
        tree, tree.root.state, Goal(tree.root.state & -tree.root.state), p, cfg, FakeEval({}), target=target
    )
    assert hit.kind == "oc" and hit.node is tree.root  # root is CLOSED after expansion


def test_delay_infinite_estimates_force_search():
    problem, tree, target = chain_setup()
    s = tree.root.state
    g = Goal(1 << 5, complete=True)
    p = Goal(1 << 4, complete=True)
    cfg = MgpConfig(pf_enabled=True)
    inf = math.inf
    for table in (
        {(s, g.props): inf, (s, p.props): 1.0, (p.props, g.props): 1.0},
        {(s, g.props): 5.0, (s, p.props): inf, (p.props, g.props): 1.0},
        {(s, g.props): 5.0, (s, p.props): 1.0, (p.props, g.props): inf},
    ):
        decision = can_delay_new_search(tree, s, g, p, cfg, FakeEval(table), target=target)
        assert decision.kind == "search"


def test_delay_pf_requires_remaining_plan():
    problem, tree, target = chain_setup()
    # A goal state the tree has never stored, so containment misses.
    g = Goal((1 << 3) | (1 << 1), complete=True)
    p = Goal(target.state, complete=True)
    cfg = MgpConfig(pf_enabled=True)
    # Agent already at the plan's end: nothing to follow.
    decision = can_delay_new_search(
        tree, target.state, g, p, cfg, FakeEval({}, default=5.0), target=target
    )
    assert decision.kind == "search"


def test_delay_pf_memoizes_h_p_g():
    problem, tree, target = chain_setup()
    s = tree.root.state
    g = Goal(1 << 5, complete=True)
    p = Goal(1 << 4, complete=True)
    ev = FakeEval({}, default=5.0)
    cfg = MgpConfig(pf_enabled=True, delay_coefficient=1.2)
    cache = {}
    can_delay_new_search(tree, s, g, p, cfg, ev, target=target, pf_cache=cache)
    first = ev.calls
    can_delay_new_search(tree, s, g, p, cfg, ev, target=target, pf_cache=cache)
    assert ev.calls == first + 2  # h(s,g) and h(s,p) recomputed, h(p,g) cached
    assert first == 3


# -- execute_step ---------------------------------------------------------------


def test_execute_step_contract(sussman):
    env = static_env(sussman)
    plan = [a for a in sussman.actions if a.name == "(unstack c a)"]
    state, rest, goal = execute_step(sussman.init, plan, env)
    assert rest == []
    assert goal is sussman.goal
    assert not goal_satisfied(state, sussman.goal)


def test_execute_step_inapplicable_raises(sussman):
    env = static_env(sussman)
    bad = [a for a in sussman.actions if a.name == "(pick-up c)"]  # c is not clear+ontable
    with pytest.raises(InapplicableAction):
        execute_step(sussman.init, bad, env)


# -- full runs ------------------------------------------------------------------


def test_static_goal_single_episode_plan_executed(sussman):
    for flags in ((False, False), (True, False), (False, True), (True, True)):
        env = static_env(sussman)
        cfg = MgpConfig(heuristic="ff", oc_enabled=flags[0], pf_enabled=flags[1], cpu_budget_s=30)
        trace = run_mgp(sussman, cfg, env)
        assert trace.status == "success"
        assert trace.search_episodes == 1
        assert len(trace.executed) == 6  # ff finds the optimal plan here
        final_state, final_goal = replay_trace(trace, sussman)
        assert goal_satisfied(final_state, final_goal)


def test_oc_path_zero_additional_searches(sussman):
    """A goal that lands on a stored state is served from the tree."""
    env = moving_env(sussman, g_r=1, seed=3)
    cfg = MgpConfig(heuristic="ff", oc_enabled=True, pf_enabled=True, cpu_budget_s=30)
    trace = run_mgp(sussman, cfg, env)
    assert trace.status == "success"
    final_state, final_goal = replay_trace(trace, sussman)
    assert goal_satisfied(final_state, final_goal)


def test_moving_goal_soundness_many_seeds(sussman, gripper2):
    for problem in (sussman, gripper2):
        for seed in range(8):
            env = moving_env(problem, g_r=3, seed=seed)
            cfg = MgpConfig(heuristic="ff", oc_enabled=True, pf_enabled=True, cpu_budget_s=30)
            trace = run_mgp(problem, cfg, env)
            if trace.status == "success":
                final_state, final_goal = replay_trace(trace, problem)
                assert goal_satisfied(final_state, final_goal)
                assert final_state == trace.final_state
                assert final_goal == trace.final_goal.props


def test_trace_replay_matches_recorded_trajectory(sussman):
    env = moving_env(sussman, g_r=2, seed=5)
    cfg = MgpConfig(heuristic="ff", oc_enabled=True, cpu_budget_s=30)
    trace = run_mgp(sussman, cfg, env)
    state, goal = replay_trace(trace, sussman)
    assert state == trace.final_state
    executed = [ev[1] for ev in trace.events if ev[0] == "exec"]
    assert executed == trace.executed


def test_budget_exhaustion_reported():
    # A long corridor with zero heuristic and microscopic budget.
    problem = build_problem(
        30, [([i], [i + 1], [i]) for i in range(29)], init=[0], goal=[29]
    )
    env = GoalEnvironment(problem.actions, problem.goal, GoalDynamicsConfig(1, enabled=False))
    cfg = MgpConfig(heuristic="zero", cpu_budget_s=0.0)
    trace = run_mgp(problem, cfg, env)
    assert trace.status == "budget"


def test_failure_on_unsolvable():
    problem = build_problem(3, [([0], [1], [0])], init=[0], goal=[2])
    env = GoalEnvironment(problem.actions, problem.goal, GoalDynamicsConfig(1, enabled=False))
    trace = run_mgp(problem, MgpConfig(heuristic="ff"), env)
    assert trace.status == "failure"
    assert trace.search_episodes == 1


def test_pf_unchanged_goal_never_searches_while_plan_runs(sussman):
    env = static_env(sussman)
    cfg = MgpConfig(heuristic="ff", pf_enabled=True, delay_coefficient=1.2, cpu_budget_s=30)
    trace = run_mgp(sussman, cfg, env)
    assert trace.status == "success"
    assert trace.search_episodes == 1


def test_episode_accounting_oc_no_worse(sussman):
    """Paired seeds: enabling OC never needs more searches here."""
    for seed in range(6):
        counts = {}
        for oc in (False, True):
            env = moving_env(sussman, g_r=5, seed=seed)
            cfg = MgpConfig(heuristic="ff", oc_enabled=oc, cpu_budget_s=30)
            trace = run_mgp(sussman, cfg, env)
            counts[oc] = trace.search_episodes
        assert counts[True] <= counts[False], (seed, counts)


def test_trace_lines_roundtrip_fields(sussman, tmp_path):
    env = moving_env(sussman, g_r=2, seed=1)
    cfg = MgpConfig(heuristic="ff", oc_enabled=True, pf_enabled=True, cpu_budget_s=30)
    trace = run_mgp(sussman, cfg, env)
    path = tmp_path / "run.trace"
    trace.write(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("SEARCH-BEGIN i=1")
    assert lines[-1].startswith("RESULT status=")
    assert any(l.startswith("EXEC id=") for l in lines)
    if trace.goal_changes:
        assert any(l.startswith("GOAL-CHANGE t=") for l in lines)
