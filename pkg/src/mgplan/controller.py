"""Closed-loop planning agents: the delay-based controller and its run trace.

The control loop interleaves search episodes with plan execution.  After every
successful search the agent tries to avoid the next search for as long as
possible: the goal may not have moved at all, Open Check may find the new
goal among stored nodes, and Plan Follow may judge the current plan still
worth finishing.  Only when all of those fail does the tree get its
conservative update and another weighted-A* episode.

Plan Follow is a per-step predicate, not a one-shot gate: the agent keeps
executing the stale plan only while h(s,g) * c > h(s,p) + h(p,g) keeps
holding as s advances (re-checked every step, two heuristic calls each,
all charged to the cost counter).  Once the goal is satisfied or the
detour stops looking worthwhile, the walk ends by itself.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .goal_dynamics import GoalEnvironment
from .grounding import GroundProblem
from .heuristics import HEURISTIC_KINDS, INF, HeuristicEvaluator
from .search_tree import SearchNode, SearchTree
from .strips import Goal, State, applicable, apply, goal_satisfied, validate_plan
from .wastar import FAILURE, RESOURCE, search


class InternalError(Exception):
    """A controller invariant broke; the run must never count as success."""


class InapplicableAction(InternalError):
    """An extracted plan step did not apply: the search tree is corrupt."""


@dataclass
class MgpConfig:
    """Knobs of one agent run; the four delay variants are the (oc, pf) flags."""

    weight: float = 1.0
    delay_coefficient: float = 1.2
    oc_enabled: bool = False
    pf_enabled: bool = False
    heuristic: str = "ff"
    cpu_budget_s: float | None = 60.0
    max_nodes: int | None = 4_000_000
    max_expansions: int | None = None

    def __post_init__(self):
        if self.weight < 1:
            raise ValueError("weight must be >= 1")
        if self.delay_coefficient <= 0:
            raise ValueError("delay coefficient must be > 0")
        if self.heuristic not in HEURISTIC_KINDS:
            raise ValueError(f"unknown heuristic: {self.heuristic}")


@dataclass
class AgentTrace:
    """Everything a run did, in replayable form."""

    algorithm: str
    domain: str
    problem: str
    weight: float
    delay_coefficient: float
    heuristic: str
    goal_rate: int
    seed: int
    status: str = "failure"
    events: list[tuple] = field(default_factory=list)
    executed: list[int] = field(default_factory=list)
    search_episodes: int = 0
    expansions: int = 0
    generated: int = 0
    heuristic_calls: int = 0
    goal_changes: int = 0
    final_t: int = 0
    cpu_time_ms: int = 0
    final_state: State = 0
    final_goal: Goal | None = None

    def lines(self) -> list[str]:
        """Line-oriented event log; one line per event plus a RESULT footer."""
        out = []
        for ev in self.events:
            kind = ev[0]
            if kind == "search-begin":
                out.append(f"SEARCH-BEGIN i={ev[1]}")
            elif kind == "search-end":
                out.append(
                    f"SEARCH-END i={ev[1]} status={ev[2]} expanded={ev[3]} "
                    f"generated={ev[4]} hcalls={ev[5]}"
                )
            elif kind == "exec":
                out.append(f"EXEC id={ev[1]} name={ev[2]}")
            elif kind == "goal-install":
                props = ",".join(str(i) for i in ev[2])
                out.append(f"GOAL-INSTALL t={ev[1]} props={props}")
            elif kind == "goal-change":
                acts = ",".join("-" if a is None else str(a) for a in ev[3])
                out.append(f"GOAL-CHANGE t={ev[1]} n={ev[2]} actions={acts}")
        out.append(
            f"RESULT status={self.status} episodes={self.search_episodes} "
            f"executed={len(self.executed)} expansions={self.expansions} "
            f"hcalls={self.heuristic_calls} goal-changes={self.goal_changes} t={self.final_t}"
        )
        return out

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(self.lines()) + "\n")


@dataclass(frozen=True)
class DelayDecision:
    kind: str  # "continue" | "oc" | "pf" | "search"
    node: SearchNode | None = None

    @property
    def delay(self) -> bool:
        return self.kind != "search"


def can_delay_new_search(
    tree: SearchTree,
    state: State,
    goal: Goal,
    previous: Goal | None,
    cfg: MgpConfig,
    evaluator: HeuristicEvaluator,
    target: SearchNode | None = None,
    pf_cache: dict | None = None,
) -> DelayDecision:
    """Decide whether another search can wait.

    An unchanged goal never forces a search (the tree was built for it).
    A changed goal that is still present in the tree is served from the
    tree: the base check covers explored (CLOSED) states, and Open Check
    extends it to the unexpanded OPEN leaves.  After a containment miss,
    Plan Follow compares finishing the current plan against searching:
    delay while h(s,g) * c > h(s,p) + h(p,g).  Any infinite estimate in
    that comparison falls back to searching.
    """
    if previous is not None and goal.props == previous.props:
        return DelayDecision("continue", target)
    node = tree.contains_goal(goal) if cfg.oc_enabled else tree.contains_goal_closed(goal)
    if node is not None:
        return DelayDecision("oc", node)
    if (
        cfg.pf_enabled
        and previous is not None
        and previous.complete
        and target is not None
        and target.state != state
    ):
        h_s_g = evaluator(state, goal)
        h_s_p = evaluator(state, previous)
        key = (previous.props, goal.props)
        h_p_g = pf_cache.get(key) if pf_cache is not None else None
        if h_p_g is None:
            h_p_g = evaluator(previous.props, goal)
            if pf_cache is not None:
                pf_cache[key] = h_p_g
        if h_s_g is not INF and h_s_p is not INF and h_p_g is not INF:
            if h_s_g * cfg.delay_coefficient > h_s_p + h_p_g:
                return DelayDecision("pf", target)
    return DelayDecision("search", None)


def execute_step(state: State, plan, env: GoalEnvironment):
    """Execute the plan's first action; returns (state', remaining, goal).

    The action must apply: the plan came out of the search tree, whose
    parent chains replay exactly, so failure here means corruption.
    """
    if not plan:
        raise InternalError("execute_step called with an empty plan")
    action = plan[0]
    if not applicable(state, action):
        raise InapplicableAction(f"plan step {action.name} inapplicable: tree corrupt")
    state = apply(state, action)
    goal = env.update_goal()
    return state, plan[1:], goal


class ClosedLoopRunner:
    """Shared driver for mgp / sastar / gfra; the algorithm tag picks the
    delay rule and the between-episode tree treatment."""

    def __init__(self, problem: GroundProblem, cfg: MgpConfig, env: GoalEnvironment, algorithm: str = "mgp"):
        if algorithm not in ("mgp", "sastar", "gfra"):
            raise ValueError(f"unknown algorithm: {algorithm}")
        self.problem = problem
        self.cfg = cfg
        self.env = env
        self.algorithm = algorithm
        self.trace = AgentTrace(
            algorithm=algorithm,
            domain=problem.domain_name,
            problem=problem.problem_name,
            weight=cfg.weight,
            delay_coefficient=cfg.delay_coefficient,
            heuristic=cfg.heuristic,
            goal_rate=env.config.goal_rate,
            seed=env.config.seed,
        )
        self.evaluator = HeuristicEvaluator(
            cfg.heuristic, problem.actions, problem.num_props, on_call=env.tick
        )
        self.tree: SearchTree | None = None
        self._pf_cache: dict = {}
        self._deadline: float | None = None
        env.on_install = lambda t, goal: self.trace.events.append(
            ("goal-install", t, tuple(sorted(_bits(goal.props))))
        )
        env.on_change = lambda t, n, acts: self.trace.events.append(("goal-change", t, n, tuple(acts)))

    # -- budget ---------------------------------------------------------------

    def _over_budget(self) -> str | None:
        if self._deadline is not None and time.process_time() >= self._deadline:
            return "time"
        if self.cfg.max_nodes is not None and self.tree is not None and len(self.tree) > self.cfg.max_nodes:
            return "memory"
        if self.cfg.max_expansions is not None and self.trace.expansions >= self.cfg.max_expansions:
            return "expansions"
        return None

    # -- episode plumbing -------------------------------------------------------

    def _search_episode(self, goal: Goal, iteration: int):
        self.trace.events.append(("search-begin", iteration))
        before = self.trace.expansions

        def on_expand():
            self.env.tick()
            self.trace.expansions += 1

        outcome = search(
            self.problem.actions,
            self.tree,
            goal,
            iteration,
            self.evaluator,
            over_budget=self._over_budget,
            on_expand=on_expand,
        )
        self.trace.generated += outcome.generated
        self.trace.search_episodes += 1
        self.trace.events.append(
            (
                "search-end",
                iteration,
                outcome.status,
                self.trace.expansions - before,
                outcome.generated,
                outcome.heuristic_calls,
            )
        )
        return outcome

    def _prepare_next_search(self, state: State, goal: Goal, iteration: int):
        if self.algorithm == "sastar":
            # From-scratch baseline: the old tree is thrown away wholesale.
            self.tree = SearchTree(state, goal, self.cfg.weight, self.evaluator, iteration=iteration)
        elif self.algorithm == "gfra":
            # Attributed baseline behavior: every stored node is re-estimated.
            self.tree.refresh_all(goal, iteration, self.evaluator)
        else:
            self.tree.update_search_tree(state, goal, iteration, self.evaluator)

    def _delay_decision(self, state: State, goal: Goal, previous: Goal | None, target) -> DelayDecision:
        if self.algorithm == "mgp":
            return can_delay_new_search(
                self.tree, state, goal, previous, self.cfg, self.evaluator, target, self._pf_cache
            )
        if previous is not None and goal.props == previous.props:
            return DelayDecision("continue", target)
        if self.algorithm == "gfra":
            node = self.tree.contains_goal_closed(goal)
            if node is not None:
                return DelayDecision("oc", node)
        return DelayDecision("search", None)

    # -- main loop --------------------------------------------------------------

    def run(self) -> AgentTrace:
        cfg = self.cfg
        env = self.env
        start = time.process_time()
        if cfg.cpu_budget_s is not None:
            self._deadline = start + cfg.cpu_budget_s

        state = self.problem.init
        goal = env.goal
        status = None
        target: SearchNode | None = None
        previous: Goal | None = None
        iteration = 0

        try:
            if goal_satisfied(state, goal):
                status = "success"
            while status is None:
                iteration += 1
                if self.tree is None:
                    self.tree = SearchTree(state, goal, cfg.weight, self.evaluator, iteration=iteration)
                outcome = self._search_episode(goal, iteration)
                if outcome.status == RESOURCE:
                    status = "budget"
                    break
                if outcome.status == FAILURE:
                    status = "failure"
                    break
                if not env.installed and env.enabled:
                    goal = env.install_initial_goal(outcome.node.state)
                target = outcome.node
                previous = goal

                # Delay loop: keep executing / re-extracting while a new search can wait.
                while True:
                    if self._over_budget():
                        status = "budget"
                        break
                    goal = env.update_goal()
                    if goal_satisfied(state, goal):
                        status = "success"
                        break
                    decision = self._delay_decision(state, goal, previous, target)
                    if not decision.delay:
                        break
                    if decision.kind == "oc":
                        target = decision.node
                        previous = goal
                    plan = self.tree.extract_plan(target)
                    state, goal, status = self._execute(state, goal, plan, previous)
                    if status is not None:
                        break
                    if goal_satisfied(state, goal):
                        status = "success"
                        break
                    if self.algorithm != "sastar":
                        self.tree.delete_states_out_of_tree(state)
                if status is not None:
                    break
                self._prepare_next_search(state, goal, iteration + 1)
        except InternalError:
            self.trace.status = "failure"
            self._finish(state, goal, start)
            raise

        self.trace.status = status
        self._finish(state, goal, start)
        return self.trace

    def _pf_still_worth_following(self, state: State, goal: Goal, previous: Goal | None) -> bool:
        """Per-step Plan Follow test: h(s,g) * c > h(s,p) + h(p,g), all finite."""
        if previous is None or not previous.complete:
            return False
        h_s_g = self.evaluator(state, goal)
        h_s_p = self.evaluator(state, previous)
        key = (previous.props, goal.props)
        h_p_g = self._pf_cache.get(key)
        if h_p_g is None:
            h_p_g = self.evaluator(previous.props, goal)
            self._pf_cache[key] = h_p_g
        if h_s_g is INF or h_s_p is INF or h_p_g is INF:
            return False
        return h_s_g * self.cfg.delay_coefficient > h_s_p + h_p_g

    def _execute(self, state: State, goal: Goal, plan, previous: Goal | None):
        """Inner execution loop: plan-reaches-goal disjunct or live Plan Follow."""
        pf_on = self.algorithm == "mgp" and self.cfg.pf_enabled
        reaches = validate_plan(state, plan, goal)
        while True:
            satisfied = goal_satisfied(state, goal)
            keep_going = not satisfied and reaches
            if not keep_going and pf_on and plan and not satisfied:
                keep_going = self._pf_still_worth_following(state, goal, previous)
            if not keep_going:
                return state, goal, None
            if self._over_budget():
                return state, goal, "budget"
            before = goal
            action = plan[0]
            state, plan, goal = execute_step(state, plan, self.env)
            self.trace.executed.append(action.id)
            self.trace.events.append(("exec", action.id, action.name))
            if goal.props != before.props:
                reaches = validate_plan(state, plan, goal)
            # Goal unchanged: the suffix reaches the same end state, no recheck.

    def _finish(self, state: State, goal: Goal, start: float):
        self.trace.cpu_time_ms = int(round((time.process_time() - start) * 1000))
        self.trace.heuristic_calls = self.evaluator.calls
        self.trace.goal_changes = self.env.change_count
        self.trace.final_t = self.env.counter.t
        self.trace.final_state = state
        self.trace.final_goal = goal


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def run_mgp(problem: GroundProblem, cfg: MgpConfig, env: GoalEnvironment) -> AgentTrace:
    """Run the delay-based agent (Open Check / Plan Follow per cfg flags)."""
    return ClosedLoopRunner(problem, cfg, env, "mgp").run()
