"""Delete-relaxation heuristics: relaxed-plan (ff), additive, max, goal-count, zero.

All estimators share the convention that ``math.inf`` means "some goal
proposition is unreachable even ignoring delete effects", which in STRIPS
implies a true dead end.  Values are otherwise non-negative integers in
unit-cost space.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable

from .strips import Goal, GroundAction, State, ids_from_mask

HEURISTIC_KINDS = ("ff", "add", "max", "goal_count", "zero")

INF = math.inf


def is_admissible(kind: str) -> bool:
    """max and zero never overestimate under unit costs; the rest may."""
    if kind not in HEURISTIC_KINDS:
        raise ValueError(f"unknown heuristic kind: {kind}")
    return kind in ("max", "zero")


class HeuristicEvaluator:
    """Estimates H(state, goal) for one run.

    Not shareable across concurrent runs: the per-call counter hook and the
    precomputed achiever table belong to the run that owns the evaluator.
    ``on_call`` fires once per evaluation (the cost model charges every
    heuristic call).
    """

    def __init__(
        self,
        kind: str,
        actions: list[GroundAction],
        num_props: int,
        on_call: Callable[[], None] | None = None,
    ):
        if kind not in HEURISTIC_KINDS:
            raise ValueError(f"unknown heuristic kind: {kind}")
        self.kind = kind
        self.actions = actions
        self.num_props = num_props
        self.on_call = on_call
        self.calls = 0
        if kind == "ff":
            self._achievers: list[list[int]] = [[] for _ in range(num_props)]
            for a in actions:
                for p in a.add_ids:
                    self._achievers[p].append(a.id)

    def __call__(self, state: State, goal: Goal | State) -> float:
        self.calls += 1
        if self.on_call is not None:
            self.on_call()
        mask = goal.props if isinstance(goal, Goal) else goal
        if state & mask == mask:
            return 0
        if self.kind == "zero":
            return 0
        if self.kind == "goal_count":
            return (mask & ~state).bit_count()
        if self.kind == "ff":
            return self._ff(state, mask)
        return self._cost_fixpoint(state, mask, self.kind)

    def _cost_fixpoint(self, state: State, goal_mask: State, kind: str) -> float:
        """Generalized Bellman fixpoint over the delete relaxation."""
        cost = [INF] * self.num_props
        for p in ids_from_mask(state):
            cost[p] = 0
        use_max = kind == "max"
        actions = self.actions
        changed = True
        while changed:
            changed = False
            for a in actions:
                acc = 0
                for q in a.pre_ids:
                    c = cost[q]
                    if c is INF:
                        acc = INF
                        break
                    if use_max:
                        if c > acc:
                            acc = c
                    else:
                        acc += c
                if acc is INF:
                    continue
                through = acc + a.cost
                for p in a.add_ids:
                    if through < cost[p]:
                        cost[p] = through
                        changed = True
        total = 0
        for p in ids_from_mask(goal_mask):
            c = cost[p]
            if c is INF:
                return INF
            if use_max:
                if c > total:
                    total = c
            else:
                total += c
        return total

    def _ff(self, state: State, goal_mask: State) -> float:
        """Relaxed-plan length: leveled reachability then greedy backchaining.

        The achiever chosen for a subgoal at level l is the lowest-id action
        first applicable at level l-1, so repeated evaluations are identical.
        """
        level = [0] * self.num_props  # valid only where `reached` has the bit
        action_level: dict[int, int] = {}
        reached = state
        frontier_goal = goal_mask & ~reached
        k = 0
        while frontier_goal:
            newly = 0
            for a in self.actions:
                if a.id not in action_level and reached & a.pre == a.pre:
                    action_level[a.id] = k
                    newly |= a.add & ~reached
            if newly == 0:
                return INF
            k += 1
            for p in ids_from_mask(newly):
                level[p] = k
            reached |= newly
            frontier_goal &= ~newly

        max_level = 0
        for p in ids_from_mask(goal_mask & ~state):
            if level[p] > max_level:
                max_level = level[p]
        subgoals: list[set[int]] = [set() for _ in range(max_level + 1)]
        for p in ids_from_mask(goal_mask & ~state):
            subgoals[level[p]].add(p)

        selected: set[int] = set()
        # marked[l]: props already guaranteed true at level l by selected actions.
        marked: list[set[int]] = [set() for _ in range(max_level + 1)]
        for l in range(max_level, 0, -1):
            for p in sorted(subgoals[l]):
                if p in marked[l]:
                    continue
                best = None
                for aid in self._achievers[p]:
                    if action_level.get(aid) == l - 1:
                        best = aid
                        break  # achiever lists are ascending by action id
                # By construction an achiever at l-1 exists for any prop at level l.
                assert best is not None
                selected.add(best)
                action = self.actions[best]
                for q in action.pre_ids:
                    lq = level[q]
                    if lq > 0 and q not in marked[lq] and not (state & (1 << q)):
                        subgoals[lq].add(q)
                for f in action.add_ids:
                    marked[l].add(f)
                    marked[l - 1].add(f)
        return len(selected)


def evaluate(
    kind: str,
    state: State,
    goal: Goal | State,
    actions: list[GroundAction],
    num_props: int,
) -> float:
    """One-shot evaluation; pure function of its arguments."""
    return HeuristicEvaluator(kind, actions, num_props)(state, goal)
