"""Weighted A* over ground STRIPS states with node reuse across episodes.

One call = one search episode.  The tree passed in may carry nodes from
earlier episodes; stale nodes (iteration stamp below the current episode)
get their h refreshed and are put back on the frontier when the expansion
touches them, which is what makes the conservative tree update workable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .search_tree import OPEN, SearchNode, SearchTree
from .strips import Goal, GroundAction, goal_satisfied

SUCCESS = "success"
FAILURE = "failure"
RESOURCE = "resource"

_BUDGET_CHECK_EVERY = 64


@dataclass
class SearchOutcome:
    status: str
    node: SearchNode | None = None
    expanded: int = 0
    generated: int = 0
    heuristic_calls: int = 0
    resource_reason: str | None = None

    @property
    def success(self) -> bool:
        return self.status == SUCCESS


def search(
    actions: list[GroundAction],
    tree: SearchTree,
    goal: Goal,
    iteration: int,
    evaluator,
    over_budget: Callable[[], str | None] | None = None,
    on_expand: Callable[[], None] | None = None,
) -> SearchOutcome:
    """Run one weighted-A* episode on the shared tree.

    The goal test happens on selection, before the node is removed from
    OPEN, so a successful episode leaves the goal node on the frontier.
    Expansion walks actions in ascending id for deterministic replay.
    """
    expanded = 0
    generated = 0
    calls_before = evaluator.calls
    nodes = tree.nodes

    while not tree.open_is_empty():
        node = tree.select_min()
        if goal_satisfied(node.state, goal):
            return SearchOutcome(
                SUCCESS, node, expanded, generated, evaluator.calls - calls_before
            )
        tree.close_min(node)
        expanded += 1
        if on_expand is not None:
            on_expand()

        state = node.state
        base_g = node.g
        for action in actions:
            if state & action.pre != action.pre:
                continue
            successor = (state & ~action.delete) | action.add
            generated += 1
            cost = base_g + action.cost
            known = nodes.get(successor)
            if known is None:
                tree.add_child(node, action, successor, cost, evaluator(successor, goal), iteration)
                continue
            repush = False
            if cost < known.g and known is not tree.root:
                # Cheaper path found: adopt it and reopen.
                known.g = cost
                known.parent = node
                known.incoming = action
                repush = True
            if known.iteration < iteration:
                # h is stale (computed for an older goal): refresh and reopen.
                known.h = evaluator(known.state, goal)
                known.iteration = iteration
                repush = True
            if repush:
                tree.push(known)

        if over_budget is not None and expanded % _BUDGET_CHECK_EVERY == 0:
            reason = over_budget()
            if reason is not None:
                return SearchOutcome(
                    RESOURCE,
                    None,
                    expanded,
                    generated,
                    evaluator.calls - calls_before,
                    resource_reason=reason,
                )

    return SearchOutcome(FAILURE, None, expanded, generated, evaluator.calls - calls_before)
