"""Ground STRIPS semantics: propositions, states, actions, plan application.

States are plain ``int`` bit masks over the dense proposition ids assigned
by grounding; bit k set means proposition k holds.  Masks are immutable and
hash exactly, which is what duplicate detection in the search tree relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

State = int


class NotApplicable(Exception):
    """An action's preconditions do not hold in the state it was applied to."""

    def __init__(self, action: "GroundAction", index: int | None = None):
        self.action = action
        self.index = index
        where = f" at step {index}" if index is not None else ""
        super().__init__(f"action {action.name} not applicable{where}")


@dataclass(frozen=True)
class Proposition:
    """A fully ground atom, e.g. ``(on a b)``."""

    predicate: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return f"({self.predicate})"
        return "(" + self.predicate + " " + " ".join(self.args) + ")"


@dataclass(frozen=True)
class Goal:
    """A conjunction of propositions; ``complete`` marks a full world state."""

    props: State
    complete: bool = False

    def __post_init__(self):
        if self.props == 0 and self.complete:
            raise ValueError("a complete goal cannot be empty")


@dataclass(frozen=True, eq=False)
class GroundAction:
    """A ground operator with precondition/add/delete masks and unit cost.

    ``pre_ids``/``add_ids``/``del_ids`` carry the same sets as sorted id
    tuples for code that needs to iterate propositions (heuristics, logs).
    """

    id: int
    name: str
    pre: State
    add: State
    delete: State
    pre_ids: tuple[int, ...]
    add_ids: tuple[int, ...]
    del_ids: tuple[int, ...]
    cost: int = 1

    def __repr__(self) -> str:
        return f"GroundAction({self.id}, {self.name!r})"


Plan = Sequence[GroundAction]


def mask_from_ids(ids: Iterable[int]) -> State:
    mask = 0
    for i in ids:
        mask |= 1 << i
    return mask


def ids_from_mask(mask: State) -> Iterator[int]:
    """Yield set bit positions in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def applicable(state: State, action: GroundAction) -> bool:
    """True iff the action's precondition set is contained in the state."""
    return state & action.pre == action.pre


def apply(state: State, action: GroundAction) -> State:
    """Transition function: delete effects removed first, then adds unioned.

    Raises NotApplicable when the precondition does not hold (the transition
    is undefined there rather than silently absorbing).
    """
    if state & action.pre != action.pre:
        raise NotApplicable(action)
    return (state & ~action.delete) | action.add


def apply_sequence(state: State, plan: Plan) -> State:
    """Left fold of apply over the plan; the empty plan returns the state."""
    for index, action in enumerate(plan):
        if state & action.pre != action.pre:
            raise NotApplicable(action, index)
        state = (state & ~action.delete) | action.add
    return state


def goal_satisfied(state: State, goal: Goal | State) -> bool:
    mask = goal.props if isinstance(goal, Goal) else goal
    return state & mask == mask


def validate_plan(state: State, plan: Plan, goal: Goal | State) -> bool:
    """True iff the plan applies stepwise from the state and reaches the goal."""
    try:
        end = apply_sequence(state, plan)
    except NotApplicable:
        return False
    return goal_satisfied(end, goal)
