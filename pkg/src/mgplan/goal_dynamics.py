"""Moving-goal environment: a cost-counter-driven random walk of the goal state.

The clock is not wall time.  A counter t advances by one per expanded state
and per heuristic evaluation; every g_r ticks buy the goal one random
applicable action.  That makes goal speed a function of the planner's own
computation, identically on any machine.

The RNG is random.Random (Mersenne Twister), which is specified to produce
the same stream for the same seed on every platform and Python version we
support; trajectories are therefore reproducible from (seed, g_r) alone.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

from .strips import Goal, GroundAction, State, apply, applicable


@dataclass
class CostCounter:
    """t counts expansions + heuristic calls; t_p is the last consumed mark."""

    t: int = 0
    t_p: int = 0


@dataclass(frozen=True)
class GoalDynamicsConfig:
    goal_rate: int
    seed: int = 0
    enabled: bool = True

    def __post_init__(self):
        if self.goal_rate < 1:
            raise ValueError("goal_rate must be >= 1")


def steps_due(counter: CostCounter, goal_rate: int) -> int:
    """Number of pending goal mutations: floor((t - t_p) / g_r)."""
    return (counter.t - counter.t_p) // goal_rate


def evolve(
    goal: Goal,
    n: int,
    actions: list[GroundAction],
    rng: random.Random,
) -> tuple[Goal, list[int | None]]:
    """Apply n uniformly random applicable actions to the (complete) goal state.

    A step with no applicable action leaves the goal unchanged and is
    recorded as None.  Every produced goal is reachable from its
    predecessor by construction.
    """
    if not goal.complete:
        raise ValueError("only complete goal states evolve")
    state = goal.props
    applied: list[int | None] = []
    for _ in range(n):
        options = [a for a in actions if applicable(state, a)]
        if not options:
            applied.append(None)
            continue
        action = options[rng.randrange(len(options))]
        state = apply(state, action)
        applied.append(action.id)
    return Goal(state, complete=True), applied


class GoalEnvironment:
    """Owns the evolving goal, the cost counter and the run's RNG.

    One environment per run.  The search engine and the heuristic evaluator
    feed the counter through `tick`; the controller materializes pending
    mutations at its checkpoints through `update_goal`.
    """

    def __init__(self, actions: list[GroundAction], initial_goal: Goal, config: GoalDynamicsConfig):
        self.actions = actions
        self.config = config
        self.rng = random.Random(config.seed)
        self.counter = CostCounter()
        self.goal = initial_goal
        self.installed = False
        self.change_count = 0
        self.on_change: Callable[[int, int, list[int | None]], None] | None = None
        self.on_install: Callable[[int, Goal], None] | None = None

    def tick(self, n: int = 1):
        self.counter.t += n

    @property
    def enabled(self) -> bool:
        return self.config.enabled

    def install_initial_goal(self, solution_state: State) -> Goal:
        """Make the first solution state the (complete) goal to be chased.

        Counter ticks accrued before this point stay pending, so the cost
        of the first search is paid in goal movement at the next checkpoint.
        No-op when evolution is disabled.
        """
        if not self.config.enabled or self.installed:
            return self.goal
        self.goal = Goal(solution_state, complete=True)
        self.installed = True
        if self.on_install is not None:
            self.on_install(self.counter.t, self.goal)
        return self.goal

    def update_goal(self) -> Goal:
        """Materialize pending mutation steps; returns the current goal.

        t_p advances by n * g_r (not to t), so fractional progress carries
        over and the long-run mutation rate is exactly 1/g_r.
        """
        if not (self.installed and self.config.enabled):
            return self.goal
        n = steps_due(self.counter, self.config.goal_rate)
        if n <= 0:
            return self.goal
        self.counter.t_p += n * self.config.goal_rate
        self.goal, applied = evolve(self.goal, n, self.actions, self.rng)
        self.change_count += 1
        if self.on_change is not None:
            self.on_change(self.counter.t, n, applied)
        return self.goal
