"""Comparison agents sharing the same engine as the delay-based controller.

sastar replans from scratch on every observed goal change.  The
"GFRA*-style" agent keeps the tree, but on every change re-estimates h for
every stored node and only checks CLOSED for goal containment; it is a
behavioral model of what that algorithm is reported to do, not a
re-implementation, and is labeled accordingly in all outputs.
"""

from __future__ import annotations

from .controller import AgentTrace, ClosedLoopRunner, MgpConfig
from .goal_dynamics import GoalEnvironment
from .grounding import GroundProblem


def run_sastar(problem: GroundProblem, cfg: MgpConfig, env: GoalEnvironment) -> AgentTrace:
    """Successive A*: a fresh search tree per episode, no delay strategies."""
    return ClosedLoopRunner(problem, cfg, env, "sastar").run()


def run_gfra(problem: GroundProblem, cfg: MgpConfig, env: GoalEnvironment) -> AgentTrace:
    """GFRA*-style incremental replanner (full h refresh on goal change)."""
    return ClosedLoopRunner(problem, cfg, env, "gfra").run()
