"""mgplan: closed-loop STRIPS planning under dynamically moving goals."""

from .baselines import run_gfra, run_sastar
from .controller import (
    AgentTrace,
    DelayDecision,
    InapplicableAction,
    InternalError,
    MgpConfig,
    can_delay_new_search,
    execute_step,
    run_mgp,
)
from .goal_dynamics import CostCounter, GoalDynamicsConfig, GoalEnvironment, evolve, steps_due
from .grounding import CapacityExceeded, GroundingError, GroundProblem, ground, load_ground_problem
from .heuristics import HEURISTIC_KINDS, HeuristicEvaluator, evaluate, is_admissible
from .pddl import (
    PddlError,
    PddlSyntaxError,
    UnknownObject,
    UnknownPredicate,
    UnsupportedFeature,
    parse_domain,
    parse_domain_file,
    parse_problem,
    parse_problem_file,
)
from .search_tree import EmptyOpen, SearchNode, SearchTree, StateNotInTree
from .strips import (
    Goal,
    GroundAction,
    NotApplicable,
    Plan,
    Proposition,
    State,
    applicable,
    apply,
    apply_sequence,
    goal_satisfied,
    ids_from_mask,
    mask_from_ids,
    validate_plan,
)
from .wastar import SearchOutcome, search

__version__ = "0.1.0"
