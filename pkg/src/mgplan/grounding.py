"""Schema instantiation: typed bindings, static pruning, dense proposition ids."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

from .pddl import ActionSchema, DomainDesc, Literal, ProblemDesc
from .strips import Goal, GroundAction, Proposition, State, mask_from_ids

logger = logging.getLogger(__name__)

DEFAULT_MAX_ACTIONS = 200_000


class GroundingError(Exception):
    pass


class CapacityExceeded(GroundingError):
    def __init__(self, count: int, limit: int):
        self.count = count
        self.limit = limit
        super().__init__(f"ground action count exceeded limit ({count} > {limit})")


@dataclass
class GroundProblem:
    """A fully propositional planning task with dense proposition ids."""

    domain_name: str
    problem_name: str
    propositions: list[Proposition]
    prop_ids: dict[Proposition, int]
    actions: list[GroundAction]
    init: State
    goal: Goal
    objects: dict[str, str] = field(default_factory=dict)  # name -> type

    @property
    def num_props(self) -> int:
        return len(self.propositions)

    def id_of(self, predicate: str, *args: str) -> int:
        return self.prop_ids[Proposition(predicate, args)]

    def mask_of(self, *atoms: tuple) -> State:
        return mask_from_ids(self.id_of(a[0], *a[1:]) for a in atoms)

    def describe_state(self, state: State) -> list[str]:
        from .strips import ids_from_mask

        return [str(self.propositions[i]) for i in ids_from_mask(state)]


class _PropTable:
    """Assigns dense ids in first-registration order (deterministic)."""

    def __init__(self):
        self.props: list[Proposition] = []
        self.ids: dict[Proposition, int] = {}

    def register(self, prop: Proposition) -> int:
        pid = self.ids.get(prop)
        if pid is None:
            pid = len(self.props)
            self.ids[prop] = pid
            self.props.append(prop)
        return pid


def _static_predicates(domain: DomainDesc) -> set[str]:
    """Predicates never touched by any effect: true iff true in the init state."""
    dynamic = set()
    for schema in domain.schemas:
        for lit in schema.add_effects:
            dynamic.add(lit.predicate)
        for lit in schema.del_effects:
            dynamic.add(lit.predicate)
    return set(domain.predicates) - dynamic


def _bind(lit: Literal, binding: dict[str, str]) -> Proposition:
    return Proposition(lit.predicate, tuple(binding.get(a, a) for a in lit.args))


def _candidates(domain: DomainDesc, objects: list[tuple[str, str]], wanted: str) -> list[str]:
    return [name for name, otype in objects if domain.is_subtype(otype, wanted)]


def ground(
    domain: DomainDesc,
    problem: ProblemDesc,
    max_actions: int = DEFAULT_MAX_ACTIONS,
) -> GroundProblem:
    """Enumerate type-respecting bindings of every schema into GroundActions.

    Actions whose static preconditions (predicates no effect ever touches)
    are false in the initial state are pruned.  Proposition ids are assigned
    densely in a fixed sweep order: init atoms, goal atoms, then per-action
    atoms in enumeration order, so identical inputs always yield identical
    ids and action ordering.
    """
    statics = _static_predicates(domain)
    static_truth = {
        Proposition(lit.predicate, lit.args)
        for lit in problem.init
        if lit.predicate in statics
    }

    table = _PropTable()
    init_ids = [table.register(Proposition(l.predicate, l.args)) for l in problem.init]
    goal_ids = [table.register(Proposition(l.predicate, l.args)) for l in problem.goal]

    actions: list[GroundAction] = []
    warned_schemas: set[str] = set()
    for schema in domain.schemas:
        pools = [_candidates(domain, problem.objects, ptype) for _, ptype in schema.params]
        if any(not pool for pool in pools):
            continue
        names = [v for v, _ in schema.params]
        for combo in itertools.product(*pools):
            binding = dict(zip(names, combo))
            pre_props = [_bind(l, binding) for l in schema.preconditions]
            if any(p.predicate in statics and p not in static_truth for p in pre_props):
                continue
            add_props = [_bind(l, binding) for l in schema.add_effects]
            del_props = [_bind(l, binding) for l in schema.del_effects]

            pre_ids = sorted({table.register(p) for p in pre_props})
            add_ids = sorted({table.register(p) for p in add_props})
            del_ids = sorted({table.register(p) for p in del_props})
            add_set = set(add_ids)
            if add_set & set(del_ids):
                # Delete-then-add semantics resolve the conflict in favor of add.
                if schema.name not in warned_schemas:
                    warned_schemas.add(schema.name)
                    logger.warning(
                        "schema '%s': add/delete conflict normalized in favor of add",
                        schema.name,
                    )
                del_ids = [i for i in del_ids if i not in add_set]

            name = "(" + " ".join((schema.name,) + combo) + ")" if combo else f"({schema.name})"
            actions.append(
                GroundAction(
                    id=len(actions),
                    name=name,
                    pre=mask_from_ids(pre_ids),
                    add=mask_from_ids(add_ids),
                    delete=mask_from_ids(del_ids),
                    pre_ids=tuple(pre_ids),
                    add_ids=tuple(add_ids),
                    del_ids=tuple(del_ids),
                )
            )
            if len(actions) > max_actions:
                raise CapacityExceeded(len(actions), max_actions)

    if not actions:
        raise GroundingError("grounding produced no actions")

    return GroundProblem(
        domain_name=domain.name,
        problem_name=problem.name,
        propositions=table.props,
        prop_ids=table.ids,
        actions=actions,
        init=mask_from_ids(init_ids),
        goal=Goal(mask_from_ids(goal_ids), complete=False),
        objects=dict(problem.objects),
    )


def load_ground_problem(domain_path, problem_path, max_actions: int = DEFAULT_MAX_ACTIONS) -> GroundProblem:
    from .pddl import parse_domain_file, parse_problem_file

    domain = parse_domain_file(domain_path)
    problem = parse_problem_file(problem_path, domain)
    return ground(domain, problem, max_actions=max_actions)
