"""Typed-STRIPS PDDL frontend: tokenizer, domain parser, problem parser.

Supports exactly the :strips/:typing fragment with positive preconditions
and positive goals.  Everything outside the fragment fails loudly with
UnsupportedFeature instead of misparsing.  Symbols are case-insensitive and
normalized to lower case.
"""

from __future__ import annotations

from dataclasses import dataclass, field

SUPPORTED_REQUIREMENTS = {":strips", ":typing"}

# Requirements we recognize but deliberately refuse.
REJECTED_REQUIREMENTS = {
    ":adl",
    ":equality",
    ":fluents",
    ":functions",
    ":numeric-fluents",
    ":conditional-effects",
    ":negative-preconditions",
    ":disjunctive-preconditions",
    ":existential-preconditions",
    ":universal-preconditions",
    ":quantified-preconditions",
    ":durative-actions",
    ":derived-predicates",
    ":action-costs",
    ":preferences",
    ":constraints",
}


class PddlError(Exception):
    """Base of all frontend errors; formats as ``file:line:col: message``."""

    def __init__(self, message: str, filename: str = "<pddl>", line: int = 0, col: int = 0):
        self.message = message
        self.filename = filename
        self.line = line
        self.col = col
        super().__init__(f"{filename}:{line}:{col}: {message}")


class PddlSyntaxError(PddlError):
    pass


class UnsupportedFeature(PddlError):
    def __init__(self, feature: str, filename: str = "<pddl>", line: int = 0, col: int = 0):
        self.feature = feature
        super().__init__(f"unsupported feature: {feature}", filename, line, col)


class UnknownPredicate(PddlError):
    pass


class UnknownObject(PddlError):
    pass


class UnknownType(PddlError):
    pass


class Symbol(str):
    """A token that remembers where it came from."""

    line: int
    col: int

    def __new__(cls, value: str, line: int, col: int):
        sym = super().__new__(cls, value)
        sym.line = line
        sym.col = col
        return sym


def tokenize(text: str, filename: str = "<pddl>"):
    """Yield Symbol tokens including '(' and ')'; ';' comments run to EOL."""
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            col += 1
            i += 1
            continue
        if ch in "()":
            yield Symbol(ch, line, col)
            col += 1
            i += 1
            continue
        start, start_col = i, col
        while i < n and text[i] not in " \t\r\n();":
            i += 1
            col += 1
        yield Symbol(text[start:i].lower(), line, start_col)


def parse_sexprs(text: str, filename: str = "<pddl>"):
    """Parse the whole stream into nested lists of Symbols."""
    stack: list[list] = [[]]
    opens: list[Symbol] = []
    for tok in tokenize(text, filename):
        if tok == "(":
            lst: list = []
            stack[-1].append(lst)
            stack.append(lst)
            opens.append(tok)
        elif tok == ")":
            if len(stack) == 1:
                raise PddlSyntaxError("unbalanced ')'", filename, tok.line, tok.col)
            stack.pop()
            opens.pop()
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        tok = opens[-1]
        raise PddlSyntaxError("unclosed '('", filename, tok.line, tok.col)
    return stack[0]


def _pos(node) -> tuple[int, int]:
    while isinstance(node, list):
        if not node:
            return (0, 0)
        node = node[0]
    return (node.line, node.col)


def _expect_symbol(node, what: str, filename: str) -> Symbol:
    if not isinstance(node, Symbol):
        line, col = _pos(node)
        raise PddlSyntaxError(f"expected {what}", filename, line, col)
    return node


@dataclass(frozen=True)
class Literal:
    """A predicate applied to variables and/or object names."""

    predicate: str
    args: tuple[str, ...]
    line: int = 0
    col: int = 0


@dataclass
class ActionSchema:
    name: str
    params: list[tuple[str, str]]  # (variable, type)
    preconditions: list[Literal]
    add_effects: list[Literal]
    del_effects: list[Literal]


@dataclass
class DomainDesc:
    name: str
    filename: str
    requirements: list[str]
    types: dict[str, str]  # type -> parent (roots map to "object")
    predicates: dict[str, int]  # name -> arity
    constants: list[tuple[str, str]]  # (name, type)
    schemas: list[ActionSchema] = field(default_factory=list)

    def is_subtype(self, child: str, parent: str) -> bool:
        if parent == "object":
            return True
        t = child
        seen = set()
        while t not in seen:
            if t == parent:
                return True
            seen.add(t)
            t = self.types.get(t, "object")
        return False


@dataclass
class ProblemDesc:
    name: str
    domain_name: str
    filename: str
    objects: list[tuple[str, str]]  # (name, type), domain constants included
    init: list[Literal]
    goal: list[Literal]


def _parse_typed_list(items: list, filename: str, kind: str) -> list[tuple[str, str]]:
    """Parse PDDL's ``a b - t c d`` syntax; untyped names get type object."""
    out: list[tuple[str, str]] = []
    pending: list[Symbol] = []
    it = iter(items)
    for node in it:
        sym = _expect_symbol(node, f"{kind} name", filename)
        if sym == "-":
            try:
                tnode = next(it)
            except StopIteration:
                raise PddlSyntaxError("dangling '-' in typed list", filename, sym.line, sym.col)
            if isinstance(tnode, list):
                # (either ...) types are ADL territory.
                line, col = _pos(tnode)
                raise UnsupportedFeature("either-types", filename, line, col)
            tname = str(tnode)
            out.extend((str(p), tname) for p in pending)
            pending = []
        else:
            pending.append(sym)
    out.extend((str(p), "object") for p in pending)
    return out


def _parse_literal(node, filename: str, allow_var: bool) -> Literal:
    if not isinstance(node, list) or not node:
        line, col = _pos(node)
        raise PddlSyntaxError("expected an atom", filename, line, col)
    head = _expect_symbol(node[0], "predicate name", filename)
    if head == "=":
        raise UnsupportedFeature("equality constraint", filename, head.line, head.col)
    if head in ("not", "and", "or", "forall", "exists", "when", "imply"):
        raise PddlSyntaxError(f"unexpected '{head}' inside atom", filename, head.line, head.col)
    args = []
    for a in node[1:]:
        sym = _expect_symbol(a, "argument", filename)
        if sym.startswith("?") and not allow_var:
            raise PddlSyntaxError("variable not allowed here", filename, sym.line, sym.col)
        args.append(str(sym))
    return Literal(str(head), tuple(args), head.line, head.col)


def _conjunction(node, filename: str) -> list:
    """Flatten ``(and ...)`` or a single form into a list of forms."""
    if isinstance(node, list) and node and isinstance(node[0], Symbol) and node[0] == "and":
        return node[1:]
    return [node]


def _check_arity(lit: Literal, domain: DomainDesc, filename: str):
    if lit.predicate not in domain.predicates:
        raise UnknownPredicate(f"unknown predicate '{lit.predicate}'", filename, lit.line, lit.col)
    arity = domain.predicates[lit.predicate]
    if len(lit.args) != arity:
        raise PddlSyntaxError(
            f"predicate '{lit.predicate}' expects {arity} arguments, got {len(lit.args)}",
            filename,
            lit.line,
            lit.col,
        )


def parse_domain(text: str, filename: str = "<domain>") -> DomainDesc:
    """Parse a PDDL domain restricted to the typed-STRIPS fragment."""
    forms = parse_sexprs(text, filename)
    if not forms:
        raise PddlSyntaxError("empty input", filename, 1, 1)
    top = forms[0]
    if not isinstance(top, list) or len(top) < 2 or top[0] != "define":
        line, col = _pos(top)
        raise PddlSyntaxError("expected (define (domain ...) ...)", filename, line, col)
    head = top[1]
    if not isinstance(head, list) or len(head) != 2 or head[0] != "domain":
        line, col = _pos(head)
        raise PddlSyntaxError("expected (domain <name>)", filename, line, col)

    domain = DomainDesc(
        name=str(head[1]),
        filename=filename,
        requirements=[],
        types={},
        predicates={},
        constants=[],
    )

    for section in top[2:]:
        if not isinstance(section, list) or not section:
            line, col = _pos(section)
            raise PddlSyntaxError("expected a (:section ...)", filename, line, col)
        tag = _expect_symbol(section[0], "section tag", filename)
        if tag == ":requirements":
            for req in section[1:]:
                r = str(_expect_symbol(req, "requirement", filename))
                if r in SUPPORTED_REQUIREMENTS:
                    domain.requirements.append(r)
                elif r in REJECTED_REQUIREMENTS:
                    raise UnsupportedFeature(r, filename, req.line, req.col)
                else:
                    raise UnsupportedFeature(r, filename, req.line, req.col)
        elif tag == ":types":
            for name, parent in _parse_typed_list(section[1:], filename, "type"):
                domain.types[name] = parent
        elif tag == ":constants":
            domain.constants.extend(_parse_typed_list(section[1:], filename, "constant"))
        elif tag == ":predicates":
            for pred in section[1:]:
                if not isinstance(pred, list) or not pred:
                    line, col = _pos(pred)
                    raise PddlSyntaxError("expected (predicate ...)", filename, line, col)
                pname = _expect_symbol(pred[0], "predicate name", filename)
                params = _parse_typed_list(pred[1:], filename, "parameter")
                domain.predicates[str(pname)] = len(params)
        elif tag == ":action":
            domain.schemas.append(_parse_action(section, domain, filename))
        elif tag == ":functions":
            raise UnsupportedFeature(":functions", filename, tag.line, tag.col)
        else:
            raise UnsupportedFeature(str(tag), filename, tag.line, tag.col)

    if not domain.schemas:
        raise PddlSyntaxError("domain declares no actions", filename, 1, 1)
    return domain


def _parse_action(section: list, domain: DomainDesc, filename: str) -> ActionSchema:
    if len(section) < 2:
        line, col = _pos(section)
        raise PddlSyntaxError(":action needs a name", filename, line, col)
    name = str(_expect_symbol(section[1], "action name", filename))
    params: list[tuple[str, str]] = []
    pre: list[Literal] = []
    add: list[Literal] = []
    dele: list[Literal] = []

    i = 2
    while i < len(section):
        key = _expect_symbol(section[i], "action keyword", filename)
        if i + 1 >= len(section):
            raise PddlSyntaxError(f"missing value after {key}", filename, key.line, key.col)
        value = section[i + 1]
        if key == ":parameters":
            if not isinstance(value, list):
                raise PddlSyntaxError(":parameters needs a list", filename, key.line, key.col)
            params = _parse_typed_list(value, filename, "parameter")
        elif key == ":precondition":
            for form in _conjunction(value, filename):
                if isinstance(form, list) and form and isinstance(form[0], Symbol):
                    h = form[0]
                    if h == "not":
                        raise UnsupportedFeature("negative precondition", filename, h.line, h.col)
                    if h in ("or", "imply", "forall", "exists", "when"):
                        raise UnsupportedFeature(f"{h} precondition", filename, h.line, h.col)
                pre.append(_parse_literal(form, filename, allow_var=True))
        elif key == ":effect":
            for form in _conjunction(value, filename):
                if isinstance(form, list) and form and isinstance(form[0], Symbol) and form[0] == "not":
                    if len(form) != 2:
                        raise PddlSyntaxError("(not ...) takes one atom", filename, form[0].line, form[0].col)
                    dele.append(_parse_literal(form[1], filename, allow_var=True))
                elif isinstance(form, list) and form and isinstance(form[0], Symbol) and form[0] in ("when", "forall"):
                    raise UnsupportedFeature("conditional effect", filename, form[0].line, form[0].col)
                else:
                    add.append(_parse_literal(form, filename, allow_var=True))
        else:
            raise UnsupportedFeature(str(key), filename, key.line, key.col)
        i += 2

    seen = set()
    for var, _ in params:
        if not var.startswith("?"):
            raise PddlSyntaxError(f"parameter '{var}' must start with '?'", filename, *_pos(section))
        if var in seen:
            raise PddlSyntaxError(f"duplicate parameter '{var}'", filename, *_pos(section))
        seen.add(var)
    param_names = {v for v, _ in params}
    for lit in pre + add + dele:
        _check_arity(lit, domain, filename)
        for arg in lit.args:
            if arg.startswith("?") and arg not in param_names:
                raise PddlSyntaxError(
                    f"free variable '{arg}' in action '{name}'", filename, lit.line, lit.col
                )
    return ActionSchema(name, params, pre, add, dele)


def parse_problem(text: str, domain: DomainDesc, filename: str = "<problem>") -> ProblemDesc:
    """Parse a PDDL problem against an already-parsed domain."""
    forms = parse_sexprs(text, filename)
    if not forms:
        raise PddlSyntaxError("empty input", filename, 1, 1)
    top = forms[0]
    if not isinstance(top, list) or len(top) < 2 or top[0] != "define":
        line, col = _pos(top)
        raise PddlSyntaxError("expected (define (problem ...) ...)", filename, line, col)
    head = top[1]
    if not isinstance(head, list) or len(head) != 2 or head[0] != "problem":
        line, col = _pos(head)
        raise PddlSyntaxError("expected (problem <name>)", filename, line, col)

    name = str(head[1])
    domain_name = ""
    objects: list[tuple[str, str]] = list(domain.constants)
    init: list[Literal] = []
    goal: list[Literal] = []

    for section in top[2:]:
        if not isinstance(section, list) or not section:
            line, col = _pos(section)
            raise PddlSyntaxError("expected a (:section ...)", filename, line, col)
        tag = _expect_symbol(section[0], "section tag", filename)
        if tag == ":domain":
            domain_name = str(_expect_symbol(section[1], "domain name", filename))
        elif tag == ":requirements":
            for req in section[1:]:
                r = str(req)
                if r not in SUPPORTED_REQUIREMENTS:
                    raise UnsupportedFeature(r, filename, req.line, req.col)
        elif tag == ":objects":
            objects.extend(_parse_typed_list(section[1:], filename, "object"))
        elif tag == ":init":
            for form in section[1:]:
                if isinstance(form, list) and form and isinstance(form[0], Symbol):
                    if form[0] == "not":
                        raise UnsupportedFeature("negated init literal", filename, form[0].line, form[0].col)
                    if form[0] == "=":
                        raise UnsupportedFeature(":functions", filename, form[0].line, form[0].col)
                init.append(_parse_literal(form, filename, allow_var=False))
        elif tag == ":goal":
            for form in _conjunction(section[1], filename):
                if isinstance(form, list) and form and isinstance(form[0], Symbol):
                    h = form[0]
                    if h == "not":
                        raise UnsupportedFeature("negated goal", filename, h.line, h.col)
                    if h in ("or", "forall", "exists", "imply"):
                        raise UnsupportedFeature(f"{h} goal", filename, h.line, h.col)
                goal.append(_parse_literal(form, filename, allow_var=False))
        else:
            raise UnsupportedFeature(str(tag), filename, tag.line, tag.col)

    if domain_name and domain_name != domain.name:
        raise PddlSyntaxError(
            f"problem targets domain '{domain_name}', parsed domain is '{domain.name}'",
            filename,
            1,
            1,
        )

    known = {n for n, _ in objects}
    typenames = set(domain.types) | {"object"}
    for oname, otype in objects:
        if otype not in typenames:
            raise UnknownType(f"unknown type '{otype}'", filename, 1, 1)
    for lit in init + goal:
        _check_arity(lit, domain, filename)
        for arg in lit.args:
            if arg not in known:
                raise UnknownObject(f"unknown object '{arg}'", filename, lit.line, lit.col)
    if not goal:
        raise PddlSyntaxError("problem has an empty goal", filename, 1, 1)
    return ProblemDesc(name, domain.name, filename, objects, init, goal)


def parse_domain_file(path) -> DomainDesc:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_domain(fh.read(), filename=str(path))


def parse_problem_file(path, domain: DomainDesc) -> ProblemDesc:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_problem(fh.read(), domain, filename=str(path))
