"""Static checks: formula classes, variable safety and evaluation levels."""

from __future__ import annotations

import dataclasses
import graphlib
from collections import Counter
from dataclasses import dataclass, field

from .ast import (
    KIND_CLASS,
    Atom,
    BinOp,
    Comparison,
    Definition,
    FormulaClass,
    Not,
    Program,
    Relation,
    StartEnd,
    Var,
    children,
    term_vars,
    walk,
)
from .errors import (
    ClassMismatch,
    CompileWarning,
    CyclicDefinition,
    DuplicateDefinition,
    UnguardedNegation,
    UnknownPredicate,
    UnsafeHeadVariable,
    VariableMismatch,
)
from .parser import parse_program

I, S, D = FormulaClass.INSTANT, FormulaClass.STATE, FormulaClass.DYNAMIC
DURATIVE = frozenset({S, D})
ANY = frozenset({I, S, D})

# relation -> (allowed left classes, allowed right classes)
RELATION_OPERANDS = {
    "meets": (DURATIVE, DURATIVE),
    "overlaps": (DURATIVE, DURATIVE),
    "equals": (DURATIVE, DURATIVE),
    "finishes": (ANY, DURATIVE),
    "starts": (ANY, DURATIVE),
    "contains": (DURATIVE, ANY),
    "before": (ANY, ANY),
}

_CLASS_WORD = {I: "event", S: "state", D: "dynamic"}


@dataclass(frozen=True)
class PredicateRef:
    name: str
    arity: int
    kind: str  # event | state | dynamic | input_event | input_state | input_dynamic

    @property
    def is_input(self) -> bool:
        return self.kind.startswith("input_")

    @property
    def base_kind(self) -> str:
        return self.kind.removeprefix("input_")

    @property
    def formula_class(self) -> FormulaClass:
        return KIND_CLASS[self.base_kind]


def _where(node):
    return node.pos if node.pos else (None, None)


def predicate_table(program: Program) -> dict[str, PredicateRef]:
    table: dict[str, PredicateRef] = {}
    for d in program.declarations:
        if d.name in table:
            raise DuplicateDefinition(f"{d.name} declared twice", *_where(d))
        table[d.name] = PredicateRef(d.name, d.arity, "input_" + d.kind)
    for d in program.definitions:
        name = d.head.name
        if name in table:
            what = "declared as input" if table[name].is_input else "defined twice"
            raise DuplicateDefinition(f"{name} is already {what}", *_where(d.head))
        table[name] = PredicateRef(name, d.head.arity, d.kind)
    return table


# -- formula classes --------------------------------------------------------


def _need(node, got, allowed, what):
    if got not in allowed:
        kinds = " or ".join(sorted(_CLASS_WORD[c] for c in allowed))
        raise ClassMismatch(f"{what} expects {kinds} formulae, got {_CLASS_WORD[got]}", *_where(node))


def label(node, table):
    """Return a copy of *node* with ``cls`` set on every subformula."""
    if isinstance(node, Atom):
        ref = table.get(node.name)
        if ref is None:
            raise UnknownPredicate(f"{node.name}/{node.arity} is neither declared nor defined", *_where(node))
        return dataclasses.replace(node, cls=ref.formula_class)
    if isinstance(node, Comparison):
        return dataclasses.replace(node, cls=I)
    if isinstance(node, Not):
        child = label(node.child, table)
        _need(node, child.cls, {I}, "negation")
        return dataclasses.replace(node, child=child, cls=I)
    if isinstance(node, StartEnd):
        child = label(node.child, table)
        _need(node, child.cls, {S}, node.op)
        return dataclasses.replace(node, child=child, cls=I)
    left, right = label(node.left, table), label(node.right, table)
    if isinstance(node, Relation):
        lok, rok = RELATION_OPERANDS[node.relation]
        _need(node, left.cls, lok, f"left operand of {node.relation}")
        _need(node, right.cls, rok, f"right operand of {node.relation}")
        return dataclasses.replace(node, left=left, right=right, cls=D)
    if node.op in ("and", "or"):
        for side in (left, right):
            _need(node, side.cls, {I}, "'and'" if node.op == "and" else "'or'")
        cls = I
    elif node.op == "range":
        for side in (left, right):
            _need(node, side.cls, {I}, "maximal range")
        cls = S
    else:
        for side in (left, right):
            _need(node, side.cls, {S}, node.op)
        cls = S
    return dataclasses.replace(node, left=left, right=right, cls=cls)


# -- variables --------------------------------------------------------------


def _occurrences(node) -> Counter:
    c = Counter()
    for n in walk(node):
        if isinstance(n, Atom):
            c.update(term_vars(n.args))
        elif isinstance(n, Comparison):
            c.update(term_vars((n.left, n.right)))
    return c


def conjuncts(node) -> list:
    """Flatten a chain of ``and`` nodes."""
    if isinstance(node, BinOp) and node.op == "and":
        return conjuncts(node.left) + conjuncts(node.right)
    return [node]


def is_filter(node) -> bool:
    return isinstance(node, (Not, Comparison))


@dataclass
class Scope:
    """Per-node variable information for one definition, keyed by ``id(node)``.

    ``kept`` holds the variables of a subformula that also occur outside it
    (or in the head); all others are local and projected away once the
    subformula is evaluated.  ``bound`` holds the variables a subformula
    binds positively.
    """

    kept: dict = field(default_factory=dict)
    bound: dict = field(default_factory=dict)

    def kept_of(self, node) -> tuple:
        return self.kept[id(node)]


def _filter_needs(node, scope) -> set:
    """Variables a filter (negation or comparison) needs bound from outside."""
    if isinstance(node, Comparison):
        return set(term_vars((node.left, node.right)))
    if is_filter(node.child):
        return _filter_needs(node.child, scope)
    return set(scope.kept_of(node))


def analyse(defn: Definition) -> Scope:
    total = _occurrences(defn.body)
    total.update(term_vars(defn.head.args))
    scope = Scope()

    def visit(node, in_conjunction=False):
        occ = _occurrences(node)
        kept = tuple(sorted(v for v in occ if occ[v] < total[v]))
        scope.kept[id(node)] = kept

        if is_filter(node) and not in_conjunction:
            what = "negation" if isinstance(node, Not) else "comparison"
            raise UnguardedNegation(f"{what} must be a conjunct next to a positive formula", *_where(node))

        if isinstance(node, BinOp) and node.op == "and":
            parts = conjuncts(node)
            for p in parts:
                visit(p, in_conjunction=True)
            positives = [p for p in parts if not is_filter(p)]
            if not positives:
                raise UnguardedNegation("conjunction has no positive conjunct", *_where(node))
            bound = set().union(*(scope.bound[id(p)] for p in positives))
            for p in parts:
                if not is_filter(p):
                    continue
                loose = sorted(_filter_needs(p, scope) - bound)
                if loose:
                    what = "negation" if isinstance(p, Not) else "comparison"
                    raise UnguardedNegation(
                        f"{what} uses {', '.join(loose)} which no positive conjunct binds", *_where(p)
                    )
            scope.bound[id(node)] = frozenset(bound)
            return

        if isinstance(node, Not):
            visit(node.child, in_conjunction=is_filter(node.child))
            scope.bound[id(node)] = frozenset()
            return
        for c in children(node):
            visit(c)
        if isinstance(node, Atom):
            bound = set(term_vars(node.args))
        elif isinstance(node, Comparison):
            bound = set()
        elif isinstance(node, StartEnd):
            bound = set(scope.bound[id(node.child)])
        else:
            lb, rb = scope.bound[id(node.left)], scope.bound[id(node.right)]
            lk, rk = set(scope.kept_of(node.left)), set(scope.kept_of(node.right))
            op = node.relation if isinstance(node, Relation) else node.op
            if op in ("or", "union") and lk != rk:
                raise VariableMismatch(
                    f"both operands of '{op}' must share the same variables "
                    f"({', '.join(sorted(lk)) or 'none'} vs {', '.join(sorted(rk)) or 'none'})",
                    *_where(node),
                )
            if op in ("range", "complement") and not rk <= lk:
                extra = ", ".join(sorted(rk - lk))
                raise VariableMismatch(
                    f"right operand of '{op}' uses {extra} which the left operand does not bind",
                    *_where(node),
                )
            bound = set(lb) if op in ("or", "union", "range", "complement") else set(lb) | set(rb)
        scope.bound[id(node)] = frozenset(bound)

    visit(defn.body)
    loose = [t for t in defn.head.args if isinstance(t, Var) and t.name not in scope.bound[id(defn.body)]]
    if loose:
        raise UnsafeHeadVariable(
            f"head variable {loose[0].name} is not bound by a positive body formula", *_where(loose[0])
        )
    return scope


# -- whole programs ---------------------------------------------------------


def typecheck(program: Program) -> Program:
    """Label every formula with its class and enforce the static rules."""
    table = predicate_table(program)
    typed = []
    for d in program.definitions:
        body = label(d.body, table)
        want = KIND_CLASS[d.kind]
        if body.cls is not want:
            raise ClassMismatch(
                f"{d.kind} {d.head.name} needs a {_CLASS_WORD[want]} formula as body, "
                f"got a {_CLASS_WORD[body.cls]} formula",
                *_where(d.body),
            )
        head = dataclasses.replace(d.head, cls=want)
        seen = set()
        for t in head.args:
            if t.name in seen:
                raise UnsafeHeadVariable(f"head variable {t.name} repeated", *_where(t))
            seen.add(t.name)
        typed_def = dataclasses.replace(d, head=head, body=body)
        analyse(typed_def)
        typed.append(typed_def)
    return dataclasses.replace(program, definitions=tuple(typed))


@dataclass(frozen=True)
class DependencyGraph:
    nodes: dict  # name -> PredicateRef
    edges: frozenset  # (A, B): A depends on B
    levels: dict  # name -> level

    def strata(self) -> list[list[str]]:
        """Defined phenomena grouped by level, starting at level 1."""
        top = max(self.levels.values(), default=0)
        return [sorted(n for n, l in self.levels.items() if l == k) for k in range(1, top + 1)]


def build_levels(program: Program) -> DependencyGraph:
    table = predicate_table(program)
    deps = {name: set() for name in table}
    for d in program.definitions:
        deps[d.head.name] = {n.name for n in walk(d.body) if isinstance(n, Atom)}
    sorter = graphlib.TopologicalSorter({k: sorted(v) for k, v in deps.items()})
    try:
        order = list(sorter.static_order())
    except graphlib.CycleError as exc:
        cycle = list(reversed(exc.args[1]))
        raise CyclicDefinition(cycle) from None
    levels = {}
    for name in order:
        ds = deps[name]
        levels[name] = 0 if table[name].is_input else 1 + max((levels[x] for x in ds if x in levels), default=0)
    edges = frozenset((a, b) for a, bs in deps.items() for b in bs)
    return DependencyGraph(dict(table), edges, levels)


@dataclass(frozen=True)
class CompiledProgram:
    program: Program
    predicates: dict
    graph: DependencyGraph
    warnings: tuple = ()

    def definition(self, name: str) -> Definition:
        return self.program.definition(name)


def lint(program: Program) -> list[CompileWarning]:
    out = []
    used = {n.name for d in program.definitions for n in walk(d.body) if isinstance(n, Atom)}
    for d in program.declarations:
        if d.name not in used:
            out.append(CompileWarning("unused-input", f"input {d.name}/{d.arity} is never used", *_where(d)))
    for d in program.definitions:
        occ = _occurrences(d.body)
        occ.update(term_vars(d.head.args))
        first = {}
        for n in [d.head, *walk(d.body)]:
            args = n.args if isinstance(n, Atom) else (n.left, n.right) if isinstance(n, Comparison) else ()
            for t in args:
                if isinstance(t, Var):
                    first.setdefault(t.name, t)
        for name, count in occ.items():
            if count == 1 and not name.startswith("_"):
                out.append(
                    CompileWarning("singleton-variable", f"{name} occurs only once in {d.head.name}", *_where(first[name]))
                )
    return out


def compile_program(text: str) -> CompiledProgram:
    """Parse, type check and order a definitions file."""
    program = typecheck(parse_program(text))
    graph = build_levels(program)
    return CompiledProgram(program, predicate_table(program), graph, tuple(lint(program)))
