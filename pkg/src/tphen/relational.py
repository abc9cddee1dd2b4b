"""Relational evaluation of phenomenon definitions.

A definition body is compiled into a tree of :class:`Node` objects.  Each node
produces *entities*: a binding of the node's variables together with an
instant ``(t, t)`` or an interval ``(ts, te)``.  Every entity remembers which
child entities (or, at the leaves, which working-memory items) it was built
from, so that after a query the engine can work out which stored items are
still needed.

Variables are grounded by natural joins on shared variables.  Variables that
do not occur outside a subformula are projected away as soon as the
subformula is evaluated: instants and dynamic intervals are unioned, state
intervals are coalesced so they stay disjoint and maximal.
"""

from __future__ import annotations

from bisect import bisect_right
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple

from .lang import ast
from .lang.ast import FormulaClass
from .lang.typecheck import CompiledProgram, analyse, conjuncts, is_filter
from .temporal import kernels
from .temporal.ops import (
    INF,
    feasible_partners,
    relation_incompletes,
    relation_pairs,
)
from .temporal.types import IncompleteInterval, InstantSet, IntervalSet


class MissingDependency(LookupError):
    pass


class Item(NamedTuple):
    """A time-stamped ground fact stored in working memory."""

    pred: str
    args: tuple
    span: tuple  # (t, t) for instants

    @property
    def end(self):
        return self.span[1]


class Entity(NamedTuple):
    key: tuple  # values for the node's columns
    span: tuple


@dataclass(frozen=True)
class Pending:
    """An undecided candidate: known start, end constrained to ``[min_end, inf)``.

    ``binding`` holds the variables known so far as sorted ``(name, value)``
    pairs.  ``members`` reference what the candidate depends on:
    ``("e", slot, Entity)`` for a child entity, ``("p", slot, Pending)`` for an
    undecided child candidate and ``("x", pred, args)`` for a candidate of
    another definition.
    """

    binding: tuple
    interval: IncompleteInterval
    members: frozenset = field(default=frozenset(), compare=False)

    @property
    def start(self):
        return self.interval.start

    @property
    def min_end(self):
        return self.interval.min_end


def _end(span):
    return span[1]


# -- plan -------------------------------------------------------------------


@dataclass
class Node:
    nid: str
    op: str
    cls: FormulaClass
    cols: tuple
    children: list = field(default_factory=list)
    atom: ast.Atom | None = None
    relation: str | None = None
    # and-chains: (keep_when_true, Comparison | Node)
    filters: list = field(default_factory=list)

    @property
    def instant(self) -> bool:
        return self.cls is FormulaClass.INSTANT

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()
        for _, f in self.filters:
            if isinstance(f, Node):
                yield from f.walk()


def build_plan(defn: ast.Definition) -> Node:
    scope = analyse(defn)
    counter = iter(range(1 << 30))
    prefix = defn.head.name

    def mk(node, **kw):
        return Node(f"{prefix}#{next(counter)}", cls=node.cls, cols=scope.kept_of(node), **kw)

    def build(node) -> Node:
        if isinstance(node, ast.Atom):
            return mk(node, op="atom", atom=node)
        if isinstance(node, ast.BinOp) and node.op == "and":
            out = mk(node, op="and")
            for part in conjuncts(node):
                if not is_filter(part):
                    out.children.append(build(part))
                    continue
                keep = True
                while isinstance(part, ast.Not):
                    keep = not keep
                    part = part.child
                out.filters.append((keep, part if isinstance(part, ast.Comparison) else build(part)))
            return out
        if isinstance(node, ast.StartEnd):
            return mk(node, op=node.op, children=[build(node.child)])
        if isinstance(node, ast.Relation):
            return mk(node, op="rel", relation=node.relation, children=[build(node.left), build(node.right)])
        if isinstance(node, ast.BinOp):
            return mk(node, op=node.op, children=[build(node.left), build(node.right)])
        raise TypeError(f"cannot plan {type(node).__name__}")

    return build(defn.body)


# -- helpers ----------------------------------------------------------------


def _indexer(src: tuple, dst: Iterable[str]):
    pos = [src.index(c) for c in dst]
    return lambda key: tuple(key[p] for p in pos)


def _merge_binding(cols_a, key_a, cols_b, key_b, out_cols):
    b = dict(zip(cols_a, key_a))
    b.update(zip(cols_b, key_b))
    return tuple(b[c] for c in out_cols)


def _group(values: dict) -> dict:
    g = defaultdict(list)
    for e in values:
        g[e.key].append(e)
    return g


def _coalesce_with_prov(pairs):
    """Coalesce ``(span, prov)`` pairs; provenance of merged spans is united."""
    spans = sorted(s for s, _ in pairs)
    merged = kernels.coalesce(spans)
    starts = [m[0] for m in merged]
    provs = [set() for _ in merged]
    for span, prov in pairs:
        provs[bisect_right(starts, span[0]) - 1].update(prov)
    return [(tuple(m), frozenset(p)) for m, p in zip(merged, provs)]


def _project(node: Node, src_cols: tuple, rows: Iterable):
    """Project ``(key over src_cols, span, prov)`` rows onto ``node.cols``."""
    proj = _indexer(src_cols, node.cols)
    if node.cls is FormulaClass.STATE:
        by_key = defaultdict(list)
        for key, span, prov in rows:
            by_key[proj(key)].append((span, prov))
        out = {}
        for key, pairs in by_key.items():
            for span, prov in _coalesce_with_prov(pairs):
                out[Entity(key, span)] = prov
        return out
    out = defaultdict(set)
    for key, span, prov in rows:
        out[Entity(proj(key), span)].update(prov)
    return {e: frozenset(p) for e, p in out.items()}


def _compare(op, a, b) -> bool:
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    numeric = all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (a, b))
    if not numeric and not (isinstance(a, str) and isinstance(b, str)):
        return False
    return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]


def _term_value(t, binding):
    return binding[t.name] if isinstance(t, ast.Var) else t.value


# -- evaluation -------------------------------------------------------------


@dataclass
class Context:
    """What a definition sees during one query.

    ``view(pred, nid)`` yields the working-memory items visible to leaf
    *nid*; ``pendings(pred)`` yields undecided candidates of other dynamic
    definitions as ``(positional binding, IncompleteInterval)`` pairs.
    """

    view: Callable[[str, str], Iterable[Item]]
    t_q: int | None = None
    lower: float = -1
    needed: dict = field(default_factory=dict)  # nid -> entities kept from the last query
    pendings: Callable[[str], Iterable] = lambda pred: ()


@dataclass
class NodeResult:
    values: dict  # Entity -> frozenset of provenance refs
    pending: list = field(default_factory=list)


class DefinitionEvaluator:
    """Evaluates one definition; keeps no state between calls."""

    def __init__(self, defn: ast.Definition):
        self.defn = defn
        self.root = build_plan(defn)
        self.nodes = {n.nid: n for n in self.root.walk()}
        self.head_vars = tuple(t.name for t in defn.head.args)
        self._to_args = _indexer(self.root.cols, self.head_vars)

    @property
    def name(self) -> str:
        return self.defn.head.name

    def leaves(self):
        return [n for n in self.nodes.values() if n.op == "atom"]

    def evaluate(self, ctx: Context) -> dict:
        """Evaluate every node; returns ``nid -> NodeResult``."""
        results: dict = {}
        self._eval(self.root, ctx, results)
        return results

    def items_of(self, results) -> dict:
        """Root entities as ``Item -> Entity``."""
        return {Item(self.name, self._to_args(e.key), e.span): e for e in results[self.root.nid].values}

    def pending_args(self, p: Pending) -> tuple:
        b = dict(p.binding)
        return tuple((i, b[v]) for i, v in enumerate(self.head_vars) if v in b)

    # -- per operator -------------------------------------------------------

    def _eval(self, node: Node, ctx: Context, results: dict) -> NodeResult:
        kids = [self._eval(c, ctx, results) for c in node.children]
        method = getattr(self, "_op_" + node.op.replace("-", "_"))
        values, pending = method(node, kids, ctx, results)
        keep = ctx.needed.get(node.nid, ())
        values = {e: p for e, p in values.items() if _end(e.span) > ctx.lower or e in keep}
        res = NodeResult(values, pending)
        results[node.nid] = res
        return res

    def _op_atom(self, node, kids, ctx, results):
        atom = node.atom
        var_pos = [(i, t.name) for i, t in enumerate(atom.args) if isinstance(t, ast.Var)]
        const_pos = [(i, t.value) for i, t in enumerate(atom.args) if isinstance(t, ast.Const)]
        names = tuple(sorted({v for _, v in var_pos}))
        rows = []
        for item in ctx.view(atom.name, node.nid):
            if len(item.args) != len(atom.args):
                continue
            if any(item.args[i] != v for i, v in const_pos):
                continue
            b = {}
            ok = True
            for i, v in var_pos:
                if b.setdefault(v, item.args[i]) != item.args[i]:
                    ok = False
                    break
            if ok:
                rows.append((tuple(b[n] for n in names), item.span, (("item", item),)))
        values = _project(node, names, rows)
        pending = []
        if node.cls is FormulaClass.DYNAMIC and ctx.t_q is not None:
            for positional, inc in ctx.pendings(atom.name):
                pos = dict(positional)
                b = {}
                ok = True
                for i, t in enumerate(atom.args):
                    if i not in pos:
                        continue
                    if isinstance(t, ast.Const):
                        ok = ok and t.value == pos[i]
                    elif b.setdefault(t.name, pos[i]) != pos[i]:
                        ok = False
                if ok:
                    binding = tuple(sorted((k, v) for k, v in b.items() if k in node.cols))
                    pending.append(Pending(binding, inc, frozenset({("x", atom.name, positional)})))
        return values, pending

    def _op_and(self, node, kids, ctx, results):
        cols: tuple = ()
        rows: dict = {(): None}  # key -> {t: prov}; None means "any instant"
        for slot, (child, res) in enumerate(zip(node.children, kids)):
            payload = defaultdict(dict)
            for e, _ in res.values.items():
                payload[e.key][e.span[0]] = frozenset({(slot, e)})
            new_cols = tuple(sorted(set(cols) | set(child.cols)))
            shared = [c for c in child.cols if c in cols]
            idx = defaultdict(list)
            pick = _indexer(child.cols, shared)
            for k in payload:
                idx[pick(k)].append(k)
            pick_left = _indexer(cols, shared)
            joined = {}
            for lk, linst in rows.items():
                for rk in idx.get(pick_left(lk), ()):
                    rinst = payload[rk]
                    if linst is None:
                        inst = dict(rinst)
                    else:
                        inst = {t: linst[t] | rinst[t] for t in linst.keys() & rinst.keys()}
                    if inst:
                        joined[_merge_binding(cols, lk, child.cols, rk, new_cols)] = inst
            cols, rows = new_cols, joined

        for keep, f in node.filters:
            if isinstance(f, ast.Comparison):
                rows = {
                    k: inst
                    for k, inst in rows.items()
                    if _compare(f.op, _term_value(f.left, dict(zip(cols, k))), _term_value(f.right, dict(zip(cols, k))))
                    == keep
                }
                continue
            sub = results[f.nid].values if f.nid in results else self._eval(f, ctx, results).values
            by_key = defaultdict(set)
            for e in sub:
                by_key[e.key].add(e.span[0])
            pick = _indexer(cols, f.cols)
            filtered = {}
            for k, inst in rows.items():
                hits = by_key.get(pick(k), set())
                kept = {t: p for t, p in inst.items() if (t in hits) == keep}
                if kept:
                    filtered[k] = kept
            rows = filtered

        out_rows = ((k, (t, t), p) for k, inst in rows.items() for t, p in inst.items())
        return _project(node, cols, out_rows), []

    def _op_or(self, node, kids, ctx, results):
        rows = []
        for slot, (child, res) in enumerate(zip(node.children, kids)):
            pick = _indexer(child.cols, node.cols)
            rows.extend((pick(e.key), e.span, {(slot, e)}) for e in res.values)
        return _project(node, node.cols, rows), []

    def _op_start(self, node, kids, ctx, results):
        child = node.children[0]
        rows = [(e.key, (e.span[0], e.span[0]), {(0, e)}) for e in kids[0].values]
        return _project(node, child.cols, rows), []

    def _op_end(self, node, kids, ctx, results):
        child = node.children[0]
        rows = [(e.key, (e.span[1], e.span[1]), {(0, e)}) for e in kids[0].values if e.span[1] != INF]
        return _project(node, child.cols, rows), []

    def _op_range(self, node, kids, ctx, results):
        lc, rc = node.children
        phi = _group(kids[0].values)
        psi = _group(kids[1].values)
        to_psi = _indexer(lc.cols, rc.cols)
        rows = []
        for key, ents in phi.items():
            p_at = {e.span[0]: e for e in ents}
            q_at = {e.span[0]: e for e in psi.get(to_psi(key), ())}
            triples = [(t, t in p_at, t in q_at) for t in sorted(p_at.keys() | q_at.keys())]
            for ts, te in kernels.maximal_range(triples):
                prov = {(0, p_at[ts])}
                if te != INF:
                    prov.add((1, q_at[te]))
                rows.append((key, (ts, te), prov))
        return _project(node, lc.cols, rows), []

    def _op_union(self, node, kids, ctx, results):
        lc = node.children[0]
        by_key = defaultdict(list)
        for slot, (child, res) in enumerate(zip(node.children, kids)):
            pick = _indexer(child.cols, lc.cols)
            for e in res.values:
                by_key[pick(e.key)].append((e.span, {(slot, e)}))
        rows = [(k, s, p) for k, pairs in by_key.items() for s, p in _coalesce_with_prov(pairs)]
        return _project(node, lc.cols, rows), []

    def _op_intersection(self, node, kids, ctx, results):
        lc, rc = node.children
        left, right = _group(kids[0].values), _group(kids[1].values)
        shared = [c for c in lc.cols if c in rc.cols]
        out_cols = tuple(sorted(set(lc.cols) | set(rc.cols)))
        idx = defaultdict(list)
        pick_r = _indexer(rc.cols, shared)
        for k in right:
            idx[pick_r(k)].append(k)
        pick_l = _indexer(lc.cols, shared)
        rows = []
        for lk, lents in left.items():
            a = sorted(lents, key=lambda e: e.span)
            a_starts = [e.span[0] for e in a]
            for rk in idx.get(pick_l(lk), ()):
                b = sorted(right[rk], key=lambda e: e.span)
                b_starts = [e.span[0] for e in b]
                key = _merge_binding(lc.cols, lk, rc.cols, rk, out_cols)
                for piece in kernels.intersection([e.span for e in a], [e.span for e in b]):
                    ea = a[bisect_right(a_starts, piece[0]) - 1]
                    eb = b[bisect_right(b_starts, piece[0]) - 1]
                    rows.append((key, tuple(piece), {(0, ea), (1, eb)}))
        return _project(node, out_cols, rows), []

    def _op_complement(self, node, kids, ctx, results):
        lc, rc = node.children
        left, right = _group(kids[0].values), _group(kids[1].values)
        to_r = _indexer(lc.cols, rc.cols)
        rows = []
        for lk, lents in left.items():
            a = sorted(lents, key=lambda e: e.span)
            a_starts = [e.span[0] for e in a]
            b = sorted(right.get(to_r(lk), ()), key=lambda e: e.span)
            b_by_end = {e.span[1]: e for e in b}
            b_by_start = {e.span[0]: e for e in b}
            for piece in kernels.complement([e.span for e in a], [e.span for e in b]):
                ea = a[bisect_right(a_starts, piece[0]) - 1]
                prov = {(0, ea)}
                if piece[0] != ea.span[0] and piece[0] in b_by_end:
                    prov.add((1, b_by_end[piece[0]]))
                if piece[1] != ea.span[1] and piece[1] in b_by_start:
                    prov.add((1, b_by_start[piece[1]]))
                rows.append((lk, tuple(piece), prov))
        return _project(node, lc.cols, rows), []

    def _op_rel(self, node, kids, ctx, results):
        lc, rc = node.children
        rel = node.relation
        ka = "instant" if lc.instant else "interval"
        kb = "instant" if rc.instant else "interval"
        shared = tuple(c for c in lc.cols if c in rc.cols)
        out_cols = tuple(sorted(set(lc.cols) | set(rc.cols)))
        pick_l, pick_r = _indexer(lc.cols, shared), _indexer(rc.cols, shared)
        groups = defaultdict(lambda: ([], []))
        for e in sorted(kids[0].values, key=lambda e: (e.span, e.key)):
            groups[pick_l(e.key)][0].append(e)
        for e in sorted(kids[1].values, key=lambda e: (e.span, e.key)):
            groups[pick_r(e.key)][1].append(e)

        rows = []
        pending = []
        cols_of = {0: lc.cols, 1: rc.cols}
        for g, (A, B) in groups.items():
            ea, eb = [e.span for e in A], [e.span for e in B]
            if A and B:
                for i, j, iv in relation_pairs(rel, ea, ka, eb, kb):
                    key = _merge_binding(lc.cols, A[i].key, rc.cols, B[j].key, out_cols)
                    rows.append((key, tuple(iv), {(0, A[i]), (1, B[j])}))
            if ctx.t_q is not None:
                for inc in relation_incompletes(rel, ea, ka, eb, kb, ctx.t_q):
                    members = set()
                    b = {}
                    for side, k in inc.members:
                        slot, ent = (0, A[k]) if side == "a" else (1, B[k])
                        members.add(("e", slot, ent))
                        b.update(zip(cols_of[slot], ent.key))
                    pending.append(self._pending(node, b, inc.start, inc.min_end, members))

        if ctx.t_q is not None:
            pending.extend(self._propagate(node, kids, groups, shared, ctx))
        return _project(node, out_cols, rows), pending

    def _pending(self, node, binding: dict, start, min_end, members) -> Pending:
        b = tuple(sorted((k, v) for k, v in binding.items() if k in node.cols))
        return Pending(b, IncompleteInterval(start, min_end), frozenset(members))

    def _propagate(self, node, kids, groups, shared, ctx):
        """Undecided child candidates that may still satisfy this relation."""
        lc, rc = node.children
        rel = node.relation
        out = []
        cols_of = {0: lc.cols, 1: rc.cols}
        for slot, side in ((0, "a"), (1, "b")):
            other = 1 - slot
            other_pending = kids[other].pending
            for p in kids[slot].pending:
                pb = dict(p.binding)
                known = {c: pb[c] for c in shared if c in pb}
                compatible = [
                    (g, AB)
                    for g, AB in groups.items()
                    if all(dict(zip(shared, g))[c] == v for c, v in known.items())
                ] or [(None, ([], []))]
                for g, AB in compatible:
                    others = AB[other]
                    gshared = dict(zip(shared, g)) if g is not None else {}
                    opp = [q for q in other_pending if all(dict(q.binding).get(c, v) == v for c, v in gshared.items())]
                    spans = [e.span for e in others] + [(q.start, INF) for q in opp]
                    same = [e.span for e in AB[slot]]
                    ok, partners = feasible_partners(rel, side, p.start, p.min_end, spans, same)
                    if not ok:
                        continue
                    members = {("p", slot, p)}
                    b = dict(pb)
                    b.update(gshared)
                    for k in partners:
                        if k < len(others):
                            members.add(("e", other, others[k]))
                        else:
                            members.add(("p", other, opp[k - len(others)]))
                    if len(partners) == 1 and partners[0] < len(others):
                        b.update(zip(cols_of[other], others[partners[0]].key))
                    start = p.start
                    if side == "b" and partners and rel in ("before", "meets", "overlaps", "contains"):
                        start = min(spans[k][0] for k in partners)
                    min_end = max(p.min_end, ctx.t_q + 1)
                    if min_end <= start:
                        min_end = start + 1
                    out.append(self._pending(node, b, start, min_end, members))
        return out

    # -- retention ----------------------------------------------------------

    def needed(self, results: dict, horizon, root_needed=(), alive_root=True):
        """Entities each node must keep and the items each leaf must keep.

        An entity is needed when it is still live (ends after *horizon*),
        when a parent needs it, or when an undecided candidate that is still
        alive depends on it.  Returns ``(needed, leaf_items)`` where
        ``needed`` maps node ids to entity sets and ``leaf_items`` maps leaf
        ids to item sets.
        """
        needed = {nid: set() for nid in self.nodes}
        needed[self.root.nid].update(root_needed)
        alive = {nid: set() for nid in self.nodes}
        if alive_root:
            alive[self.root.nid].update(results[self.root.nid].pending)
        leaf_items = defaultdict(set)

        def visit(node: Node):
            res = results.get(node.nid)
            if res is None:
                return
            for e, prov in res.values.items():
                if _end(e.span) > horizon or e in needed[node.nid]:
                    for ref in prov:
                        if ref[0] == "item":
                            leaf_items[node.nid].add(ref[1])
                        else:
                            needed[node.children[ref[0]].nid].add(ref[1])
            for p in alive[node.nid]:
                for m in p.members:
                    if m[0] == "e":
                        needed[node.children[m[1]].nid].add(m[2])
                    elif m[0] == "p":
                        alive[node.children[m[1]].nid].add(m[2])
            for c in node.children:
                visit(c)
            for _, f in node.filters:
                if isinstance(f, Node):
                    visit(f)

        visit(self.root)
        kept = {nid: {e for e in es if _end(e.span) <= horizon} for nid, es in needed.items()}
        return kept, dict(leaf_items)


# -- convenience front ends -------------------------------------------------


def _store_view(store):
    """Build a view over ``{pred: [(args, span), ...]}`` (spans or instants)."""
    by_pred = defaultdict(list)
    for pred, facts in store.items():
        for args, ext in facts:
            span = ext if isinstance(ext, tuple) else (ext, ext)
            by_pred[pred].append(Item(pred, tuple(args), span))
    return lambda pred, nid: by_pred.get(pred, ())


def _ground(evaluator, results):
    grouped = defaultdict(list)
    for item in evaluator.items_of(results):
        grouped[item.args].append(item.span)
    if evaluator.root.instant:
        return {args: InstantSet(s for s, _ in spans) for args, spans in grouped.items()}
    return {args: IntervalSet(spans) for args, spans in grouped.items()}


def _check_deps(defn, store, predicates=None):
    for n in ast.walk(defn.body):
        if isinstance(n, ast.Atom) and n.name not in store and (predicates is None or n.name not in predicates):
            raise MissingDependency(f"{n.name} has not been evaluated")


def eval_event(defn, wm) -> dict:
    """``{args: InstantSet}`` for an event definition over a fact store."""
    _check_deps(defn, wm)
    ev = DefinitionEvaluator(defn)
    return _ground(ev, ev.evaluate(Context(_store_view(wm))))


def eval_state(defn, wm) -> dict:
    """``{args: IntervalSet}`` (disjoint) for a state definition."""
    _check_deps(defn, wm)
    ev = DefinitionEvaluator(defn)
    return _ground(ev, ev.evaluate(Context(_store_view(wm))))


def eval_dynamic(defn, wm, t_q):
    """``({args: IntervalSet}, [Pending])`` for a dynamic definition at *t_q*."""
    _check_deps(defn, wm)
    ev = DefinitionEvaluator(defn)
    results = ev.evaluate(Context(_store_view(wm), t_q=t_q))
    return _ground(ev, results), results[ev.root.nid].pending


def evaluate_program(compiled: CompiledProgram, facts: dict, t_q=None) -> dict:
    """Evaluate every definition in level order over input ``facts``.

    *facts* maps input predicate names to ``[(args, extent), ...]``.  The
    result maps every defined predicate to ``{args: InstantSet | IntervalSet}``.
    """
    store = {k: list(v) for k, v in facts.items()}
    out = {}
    for level in compiled.graph.strata():
        for name in level:
            ev = DefinitionEvaluator(compiled.definition(name))
            grounded = _ground(ev, ev.evaluate(Context(_store_view(store), t_q=t_q)))
            out[name] = grounded
            store[name] = [(args, span) for args, s in grounded.items() for span in _spans(s)]
    return out


def _spans(s):
    if isinstance(s, InstantSet):
        return [(t, t) for t in s]
    return list(s)
