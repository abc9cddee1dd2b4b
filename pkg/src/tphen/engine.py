"""Sliding-window recognition engine.

At each query time the definitions are evaluated level by level against the
working memory.  Afterwards every stored item that ends at or before the next
window's lower edge is discarded unless some live or undecided evaluation
still depends on it.  The dependency marks ("tags") are kept per consuming
leaf, so an item retained for one formula does not leak into another.
"""

from __future__ import annotations

import copy
import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Iterator

from .lang import CompiledProgram
from .relational import Context, DefinitionEvaluator, Item
from .temporal.types import INF

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


class LateArrival(Exception):
    """An input item arrived for a period that has already been queried."""


class StreamError(ValueError):
    """An input item that does not match the declared inputs."""


class QueryError(RuntimeError):
    pass


@dataclass(frozen=True)
class WindowConfig:
    size: int
    step: int

    def __post_init__(self):
        for name in ("size", "step"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise ConfigError(f"window {name} must be an integer, got {v!r}")
        if not 0 < self.step <= self.size:
            raise ConfigError(f"need 0 < step <= size, got step={self.step} size={self.size}")


@dataclass(frozen=True)
class DetectionRecord:
    pred: str
    args: tuple
    kind: str  # "instant" | "interval"
    extent: object  # t, or (ts, te)
    query_time: int
    status: str = "new"  # "new" | "revised" | "retracted"

    @property
    def item(self) -> Item:
        span = (self.extent, self.extent) if self.kind == "instant" else tuple(self.extent)
        return Item(self.pred, self.args, span)


def arrival_time(span) -> int:
    """When a stream item becomes known: its end, or its start if still open."""
    return span[0] if span[1] == INF else span[1]


class WorkingMemory:
    """Items by predicate plus the bookkeeping carried between queries."""

    def __init__(self):
        self.items: dict[str, dict[Item, None]] = defaultdict(dict)
        self.tags: dict[Item, frozenset] = {}
        self.needed: dict[str, set] = {}
        self.pending: dict[str, list] = {}

    def copy(self) -> "WorkingMemory":
        out = WorkingMemory()
        out.items = defaultdict(dict, {k: dict(v) for k, v in self.items.items()})
        out.tags = dict(self.tags)
        out.needed = {k: set(v) for k, v in self.needed.items()}
        out.pending = copy.copy(self.pending)
        return out

    def all_items(self) -> Iterator[Item]:
        for bucket in self.items.values():
            yield from bucket

    def __len__(self) -> int:
        return sum(len(b) for b in self.items.values())

    def __contains__(self, item) -> bool:
        return item in self.items.get(item.pred, ())

    def dump(self) -> dict:
        def span(s):
            return [s[0], "inf" if s[1] == INF else s[1]]

        return {
            "items": [
                {"pred": it.pred, "args": list(it.args), "span": span(it.span)}
                for it in sorted(self.all_items(), key=_item_order)
            ],
            "pending": {
                pred: sorted(
                    ({"binding": {str(i): v for i, v in pos}, "start": inc.start, "min_end": inc.min_end} for pos, inc in ps),
                    key=lambda d: (d["start"], d["min_end"], str(d["binding"])),
                )
                for pred, ps in sorted(self.pending.items())
                if ps
            },
        }


def close_open_intervals(before: set, after: set, t_q: int, instants=frozenset()) -> list[DetectionRecord]:
    """Records for detections appearing between two snapshots of derived items.

    A previously reported open interval that is no longer derivable is
    superseded by a new detection with the same predicate, arguments and
    start (reported as ``revised``) or, when none exists, withdrawn with a
    ``retracted`` record.
    """
    fresh = sorted(after - before, key=_item_order)
    gone_open = sorted((it for it in before - after if it.span[1] == INF), key=_item_order)
    by_start = defaultdict(list)
    for it in fresh:
        by_start[(it.pred, it.args, it.span[0])].append(it)
    revised = set()
    out = []
    for it in gone_open:
        cands = [c for c in by_start.get((it.pred, it.args, it.span[0]), ()) if c not in revised]
        if cands:
            revised.add(cands[0])
        else:
            out.append(_record(it, t_q, "retracted", instants))
    for it in fresh:
        out.append(_record(it, t_q, "revised" if it in revised else "new", instants))
    out.sort(key=lambda r: _item_order(r.item) + (r.status,))
    return out


def _record(it: Item, t_q: int, status: str, instants=frozenset()) -> DetectionRecord:
    s, e = it.span
    if it.pred in instants:
        return DetectionRecord(it.pred, it.args, "instant", s, t_q, status)
    return DetectionRecord(it.pred, it.args, "interval", (s, e), t_q, status)


def _item_order(it: Item):
    return (it.pred, tuple(map(str, it.args)), it.span[0], it.span[1])


class Engine:
    """Drives the query loop over a compiled program."""

    def __init__(self, compiled: CompiledProgram, config: WindowConfig):
        self.compiled = compiled
        self.config = config
        self.evaluators = {d.head.name: DefinitionEvaluator(d) for d in compiled.program.definitions}
        self.strata = compiled.graph.strata()
        self.inputs = {n: r for n, r in compiled.predicates.items() if r.is_input}
        self.instant_preds = frozenset(n for n, r in compiled.predicates.items() if r.base_kind == "event")
        self.wm = WorkingMemory()
        self.buffer: list[Item] = []
        self.last_query: int | None = None
        self.horizon = -1  # lower edge of the next evaluation
        self.late_arrivals = 0
        self.reported: set = set()  # derived items reported and still derivable
        self.last_nonredundant: set = set()

    # -- ingestion ------------------------------------------------------------

    def ingest(self, kind: str, pred: str, args: Iterable, extent) -> None:
        """Queue one input item for the next query.

        *kind* is ``event``, ``state`` or ``dynamic``; *extent* an instant or
        a ``(ts, te)`` pair whose end may be infinite.
        """
        item = self.validate(kind, pred, args, extent)
        span = item.span
        last = self.last_query
        if last is not None and arrival_time(span) <= last:
            self.late_arrivals += 1
            raise LateArrival(f"{pred}{args} at {span} arrives at or before processed time {last}")
        if last is not None and span[0] <= last and not self._closes_open(item):
            self.late_arrivals += 1
            raise LateArrival(f"{pred}{args} starts at {span[0]} before processed time {last} with no open announcement")
        self.buffer.append(item)

    def validate(self, kind: str, pred: str, args: Iterable, extent) -> Item:
        """Check an input item against the declarations; raise StreamError."""
        args = tuple(args)
        ref = self.inputs.get(pred)
        if ref is None:
            raise StreamError(f"{pred} is not a declared input")
        if ref.base_kind != kind:
            raise StreamError(f"{pred} is declared as {ref.base_kind}, got {kind}")
        if len(args) != ref.arity:
            raise StreamError(f"{pred} expects {ref.arity} argument(s), got {len(args)}")
        if kind == "event":
            span = (extent, extent)
            if not isinstance(extent, int) or extent < 0:
                raise StreamError(f"bad instant {extent!r}")
        else:
            span = tuple(extent)
            if len(span) != 2 or not isinstance(span[0], int) or span[0] < 0 or not (
                span[1] == INF or (isinstance(span[1], int) and span[1] > span[0])
            ):
                raise StreamError(f"bad interval {extent!r}")
        return Item(pred, args, span)

    def _closes_open(self, item: Item) -> bool:
        opened = Item(item.pred, item.args, (item.span[0], INF))
        return opened in self.wm or opened in self.buffer

    def _drain(self, wm: WorkingMemory) -> None:
        for item in self.buffer:
            bucket = wm.items[item.pred]
            if item.span[1] != INF:
                opened = Item(item.pred, item.args, (item.span[0], INF))
                if opened in bucket:
                    del bucket[opened]
                    wm.tags.pop(opened, None)
            bucket[item] = None

    # -- querying -------------------------------------------------------------

    def run_query(self, t_q: int) -> list[DetectionRecord]:
        """Evaluate all definitions at *t_q*, commit, and return new records."""
        if self.last_query is not None and t_q <= self.last_query:
            raise QueryError(f"query time {t_q} does not advance past {self.last_query}")
        lower = self.horizon
        horizon = t_q - self.config.size + self.config.step
        wm = self.wm.copy()
        self._drain(wm)
        try:
            results = self._evaluate(wm, t_q, lower)
            derived_now = {it for name in self.evaluators for it in wm.items.get(name, ())}
            nonredundant = self._retain(wm, results, horizon)
        except Exception as exc:  # leave the committed state untouched
            raise QueryError(f"query at {t_q} failed: {exc}") from exc

        records = close_open_intervals(self.reported, derived_now, t_q, self.instant_preds)
        self.wm = wm
        self.buffer = []
        self.last_query = t_q
        self.horizon = horizon
        self.reported = {it for it in derived_now if it in wm}
        self.last_nonredundant = nonredundant
        return records

    def _evaluate(self, wm: WorkingMemory, t_q: int, lower) -> dict:
        results = {}
        for level in self.strata:
            for name in level:
                ev = self.evaluators[name]

                def view(pred, nid, _items=wm.items, _tags=wm.tags):
                    return [it for it in _items.get(pred, ()) if it.span[1] > lower or nid in _tags.get(it, ())]

                ctx = Context(
                    view=view,
                    t_q=t_q,
                    lower=lower,
                    needed=wm.needed,
                    pendings=lambda pred, _p=wm.pending: _p.get(pred, ()),
                )
                res = ev.evaluate(ctx)
                results[name] = res
                wm.items[name] = dict.fromkeys(sorted(ev.items_of(res), key=_item_order))
        return results

    def _retain(self, wm: WorkingMemory, results: dict, horizon) -> set:
        tags = defaultdict(set)
        needed_all = {}
        pending = {}
        for level in reversed(self.strata):
            for name in level:
                ev = self.evaluators[name]
                res = results[name]
                root_items = ev.items_of(res)
                root_needed = {e for it, e in root_items.items() if tags.get(it)}
                needed, leaf_items = ev.needed(res, horizon, root_needed)
                needed_all.update(needed)
                for nid, items in leaf_items.items():
                    for it in items:
                        tags[it].add(nid)
                pending[name] = list(dict.fromkeys((ev.pending_args(p), p.interval) for p in res[ev.root.nid].pending))

        nonredundant = set()
        for pred, bucket in list(wm.items.items()):
            kept = {}
            for it in bucket:
                if it.span[1] > horizon or it in tags:
                    kept[it] = None
                    nonredundant.add(it)
            wm.items[pred] = kept
        wm.tags = {it: frozenset(n) for it, n in tags.items() if it in nonredundant}
        wm.needed = needed_all
        wm.pending = {k: v for k, v in pending.items() if v}
        return nonredundant

    def classify_nonredundant(self) -> set:
        """Items the last query kept: those still in or after the next window,
        and those some live or undecided evaluation depends on."""
        return set(self.last_nonredundant)

    # -- driving a stream -------------------------------------------------------

    def query_times(self, first_arrival: int) -> Iterator[int]:
        s = self.config.step
        k = max(1, -(-first_arrival // s)) if first_arrival > 0 else 1
        while True:
            yield k * s
            k += 1

    def run(self, stream: Iterable[tuple], on_late=None) -> Iterator[tuple[int, list[DetectionRecord]]]:
        """Feed ``(kind, pred, args, extent)`` tuples in arrival order.

        Yields ``(t_q, records)`` after each query.  Queries fire at multiples
        of the step; the last one covers the final arrivals.
        """
        s = self.config.step
        next_q = None
        pending_data = False
        for kind, pred, args, extent in stream:
            span = (extent, extent) if kind == "event" else tuple(extent)
            t = arrival_time(span)
            if next_q is None:
                next_q = max(s, -(-t // s) * s)
            while t > next_q:
                yield next_q, self.run_query(next_q)
                pending_data = False
                next_q += s
            try:
                self.ingest(kind, pred, args, extent)
                pending_data = True
            except LateArrival as exc:
                log.warning("%s", exc)
                if on_late is not None:
                    on_late(exc)
        if pending_data or self.buffer:
            yield next_q, self.run_query(next_q)


def final_detections(records: Iterable[DetectionRecord]) -> set:
    """Items reported and not later superseded by a revision or retraction."""
    current: set = set()
    for r in records:
        if r.status == "retracted":
            current.discard(r.item)
            continue
        if r.status == "revised":
            opened = Item(r.pred, r.args, (r.item.span[0], INF))
            current.discard(opened)
        current.add(r.item)
    return current


def batch_detections(compiled: CompiledProgram, stream: list[tuple]) -> set:
    """Detections of a single evaluation that sees the whole stream at once."""
    if not stream:
        return set()
    last = max(arrival_time((e, e) if k == "event" else tuple(e)) for k, _, _, e in stream)
    size = max(last, 1)
    eng = Engine(compiled, WindowConfig(size, size))
    records = [r for _, rs in eng.run(stream) for r in rs]
    return final_detections(records)
