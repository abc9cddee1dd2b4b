from importlib.resources import files
from math import inf as INF

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tphen.engine import (
    ConfigError,
    DetectionRecord,
    Engine,
    LateArrival,
    QueryError,
    StreamError,
    WindowConfig,
    batch_detections,
    close_open_intervals,
    final_detections,
)
from tphen.generator import generate_lines
from tphen.lang import compile_program
from tphen.relational import Item
from tphen.streamio import parse_line, read_stream

MARITIME = compile_program(files("tphen").joinpath("data/maritime.tpd").read_text())
FIG1 = [l.as_tuple() for l in read_stream(files("tphen").joinpath("data/fig1.stream").read_text().splitlines())]
STOPS = compile_program(
    "input event stop_start/1. input event stop_end/1.\nstate stopped(V): stop_start(V) ~> stop_end(V)."
)


def items(engine, pred):
    return sorted((it.args, it.span) for it in engine.wm.items.get(pred, ()))


def run_all(engine, stream):
    return [r for _, rs in engine.run(stream) for r in rs]


def lines(*text):
    return [parse_line(t).as_tuple() for t in text]


# -- configuration ------------------------------------------------------------


@pytest.mark.parametrize("size, step", [(10, 0), (10, -1), (50, 60), (0, 0), (5.0, 5), (True, 1)])
def test_window_config_rejects(size, step):
    with pytest.raises(ConfigError):
        WindowConfig(size, step)


def test_window_config_accepts_equal_step():
    assert WindowConfig(5, 5).step == 5


# -- ingestion ----------------------------------------------------------------


def test_ingest_event_and_state():
    eng = Engine(MARITIME, WindowConfig(10, 5))
    eng.ingest("event", "ais", ("v1", 0.3, 0, 0), 7)
    eng.ingest("state", "in_port", ("v1", "p1"), (3, 8))
    assert [it.span for it in eng.buffer] == [(7, 7), (3, 8)]


def test_late_event_is_dropped_and_counted():
    eng = Engine(MARITIME, WindowConfig(10, 5))
    eng.run_query(5)
    with pytest.raises(LateArrival):
        eng.ingest("event", "ais", ("v1", 0.3, 0, 0), 2)
    assert eng.late_arrivals == 1 and eng.buffer == []


def test_open_state_may_close_after_query():
    eng = Engine(MARITIME, WindowConfig(10, 5))
    eng.ingest("state", "in_port", ("v", "a"), (3, INF))
    eng.run_query(5)
    eng.ingest("state", "in_port", ("v", "a"), (3, 8))
    eng.run_query(10)
    assert items(eng, "in_port") == [(("v", "a"), (3, 8))]


def test_closed_state_starting_in_the_past_needs_announcement():
    eng = Engine(MARITIME, WindowConfig(10, 5))
    eng.run_query(5)
    with pytest.raises(LateArrival):
        eng.ingest("state", "in_port", ("v", "a"), (3, 8))
    with pytest.raises(LateArrival):
        eng.ingest("state", "in_port", ("v", "b"), (1, 4))
    assert eng.late_arrivals == 2


@pytest.mark.parametrize(
    "kind, pred, args, extent",
    [
        ("event", "nope", ("v",), 1),
        ("state", "ais", ("v", 1, 0, 0), (1, 2)),
        ("event", "ais", ("v",), 1),
        ("state", "in_port", ("v", "a"), (4, 4)),
        ("event", "ais", ("v", 1, 0, 0), -1),
    ],
)
def test_ingest_validation(kind, pred, args, extent):
    with pytest.raises(StreamError):
        Engine(MARITIME, WindowConfig(10, 5)).ingest(kind, pred, args, extent)


def test_stream_driver_counts_late_items():
    eng = Engine(MARITIME, WindowConfig(10, 5))
    stream = lines("E|ais|6|v,0.1,0,0", "E|ais|3|v,0.1,0,0", "E|ais|12|v,0.1,0,0", "E|ais|8|v,0.1,0,0")
    dropped = []
    list(eng.run(stream, on_late=dropped.append))
    assert eng.late_arrivals == 1 and len(dropped) == 1


# -- queries ------------------------------------------------------------------


def test_empty_memory_gives_no_detections():
    assert Engine(MARITIME, WindowConfig(10, 5)).run_query(5) == []


def test_query_times_advance():
    eng = Engine(MARITIME, WindowConfig(10, 5))
    eng.run_query(5)
    with pytest.raises(QueryError):
        eng.run_query(5)


def test_voyage_detections():
    eng = Engine(MARITIME, WindowConfig(8, 4))
    recs = run_all(eng, FIG1)
    got = {(r.pred, r.args, r.extent) for r in recs}
    assert ("fishing_trip", ("v", "a", "f", "b"), (1, 6)) in got
    assert ("moored", ("v", "a"), (0, 1)) in got
    assert ("moored", ("v", "b"), (6, 7)) in got


def test_voyage_retention_after_slide():
    eng = Engine(MARITIME, WindowConfig(8, 4))
    for t_q, _ in eng.run(FIG1):
        pass
    assert t_q == 12 and eng.horizon == 8
    assert items(eng, "moored") == [(("v", "b"), (6, 7))]
    assert items(eng, "in_fishing_area") == []
    assert items(eng, "fishing_trip") == []
    assert (("v",), (2, 5)) not in items(eng, "underway")
    kept = eng.classify_nonredundant()
    assert Item("moored", ("v", "b"), (6, 7)) in kept
    assert Item("moored", ("v", "a"), (0, 1)) not in kept


def test_open_detection_keeps_its_support():
    eng = Engine(MARITIME, WindowConfig(8, 4))
    list(eng.run(FIG1))
    # underway(v)@[9,inf) is open, so the stop_end at 9 that opened it stays
    assert (("v",), (9, INF)) in items(eng, "underway")
    assert (("v",), (9, 9)) in items(eng, "stop_end")


def continued_voyage():
    """The vessel leaves b, crosses area f and moors at port c."""
    out = list(FIG1)
    speeds = {13: 3.0, 14: 3.5, 15: 1.0, 16: 0.2, 17: 0.1, 18: 0.2, 19: 1.5, 20: 3.0}
    for t in range(13, 21):
        if t == 13:
            out.append(("state", "in_fishing_area", ("v", "f"), (13, INF)))
        if t == 14:
            out.append(("state", "in_fishing_area", ("v", "f"), (13, 14)))
        if t == 16:
            out.append(("state", "in_port", ("v", "c"), (16, INF)))
        if t == 18:
            out.append(("state", "in_port", ("v", "c"), (16, 18)))
        out.append(("event", "ais", ("v", speeds[t], 0, 0), t))
    return out


def test_retained_item_drives_a_later_detection():
    stream = continued_voyage()
    eng = Engine(MARITIME, WindowConfig(8, 4))
    found = final_detections(run_all(eng, stream))
    trip = Item("fishing_trip", ("v", "b", "f", "c"), (7, 16))
    assert trip in found
    assert found == batch_detections(MARITIME, stream)

    # dropping the input behind the retained moored(v,b)@[6,7] after the slide loses the trip
    sabotaged = Engine(MARITIME, WindowConfig(8, 4))
    recs = []
    for t_q, rs in sabotaged.run(stream):
        recs.extend(rs)
        if t_q == 12:
            doomed = Item("moored", ("v", "b"), (6, 7))
            assert doomed in sabotaged.wm
            sabotaged.wm.items["in_port"].pop(Item("in_port", ("v", "b"), (6, 7)))
            sabotaged.wm.tags.pop(Item("in_port", ("v", "b"), (6, 7)))
            for name in list(sabotaged.wm.needed):
                sabotaged.wm.needed[name] = {e for e in sabotaged.wm.needed[name] if e.span != (6, 7)}
    assert trip not in final_detections(recs)


def test_failed_query_leaves_memory_untouched(monkeypatch):
    eng = Engine(MARITIME, WindowConfig(8, 4))
    gen = eng.run(FIG1)
    next(gen)
    before = eng.wm.dump()
    eng.ingest("event", "ais", ("v", 0.1, 0, 0), 6)

    def boom(ctx):
        raise RuntimeError("injected")

    monkeypatch.setattr(eng.evaluators["moored"], "evaluate", boom)
    with pytest.raises(QueryError):
        eng.run_query(8)
    assert eng.wm.dump() == before and eng.last_query == 4 and len(eng.buffer) == 1


# -- revisions ----------------------------------------------------------------


def test_open_state_is_revised_when_closed():
    eng = Engine(STOPS, WindowConfig(10, 5))
    stream = lines("E|stop_start|4|v1", "E|stop_start|6|v2", "E|stop_end|12|v1")
    out = list(eng.run(stream))
    assert [(t, [(r.args, r.extent, r.status) for r in rs]) for t, rs in out] == [
        (5, [(("v1",), (4, INF), "new")]),
        (10, [(("v2",), (6, INF), "new")]),
        (15, [(("v1",), (4, 12), "revised")]),
    ]


def test_no_closing_evidence_leaves_detection_alone():
    eng = Engine(STOPS, WindowConfig(10, 5))
    out = list(eng.run(lines("E|stop_start|4|v1", "E|stop_start|9|v2", "E|stop_end|12|v2")))
    assert all(r.args == ("v2",) for r in out[-1][1])


def test_vanished_open_detection_is_retracted():
    gone = Item("d", ("x",), (3, INF))
    recs = close_open_intervals({gone}, set(), 20)
    assert recs == [DetectionRecord("d", ("x",), "interval", (3, INF), 20, "retracted")]
    assert final_detections([DetectionRecord("d", ("x",), "interval", (3, INF), 10), *recs]) == set()


def test_closed_detections_are_final():
    done = Item("d", ("x",), (3, 9))
    assert close_open_intervals({done}, set(), 20) == []


# -- properties ---------------------------------------------------------------

WINDOWS = [(w, s) for w in (4, 10, 25) for s in (1, 3, 5, 10) if s <= w]


def maritime_stream(seed, vessels, horizon):
    return [l.as_tuple() for l in read_stream(generate_lines(seed, vessels, horizon))]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 2), st.integers(20, 60), st.sampled_from(WINDOWS))
def test_windowed_matches_batch(seed, vessels, horizon, window):
    stream = maritime_stream(seed, vessels, horizon)
    eng = Engine(MARITIME, WindowConfig(*window))
    assert final_detections(run_all(eng, stream)) == batch_detections(MARITIME, stream)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(WINDOWS))
def test_window_invariants(seed, window):
    stream = maritime_stream(seed, 2, 50)
    eng = Engine(MARITIME, WindowConfig(*window))
    for t_q, recs in eng.run(stream):
        for r in recs:
            ends = [r.extent] if r.kind == "instant" else [x for x in r.extent if x != INF]
            assert max(ends) <= t_q
        for it in eng.wm.all_items():
            if it.span[1] <= eng.horizon:
                assert it in eng.wm.tags, it


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6))
def test_output_is_deterministic(seed):
    stream = maritime_stream(seed, 2, 40)
    a = run_all(Engine(MARITIME, WindowConfig(10, 5)), stream)
    b = run_all(Engine(MARITIME, WindowConfig(10, 5)), stream)
    assert a == b
