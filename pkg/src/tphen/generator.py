"""Synthetic AIS-style traces for the maritime definitions.

Each vessel alternates between port stays and voyages.  A stay lasts at least
two ticks at near-zero speed, followed by a manoeuvring tick and a transit at
cruising speed; some voyages cross a fishing area.  Input states are written
twice, as an open line when they begin and as a closed line when they end,
which mirrors how a live feed would report them.
"""

from __future__ import annotations

import random
from typing import TextIO

from .streamio import StreamLine, format_line
from .temporal.types import INF

PORTS = ("a", "b", "c", "d")
AREAS = ("f", "g")


def _vessel_lines(rng: random.Random, name: str, horizon: int) -> list[tuple[int, int, StreamLine]]:
    out = []  # (arrival, order, line)
    seq = 0

    def emit(t, line):
        nonlocal seq
        out.append((t, seq, line))
        seq += 1

    def state(pred, args, ts, te):
        emit(ts, StreamLine("state", pred, args, (ts, INF)))
        if te < horizon:
            emit(te, StreamLine("state", pred, args, (ts, te)))

    t = rng.randrange(0, 3)
    port = rng.choice(PORTS)
    while t < horizon:
        stay = rng.randint(2, 5)
        state("in_port", (name, port), t, t + stay)
        for k in range(stay):
            speed = round(rng.uniform(0.0, 0.5), 1)
            _ais(emit, rng, name, t + k, speed, horizon)
        t += stay
        _ais(emit, rng, name, t, round(rng.uniform(0.6, 2.5), 1), horizon)
        t += 1
        voyage = rng.randint(3, 9)
        fishing = rng.random() < 0.6 and voyage >= 3
        fa_start = t + rng.randint(0, voyage - 2) if fishing else None
        fa_len = rng.randint(1, 3)
        if fishing:
            state("in_fishing_area", (name, rng.choice(AREAS)), fa_start, min(fa_start + fa_len, t + voyage))
        for k in range(voyage):
            speed = round(rng.uniform(2.8, 12.0), 1)
            if fishing and fa_start <= t + k <= fa_start + fa_len:
                speed = round(rng.uniform(2.8, 4.5), 1)
            _ais(emit, rng, name, t + k, speed, horizon)
        t += voyage
        _ais(emit, rng, name, t, round(rng.uniform(0.6, 2.5), 1), horizon)
        t += 1
        port = rng.choice(PORTS)
    return [x for x in out if x[0] < horizon]


def _ais(emit, rng, name, t, speed, horizon):
    if t < horizon:
        emit(t, StreamLine("event", "ais", (name, speed, round(rng.uniform(20, 28), 3), round(rng.uniform(34, 40), 3)), t))


def generate_lines(seed: int, n_vessels: int, horizon: int) -> list[str]:
    """Trace lines in arrival order, headed by a comment naming the parameters."""
    if horizon < 20:
        raise ValueError(f"horizon must be at least 20 ticks, got {horizon}")
    if n_vessels < 0:
        raise ValueError("n_vessels must be non-negative")
    rng = random.Random(seed)
    rows = []
    for i in range(n_vessels):
        for t, seq, line in _vessel_lines(rng, f"v{i + 1}", horizon):
            rows.append((t, i, seq, line))
    rows.sort(key=lambda r: r[:3])
    header = f"# tphen trace seed={seed} vessels={n_vessels} horizon={horizon}"
    return [header] + [format_line(r[3]) for r in rows]


def generate_trace(seed: int, n_vessels: int, horizon: int, out: TextIO) -> None:
    for line in generate_lines(seed, n_vessels, horizon):
        out.write(line + "\n")
