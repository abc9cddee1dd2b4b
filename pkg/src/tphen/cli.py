"""Command-line driver.

``tphen --input trace.txt --output out.txt --window 50 --step 10`` runs the
bundled maritime definitions (or ``--definitions FILE``) over a stream file.
``tphen generate --seed 1 --vessels 3 --horizon 200`` writes a synthetic
trace.  ``-`` stands for stdin/stdout.

Exit status: 0 on success, 1 when the definitions do not compile, 2 for
configuration, I/O or stream-format errors.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from importlib.resources import files

from .engine import ConfigError, Engine, StreamError, WindowConfig
from .generator import generate_trace
from .lang import CompileError, compile_program
from .streamio import StreamFormatError, format_record, read_stream, write_timeline

log = logging.getLogger("tphen")

EXIT_OK, EXIT_COMPILE, EXIT_IO = 0, 1, 2


def bundled_definitions() -> str:
    return files("tphen").joinpath("data/maritime.tpd").read_text(encoding="utf-8")


def _open(path: str, mode: str):
    if path == "-":
        return contextlib.nullcontext(sys.stdin if "r" in mode else sys.stdout)
    return open(path, mode, encoding="utf-8")


def _run_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tphen", description="Recognise temporal phenomena over a stream file.")
    p.add_argument("--definitions", metavar="PATH", help="definitions file (default: bundled maritime corpus)")
    p.add_argument("--input", metavar="PATH", required=True)
    p.add_argument("--output", metavar="PATH", required=True)
    p.add_argument("--window", type=int, required=True, metavar="N")
    p.add_argument("--step", type=int, required=True, metavar="N")
    p.add_argument("--skip-bad", action="store_true", help="drop malformed stream lines instead of aborting")
    p.add_argument("--emit-timeline", metavar="PATH", help="also write a tab-separated table of detections")
    p.add_argument("--dump-wm", metavar="PATH", help="write the working memory after each query as JSON lines")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _gen_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tphen generate", description="Write a synthetic maritime trace.")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--vessels", type=int, default=1)
    p.add_argument("--horizon", type=int, default=100)
    p.add_argument("--output", metavar="PATH", default="-")
    return p


def _fail(code: int, message: str) -> int:
    print(f"tphen: {message}", file=sys.stderr)
    return code


def generate(argv) -> int:
    args = _gen_parser().parse_args(argv)
    try:
        with _open(args.output, "w") as out:
            generate_trace(args.seed, args.vessels, args.horizon, out)
    except ValueError as exc:
        return _fail(EXIT_IO, str(exc))
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write {args.output}: {exc.strerror}")
    return EXIT_OK


def run(argv) -> int:
    args = _run_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="tphen: %(message)s")
    try:
        config = WindowConfig(args.window, args.step)
    except ConfigError as exc:
        return _fail(EXIT_IO, str(exc))

    try:
        text = bundled_definitions() if args.definitions is None else open(args.definitions, encoding="utf-8").read()
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot read {args.definitions}: {exc.strerror}")
    where = args.definitions or "maritime.tpd"
    try:
        compiled = compile_program(text)
    except CompileError as exc:
        return _fail(EXIT_COMPILE, f"{where}:{exc}")
    for w in compiled.warnings:
        log.warning("%s:%s:%s: warning: %s: %s", where, w.line, w.col, w.code, w.message)

    engine = Engine(compiled, config)
    records = []
    try:
        with contextlib.ExitStack() as stack:
            src = stack.enter_context(_open(args.input, "r"))
            out = stack.enter_context(_open(args.output, "w"))
            dump = stack.enter_context(_open(args.dump_wm, "w")) if args.dump_wm else None
            lines = read_stream(src, skip_bad=args.skip_bad, on_error=lambda e: log.warning("%s: skipped %s", args.input, e))
            checked = _checked(engine, lines, args.skip_bad, lambda e: log.warning("%s: skipped %s", args.input, e))
            for t_q, recs in engine.run(checked):
                for r in recs:
                    out.write(format_record(r) + "\n")
                records.extend(recs)
                if dump is not None:
                    snap = {"t_q": t_q, "horizon": engine.horizon, "late_arrivals": engine.late_arrivals}
                    snap.update(engine.wm.dump())
                    dump.write(json.dumps(snap, sort_keys=True) + "\n")
            if args.emit_timeline:
                with _open(args.emit_timeline, "w") as tl:
                    write_timeline(tl, records)
    except StreamFormatError as exc:
        return _fail(EXIT_IO, f"{args.input}: {exc}")
    except OSError as exc:
        return _fail(EXIT_IO, f"{exc.filename}: {exc.strerror}")
    if engine.late_arrivals:
        log.warning("dropped %d late item(s)", engine.late_arrivals)
    return EXIT_OK


def _checked(engine, lines, skip_bad, on_error):
    """Validate items against the declared inputs, keeping line numbers in errors."""
    for item in lines:
        try:
            engine.validate(*item.as_tuple())
        except StreamError as exc:
            err = StreamFormatError(str(exc), item.lineno)
            if not skip_bad:
                raise err from None
            on_error(err)
            continue
        yield item.as_tuple()


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] == "generate":
        return generate(argv[1:])
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
