"""Command-line interface: learn, validate, inspect, datatype.

Exit codes: 0 all accepted, 1 some anomaly, 2 malformed input or unreadable
model/corpus, 3 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from pathlib import Path
from typing import BinaryIO, Iterator

from . import __version__
from .automaton import EXISTENTIAL, FIRST_TYPE_STRICT, Anomaly, Verdict, format_type_id, validate
from .datatypes import DEFAULT
from .events import StreamConfig, XmlInputError, abstract, describe, iter_events
from .learner import (
    EmptyCorpus,
    InconsistentRoot,
    MalformedEvents,
    MergeParams,
    build_vppa,
    infer,
    merge,
    minimize,
    to_xvpa,
)
from .model_io import ModelError, export_dot, export_vppa_dot, load, save

EXIT_OK = 0
EXIT_ANOMALY = 1
EXIT_MALFORMED = 2
EXIT_USAGE = 3

# a length header longer than this is rejected before int() sees it
_MAX_HEADER = 19


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    if not text.isdigit() or len(text) > 9 or int(text) < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(text)


# -- inputs -----------------------------------------------------------------


def unescape_record(line: bytes) -> bytes:
    out = bytearray()
    i = 0
    n = len(line)
    while i < n:
        b = line[i]
        if b == 0x5C and i + 1 < n:
            nxt = line[i + 1]
            if nxt == 0x6E:
                out.append(0x0A)
            elif nxt == 0x72:
                out.append(0x0D)
            elif nxt == 0x5C:
                out.append(0x5C)
            else:
                out += line[i : i + 2]
            i += 2
            continue
        out.append(b)
        i += 1
    return bytes(out)


def read_line_records(stream: BinaryIO) -> Iterator[bytes]:
    """Newline-delimited records; ``\\n``, ``\\r`` and ``\\\\`` are escapes."""
    for raw in stream:
        line = raw.rstrip(b"\r\n")
        if line.strip():
            yield unescape_record(line)


def read_length_records(stream: BinaryIO) -> Iterator[bytes]:
    """Records framed as an ASCII decimal byte count, LF, then the bytes."""
    while True:
        header = stream.readline(_MAX_HEADER + 2)
        if not header:
            return
        text = header.strip()
        if not text:
            continue
        if not text.isdigit() or len(text) > _MAX_HEADER or not header.endswith(b"\n"):
            raise XmlInputError(f"bad length header {header[:_MAX_HEADER + 2]!r}")
        size = int(text)
        body = stream.read(size)
        if len(body) != size:
            raise XmlInputError(f"record truncated: expected {size} bytes, got {len(body)}")
        yield body


def expand_inputs(inputs: list[str], framing: str) -> Iterator[tuple[str, object]]:
    """Yield (source id, document) in a deterministic order."""
    for item in inputs:
        if item == "-":
            reader = read_length_records if framing == "length" else read_line_records
            try:
                for i, rec in enumerate(reader(sys.stdin.buffer), 1):
                    yield f"<stdin>#{i}", rec
            except XmlInputError as exc:
                yield "<stdin>", exc
            continue
        p = Path(item)
        if p.is_dir():
            for f in sorted(q for q in p.rglob("*.xml") if q.is_file()):
                yield str(f), f
        else:
            yield item, p


def _config(args) -> StreamConfig:
    return StreamConfig(max_depth=args.max_depth, keep_whitespace_text=args.keep_whitespace)


def _events(doc, config):
    if isinstance(doc, Exception):
        raise doc
    if isinstance(doc, Path):
        try:
            with open(doc, "rb") as fh:
                yield from iter_events(fh, config)
        except OSError as exc:
            raise XmlInputError(f"cannot read: {exc.strerror or exc}") from None
        return
    yield from iter_events(doc, config)


# -- commands ---------------------------------------------------------------


def cmd_learn(args) -> int:
    params = MergeParams(args.k, args.l)
    config = _config(args)
    current = ["<none>"]
    count = [0]

    def corpus():
        for name, doc in expand_inputs(args.inputs, args.framing):
            current[0] = name
            count[0] += 1
            yield _events(doc, config)

    trim = not args.no_trim
    try:
        if args.trace:
            v = build_vppa(corpus(), trim=trim)
            merged = merge(v, params)
            Path(f"{args.trace}.vppa.dot").write_text(export_vppa_dot(v, "vppa"), encoding="utf-8")
            Path(f"{args.trace}.merged.dot").write_text(export_vppa_dot(merged, "merged"), encoding="utf-8")
            a = minimize(to_xvpa(merged, params))
        else:
            a = infer(corpus(), params=params, trim=trim)
    except EmptyCorpus:
        print("error: EmptyCorpus: no documents given", file=sys.stderr)
        return EXIT_MALFORMED
    except (XmlInputError, MalformedEvents) as exc:
        print(f"error: {current[0]}: malformed: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except InconsistentRoot as exc:
        print(f"error: InconsistentRoot: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    data = save(a)
    out = sys.stderr if args.model == "-" else sys.stdout
    if args.model == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(args.model).write_bytes(data)
    n_states = sum(len(m.states) for m in a.modules.values())
    print(
        f"learned from {count[0]} documents: |sigma|={len(a.sigma)}, "
        f"{len(a.modules)} modules, {n_states} module states, k={params.k} l={params.l}",
        file=out,
    )
    return EXIT_OK


def _load_model(path: str):
    try:
        data = sys.stdin.buffer.read() if path == "-" else Path(path).read_bytes()
    except OSError as exc:
        print(f"error: cannot read model {path}: {exc.strerror or exc}", file=sys.stderr)
        return None
    try:
        return load(data)
    except ModelError as exc:
        print(f"error: {path}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return None


def _malformed(exc: Exception) -> Verdict:
    return Verdict(False, (Anomaly(1, "malformed", str(exc), frozenset()),))


def anomaly_record(an: Anomaly) -> dict:
    return {
        "position": an.position,
        "category": an.category,
        "observed": an.observed,
        "expected": sorted(describe(s) for s in an.expected),
    }


def cmd_validate(args) -> int:
    if "-" in args.inputs and args.model == "-":
        raise UsageError("model and documents cannot both come from stdin")
    a = _load_model(args.model)
    if a is None:
        return EXIT_MALFORMED
    mode = FIRST_TYPE_STRICT if args.strict_first_type else EXISTENTIAL
    config = _config(args)
    trim = not args.no_trim
    totals: Counter = Counter()
    for name, doc in expand_inputs(args.inputs, args.framing):
        try:
            verdict = validate(a, abstract(_events(doc, config), a.dts, trim=trim), mode)
        except XmlInputError as exc:
            verdict = _malformed(exc)
        key = verdict.category or "accepted"
        totals[key] += 1
        totals["documents"] += 1
        if args.format == "ndjson":
            rec = {
                "source": name,
                "accepted": verdict.accepted,
                "anomalies": [anomaly_record(x) for x in verdict.anomalies],
            }
            print(json.dumps(rec, ensure_ascii=False))
        elif verdict.accepted:
            print(f"{name}: accepted")
        else:
            for an in verdict.anomalies:
                print(f"{name}: {an}")
    summary = {k: totals[k] for k in ("documents", "accepted", "structural", "datatype", "malformed")}
    if args.format == "ndjson":
        print(json.dumps({"summary": summary}))
    else:
        print(
            f"{summary['documents']} documents: {summary['accepted']} accepted, "
            f"{summary['structural']} structural, {summary['datatype']} datatype, "
            f"{summary['malformed']} malformed"
        )
    if summary["malformed"]:
        return EXIT_MALFORMED
    if summary["documents"] != summary["accepted"]:
        return EXIT_ANOMALY
    return EXIT_OK


def cmd_inspect(args) -> int:
    a = _load_model(args.model)
    if a is None:
        return EXIT_MALFORMED
    if args.dot:
        sys.stdout.write(export_dot(a))
        return EXIT_OK
    mods = a.modules
    n_states = sum(len(m.states) for m in mods.values())
    print(f"{len(mods)} modules, {n_states} module states, m0={format_type_id(a.m0)}")
    n_calls = sum(len(m.calls) for m in mods.values())
    n_rets = sum(len(m.returns) for m in mods.values())
    n_ints = sum(len(m.internals) for m in mods.values())
    print(f"transitions: {n_calls} calls, {n_rets} returns, {n_ints} internals")
    if a.params is not None:
        print(f"parameters: k={a.params.k} l={a.params.l}")
    print("module\ttag\tstates\texits")
    for m in sorted(mods):
        print(f"{format_type_id(m)}\t{a.mu[m]}\t{len(mods[m].states)}\t{len(mods[m].exits)}")
    return EXIT_OK


def cmd_datatype(args) -> int:
    dts = DEFAULT
    types = dts.types(args.text)
    order = dts.canonical_order

    def fmt(ts):
        return "{" + ", ".join(d.value for d in order if d in ts) + "}"

    print(f"minimal: {fmt(types)}")
    print(f"first: {dts.first(types).value}")
    print(f"closure: {fmt(dts.cl_inverse(types))}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="xvpa", description="Learn and apply datatype-aware XML automata.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def stream_flags(sp):
        sp.add_argument("--max-depth", type=_positive, default=1024, help="nesting depth cap")
        sp.add_argument("--keep-whitespace", action="store_true", help="keep whitespace-only text")
        sp.add_argument("--no-trim", action="store_true", help="type text data without trimming")
        sp.add_argument(
            "--framing", choices=("lines", "length"), default="lines", help="stdin record framing"
        )

    sp = sub.add_parser("learn", help="learn a model from documents")
    sp.add_argument("inputs", nargs="*", help="files, directories or - for stdin")
    sp.add_argument("--model", required=True, help="output model path (- for stdout)")
    sp.add_argument("--k", type=_positive, default=1, help="left-sibling suffix length")
    sp.add_argument("--l", type=_positive, default=2, help="ancestor suffix length")
    sp.add_argument("--trace", metavar="PREFIX", help="write PREFIX.vppa.dot and PREFIX.merged.dot")
    stream_flags(sp)
    sp.set_defaults(func=cmd_learn)

    sp = sub.add_parser("validate", help="validate documents against a model")
    sp.add_argument("inputs", nargs="+", help="files, directories or - for stdin")
    sp.add_argument("--model", required=True)
    sp.add_argument("--strict-first-type", action="store_true", help="try only the first minimal datatype")
    sp.add_argument("--format", choices=("text", "ndjson"), default="text")
    stream_flags(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("inspect", help="summarize a model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--dot", action="store_true", help="print the automaton in DOT")
    sp.set_defaults(func=cmd_inspect)

    sp = sub.add_parser("datatype", help="show the datatypes of a string")
    sp.add_argument("text")
    sp.set_defaults(func=cmd_datatype)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"xvpa: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
