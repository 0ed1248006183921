"""Model persistence (canonical JSON) and Graphviz export."""

from __future__ import annotations

import json
from typing import Any

from .automaton import Module, State, Xvpa, check_invariants, format_state, format_type_id
from .datatypes import DATATYPES_VERSION, DEFAULT, Datatype

__all__ = [
    "FORMAT_VERSION",
    "ModelError",
    "ParseError",
    "VersionMismatch",
    "InvalidModel",
    "save",
    "load",
    "dumps_model",
    "export_dot",
    "export_vppa_dot",
]

FORMAT_VERSION = 1


class ModelError(ValueError):
    pass


class ParseError(ModelError):
    pass


class VersionMismatch(ModelError):
    pass


class InvalidModel(ModelError):
    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        head = "; ".join(self.violations[:5])
        more = f" (+{len(self.violations) - 5} more)" if len(self.violations) > 5 else ""
        super().__init__(f"invalid model: {head}{more}")


def _st(q: State) -> list:
    return [list(q.anc), list(q.lsib)]


def _sorted(items: list) -> list:
    return sorted(items, key=lambda x: json.dumps(x, ensure_ascii=False))


def _module_json(mod: Module, mu: str) -> dict:
    return {
        "type": list(mod.type_id),
        "mu": mu,
        "entry": _st(mod.entry),
        "states": _sorted([_st(q) for q in mod.states]),
        "exits": _sorted([_st(q) for q in mod.exits]),
        "calls": _sorted([[_st(q), c, list(n)] for q, c, n in mod.calls]),
        "returns": _sorted([[_st(q), _st(p), c, _st(t)] for q, p, c, t in mod.returns]),
        "internals": _sorted([[_st(q), d.value, _st(t)] for q, d, t in mod.internals]),
    }


def dumps_model(a: Xvpa) -> dict:
    params = a.params
    return {
        "format_version": FORMAT_VERSION,
        "k": params.k if params else None,
        "l": params.l if params else None,
        "sigma": sorted(a.sigma),
        "datatypes_version": a.dts.version,
        "m0": list(a.m0),
        "modules": [_module_json(a.modules[m], a.mu[m]) for m in sorted(a.modules)],
        "finals": _sorted([_st(q) for q in a.finals]),
    }


def save(a: Xvpa, params=None) -> bytes:
    """Serialize ``a``; identical models give identical bytes."""
    problems = check_invariants(a)
    if problems:
        raise InvalidModel(problems)
    if params is not None and params != a.params:
        a = Xvpa(a.sigma, a.modules, a.mu, a.m0, params, a.dts)
    doc = dumps_model(a)
    compact = {"ensure_ascii": False, "separators": (",", ":")}
    lines = []
    for key, value in doc.items():
        if key == "modules":
            body = ",\n  ".join(json.dumps(m, **compact) for m in value)
            lines.append(f'"modules":[\n  {body}\n]' if value else '"modules":[]')
        else:
            lines.append(f"{json.dumps(key)}:{json.dumps(value, **compact)}")
    return ("{\n" + ",\n".join(lines) + "\n}\n").encode("utf-8")


def _state(x: Any, where: str) -> State:
    if (
        not isinstance(x, list)
        or len(x) != 2
        or not all(isinstance(part, list) and all(isinstance(s, str) for s in part) for part in x)
    ):
        raise ParseError(f"{where}: expected [[anc...], [lsib...]], got {x!r}")
    return State(tuple(x[0]), tuple(x[1]))


def _tid(x: Any, where: str) -> tuple:
    if not isinstance(x, list) or not all(isinstance(s, str) for s in x):
        raise ParseError(f"{where}: expected a list of names, got {x!r}")
    return tuple(x)


def _tuple_rows(rows: Any, arity: int, where: str) -> list:
    if not isinstance(rows, list) or not all(isinstance(r, list) and len(r) == arity for r in rows):
        raise ParseError(f"{where}: expected rows of {arity} entries")
    return rows


def _str(x: Any, where: str) -> str:
    if not isinstance(x, str):
        raise ParseError(f"{where}: expected a string, got {x!r}")
    return x


def load(data: bytes | str) -> Xvpa:
    from .learner import MergeParams

    try:
        doc = json.loads(data)
    except (ValueError, UnicodeDecodeError) as exc:
        raise ParseError(f"not a JSON model: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("model must be a JSON object")
    if doc.get("format_version") != FORMAT_VERSION:
        raise VersionMismatch(f"unsupported format_version {doc.get('format_version')!r}")
    if doc.get("datatypes_version") != DATATYPES_VERSION:
        raise VersionMismatch(f"datatype system {doc.get('datatypes_version')!r} != {DATATYPES_VERSION}")
    for key in ("sigma", "m0", "modules", "finals"):
        if key not in doc:
            raise ParseError(f"missing key {key!r}")
    params = None
    if doc.get("k") is not None or doc.get("l") is not None:
        try:
            params = MergeParams(doc.get("k"), doc.get("l"))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"bad parameters: {exc}") from None
    sigma = doc["sigma"]
    if not isinstance(sigma, list) or not all(isinstance(s, str) for s in sigma):
        raise ParseError("sigma must be a list of names")
    if not isinstance(doc["modules"], list):
        raise ParseError("modules must be a list")
    modules: dict[tuple, Module] = {}
    mu: dict[tuple, str] = {}
    for i, mj in enumerate(doc["modules"]):
        w = f"modules[{i}]"
        if not isinstance(mj, dict):
            raise ParseError(f"{w}: expected an object")
        try:
            tid = _tid(mj["type"], w + ".type")
            states = frozenset(_state(q, w + ".states") for q in mj["states"])
            entry = _state(mj["entry"], w + ".entry")
            exits = frozenset(_state(q, w + ".exits") for q in mj["exits"])
            calls = frozenset(
                (_state(q, w), _str(c, w), _tid(n, w))
                for q, c, n in _tuple_rows(mj["calls"], 3, w + ".calls")
            )
            rets = frozenset(
                (_state(q, w), _state(p, w), _str(c, w), _state(t, w))
                for q, p, c, t in _tuple_rows(mj["returns"], 4, w + ".returns")
            )
            ints = []
            for q, d, t in _tuple_rows(mj["internals"], 3, w + ".internals"):
                try:
                    dt = Datatype(d)
                except ValueError:
                    raise ParseError(f"{w}: unknown datatype {d!r}") from None
                ints.append((_state(q, w), dt, _state(t, w)))
            m_tag = _str(mj["mu"], w + ".mu")
        except (KeyError, TypeError) as exc:
            raise ParseError(f"{w}: malformed module ({exc})") from None
        if tid in modules:
            raise InvalidModel([f"duplicate module {format_type_id(tid)}"])
        modules[tid] = Module(tid, states, entry, exits, calls, rets, frozenset(ints))
        mu[tid] = m_tag
    m0 = _tid(doc["m0"], "m0")
    a = Xvpa(frozenset(sigma), modules, mu, m0, params, DEFAULT)
    problems = check_invariants(a)
    if problems:
        raise InvalidModel(problems)
    finals = frozenset(_state(q, "finals") for q in doc["finals"]) if isinstance(doc["finals"], list) else None
    if finals != a.finals:
        raise InvalidModel(["finals differ from the exits of the start module"])
    return a


# -- DOT --------------------------------------------------------------------

BAR = "̄"


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(a: Xvpa) -> str:
    """Corresponding VPA as a DOT digraph, one cluster per module."""
    lines = ["digraph xvpa {", "  rankdir=LR;", '  node [shape=circle, fontname="Helvetica"];']
    lines.append('  "q0" [shape=point, xlabel="q0"];')
    lines.append('  "qf" [shape=doublecircle, label="qf"];')
    ids = {}
    for i, m in enumerate(sorted(a.modules)):
        mod = a.modules[m]
        lines.append(f"  subgraph cluster_{i} {{")
        lines.append(f"    label={_q(format_type_id(m))};")
        for q in sorted(mod.states):
            ids[q] = format_state(q)
            shape = "doublecircle" if q in mod.exits else "circle"
            lines.append(f"    {_q(ids[q])} [shape={shape}];")
        lines.append("  }")
    edges = []
    root = a.mu[a.m0]
    edges.append(("q0", ids[a.modules[a.m0].entry], f"{root}/q0"))
    for q in sorted(a.finals):
        edges.append((ids[q], "qf", f"{root}{BAR}/q0"))
    for m in sorted(a.modules):
        mod = a.modules[m]
        for q, c, n in sorted(mod.calls):
            edges.append((ids[q], ids[a.modules[n].entry], f"{c}/{ids[q]}"))
        for q, p, c, t in sorted(mod.returns):
            edges.append((ids[q], ids[t], f"{c}{BAR}/{ids[p]}"))
        for q, d, t in sorted(mod.internals, key=lambda e: (e[0], e[1].value, e[2])):
            edges.append((ids[q], ids[t], d.value))
    for s, t, label in sorted(set(edges)):
        lines.append(f"  {_q(s)} -> {_q(t)} [label={_q(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _vppa_name(q: State) -> str:
    return f"({''.join(q.anc) or 'ε'},{''.join(q.lsib) or 'ε'})"


def export_vppa_dot(v, name: str = "vppa") -> str:
    """DOT for a prefix acceptor or merged automaton (before module split)."""
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for q in sorted(v.states):
        shape = "doublecircle" if q in v.finals else "circle"
        lines.append(f"  {_q(_vppa_name(q))} [shape={shape}];")
    edges = set()
    for q, c, t in v.calls:
        edges.add((_vppa_name(q), _vppa_name(t), f"{c}/{_vppa_name(q)}"))
    for q, p, c, t in v.returns:
        edges.add((_vppa_name(q), _vppa_name(t), f"{c}{BAR}/{_vppa_name(p)}"))
    for q, d, t in v.internals:
        edges.add((_vppa_name(q), _vppa_name(t), d.value))
    for s, t, label in sorted(edges):
        lines.append(f"  {_q(s)} -> {_q(t)} [label={_q(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
