"""XML visibly pushdown automata (XVPA) and their streaming execution.

An XVPA is a set of typed modules.  Each module has one entry state, a set of
exit states, and call / return / internal transitions; the stack alphabet is
the state set.  A document is run on the corresponding VPA, which adds the
wrapper states ``q0`` (push on the root open-tag) and ``qf`` (reached by the
root close-tag from a final exit).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Hashable, Iterable, Mapping, NamedTuple

from .datatypes import DEFAULT, Datatype, DatatypeSystem
from .events import Close, Data, Open, XmlInputError, describe

if TYPE_CHECKING:
    from .learner import MergeParams

__all__ = [
    "State",
    "TypeId",
    "Module",
    "Xvpa",
    "Anomaly",
    "Verdict",
    "RunStats",
    "MissingReturn",
    "Dfa",
    "SingleExitRequired",
    "EXISTENTIAL",
    "FIRST_TYPE_STRICT",
    "validate",
    "check_single_exit",
    "check_invariants",
    "is_deterministic",
    "module_dfa",
    "dfa_equivalent",
    "format_type_id",
    "format_state",
]

EXISTENTIAL = "existential"
FIRST_TYPE_STRICT = "first_type_strict"

STRUCTURAL = "structural"
DATATYPE = "datatype"
MALFORMED = "malformed"

TypeId = tuple  # tuple[str, ...]: the ancestor suffix naming a module


class State(NamedTuple):
    """A state as (ancestor suffix, left-sibling suffix); ``"$"`` marks content."""

    anc: tuple
    lsib: tuple

    @property
    def owner(self) -> TypeId:
        return self.anc


ModuleState = State
Call = tuple  # (from State, tag, to TypeId)
Return = tuple  # (from State, stack State, tag, to State)
Internal = tuple  # (from State, Datatype, to State)


def format_type_id(m: TypeId) -> str:
    return "/".join(m) if m else "ε"


def format_state(q: State) -> str:
    """``lsib_module`` rendering, e.g. ``b_a`` or ``ε_aa``."""
    lsib = "".join(q.lsib) if all(len(s) == 1 for s in q.lsib) else ".".join(q.lsib)
    return f"{lsib or 'ε'}_{format_type_id(q.anc)}"


@dataclass(frozen=True)
class Module:
    type_id: TypeId
    states: frozenset
    entry: State
    exits: frozenset
    calls: frozenset = frozenset()
    returns: frozenset = frozenset()
    internals: frozenset = frozenset()


@dataclass(frozen=True, eq=False)
class Xvpa:
    sigma: frozenset
    modules: Mapping[TypeId, Module]
    mu: Mapping[TypeId, str]
    m0: TypeId
    params: "MergeParams | None" = None
    dts: DatatypeSystem = field(default=DEFAULT, repr=False)

    @property
    def finals(self) -> frozenset:
        return self.modules[self.m0].exits

    @property
    def states(self) -> frozenset:
        out: set = set()
        for mod in self.modules.values():
            out |= mod.states
        return frozenset(out)

    def owner_of(self, q: State) -> Module | None:
        for mod in self.modules.values():
            if q in mod.states:
                return mod
        return None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Xvpa):
            return NotImplemented
        return (
            self.sigma == other.sigma
            and dict(self.modules) == dict(other.modules)
            and dict(self.mu) == dict(other.mu)
            and self.m0 == other.m0
        )

    __hash__ = None  # type: ignore[assignment]

    @cached_property
    def _tables(self) -> "_Tables":
        return _Tables(self)

    def validate(self, events: Iterable, mode: str = EXISTENTIAL, stats: "RunStats | None" = None) -> "Verdict":
        return validate(self, events, mode, stats)


@dataclass(frozen=True)
class Anomaly:
    position: int  # 1-based event index
    category: str
    observed: str
    expected: frozenset

    def __str__(self) -> str:
        exp = ", ".join(sorted(describe(s) for s in self.expected)) or "nothing"
        return f"{self.category} anomaly at event {self.position}: got {self.observed}, expected {exp}"


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    anomalies: tuple = ()

    @property
    def category(self) -> str | None:
        return self.anomalies[0].category if self.anomalies else None


@dataclass
class RunStats:
    steps: int = 0
    max_stack: int = 0


_Q0 = 0
_QF = 1


class _Tables:
    """Integer-indexed transition tables of the corresponding VPA."""

    def __init__(self, a: Xvpa):
        index: dict[State, int] = {}
        for m in sorted(a.modules):
            for q in sorted(a.modules[m].states):
                index[q] = len(index) + 2
        self.index = index
        self.names: list[object] = ["q0", "qf"] + list(index)
        self.close_tag: list[str | None] = [None, None] + [a.mu.get(q.anc) for q in index]
        self.calls: dict[tuple[int, str], int] = {}
        self.returns: dict[tuple[int, int, str], int] = {}
        self.internals: dict[int, dict[Datatype, int]] = {}
        self.call_tags: dict[int, set[str]] = {}
        self.return_tags: dict[tuple[int, int], set[str]] = {}
        rank = {d: i for i, d in enumerate(a.dts.canonical_order)}
        for mod in a.modules.values():
            for q, c, n in mod.calls:
                if n in a.modules:
                    s = index[q]
                    self.calls[(s, c)] = index[a.modules[n].entry]
                    self.call_tags.setdefault(s, set()).add(c)
            for q, p, c, t in mod.returns:
                if p in index and t in index:
                    key = (index[q], index[p])
                    self.returns[key + (c,)] = index[t]
                    self.return_tags.setdefault(key, set()).add(c)
            for q, d, t in sorted(mod.internals, key=lambda e: rank[e[1]]):
                self.internals.setdefault(index[q], {}).setdefault(d, index[t])
        root = a.mu[a.m0]
        self.calls[(_Q0, root)] = index[a.modules[a.m0].entry]
        self.call_tags[_Q0] = {root}
        for q in a.finals:
            key = (index[q], _Q0)
            self.returns[key + (root,)] = _QF
            self.return_tags.setdefault(key, set()).add(root)
        self.sigma = a.sigma
        self.dts = a.dts

    def expected(self, state: int, top: int | None) -> frozenset:
        out: set = {Open(c) for c in self.call_tags.get(state, ())}
        out.update(self.internals.get(state, {}))
        if top is not None:
            out.update(Close(c) for c in self.return_tags.get((state, top), ()))
        return frozenset(out)


def _fail(pos: int, category: str, observed: str, expected: frozenset = frozenset()) -> Verdict:
    return Verdict(False, (Anomaly(pos, category, observed, expected),))


def validate(
    a: Xvpa, events: Iterable, mode: str = EXISTENTIAL, stats: RunStats | None = None
) -> Verdict:
    """Run a typed event stream through the corresponding VPA.

    Stops at the first missing transition.  Input errors raised by a lazy
    event source are reported as malformed anomalies.
    """
    if mode not in (EXISTENTIAL, FIRST_TYPE_STRICT):
        raise ValueError(f"unknown validation mode {mode!r}")
    strict = mode == FIRST_TYPE_STRICT
    tb = a._tables
    calls = tb.calls
    returns = tb.returns
    internals = tb.internals
    close_tag = tb.close_tag
    first = tb.dts.first
    state = _Q0
    stack: list[int] = []
    pos = 0
    max_stack = 0
    it = iter(events)
    try:
        for ev in it:
            pos += 1
            t = type(ev)
            if state == _QF:
                return _fail(pos, MALFORMED, f"{describe(ev)} after end of document")
            if t is Open:
                nxt = calls.get((state, ev.name))
                if nxt is None:
                    if ev.name not in tb.sigma:
                        # names never seen in training get no suggestions
                        return _fail(pos, STRUCTURAL, describe(ev))
                    return _fail(pos, STRUCTURAL, describe(ev), tb.expected(state, stack[-1] if stack else None))
                stack.append(state)
                if len(stack) > max_stack:
                    max_stack = len(stack)
                state = nxt
            elif t is Close:
                if not stack or close_tag[state] != ev.name:
                    return _fail(pos, MALFORMED, f"{describe(ev)} does not close the open element")
                top = stack[-1]
                nxt = returns.get((state, top, ev.name))
                if nxt is None:
                    return _fail(pos, STRUCTURAL, describe(ev), tb.expected(state, top))
                stack.pop()
                state = nxt
            elif t is Data:
                edges = internals.get(state)
                nxt = None
                if edges:
                    if strict:
                        nxt = edges.get(first(ev.types))
                    else:
                        for d in ev.types:
                            hit = edges.get(d)
                            if hit is not None:
                                nxt = hit
                                break
                if nxt is None:
                    category = DATATYPE if edges else STRUCTURAL
                    if state == _Q0:
                        category = MALFORMED
                    return _fail(pos, category, describe(ev), tb.expected(state, stack[-1] if stack else None))
                state = nxt
            else:
                return _fail(pos, MALFORMED, f"unsupported event {ev!r}")
    except XmlInputError as exc:
        return _fail(pos + 1, MALFORMED, str(exc))
    finally:
        if stats is not None:
            stats.steps += pos
            stats.max_stack = max(stats.max_stack, max_stack)
    if state != _QF:
        if pos == 0:
            return _fail(1, MALFORMED, "empty document")
        return _fail(pos + 1, MALFORMED, "end of input inside an open element")
    return Verdict(True)


# -- structural checks ------------------------------------------------------


class MissingReturn(NamedTuple):
    exit: State
    stack: State
    tag: str
    target: State

    def __str__(self) -> str:
        return (
            f"exit {format_state(self.exit)} lacks return "
            f"{self.tag}̄/{format_state(self.stack)} -> {format_state(self.target)}"
        )


def check_single_exit(a: Xvpa) -> list[MissingReturn]:
    violations = []
    for m in sorted(a.modules):
        mod = a.modules[m]
        have = {(q, p, c, t) for q, p, c, t in mod.returns}
        shapes = sorted({(p, c, t) for _, p, c, t in mod.returns})
        for x in sorted(mod.exits):
            for p, c, t in shapes:
                if (x, p, c, t) not in have:
                    violations.append(MissingReturn(x, p, c, t))
    return violations


def is_deterministic(a: Xvpa) -> bool:
    seen: dict = {}
    for mod in a.modules.values():
        for q, c, n in mod.calls:
            if seen.setdefault(("c", q, c), n) != n:
                return False
        for q, d, t in mod.internals:
            if seen.setdefault(("i", q, d), t) != t:
                return False
        for q, p, c, t in mod.returns:
            if seen.setdefault(("r", q, p, c), t) != t:
                return False
    return True


def check_invariants(a: Xvpa) -> list[str]:
    """All structural problems that make ``a`` an invalid model."""
    problems: list[str] = []
    if a.m0 not in a.modules:
        return [f"start type {format_type_id(a.m0)} has no module"]
    if set(a.mu) != set(a.modules):
        problems.append("mu must map exactly the module type ids")
    owners: dict[State, TypeId] = {}
    for m, mod in a.modules.items():
        if mod.type_id != m:
            problems.append(f"module key {format_type_id(m)} != type id {format_type_id(mod.type_id)}")
        if mod.entry not in mod.states:
            problems.append(f"entry of {format_type_id(m)} is not one of its states")
        if not mod.exits <= mod.states:
            problems.append(f"exits of {format_type_id(m)} are not module states")
        for q in mod.states:
            if q in owners:
                problems.append(f"state {format_state(q)} belongs to two modules")
            owners[q] = m
    all_states = set(owners)
    for m, mod in a.modules.items():
        for q, c, n in mod.calls:
            if q not in mod.states:
                problems.append(f"call from foreign state {format_state(q)} in {format_type_id(m)}")
            if n not in a.modules:
                problems.append(f"call to unknown module {format_type_id(n)}")
            elif a.mu[n] != c:
                problems.append(f"call on {c} reaches module {format_type_id(n)} of tag {a.mu[n]}")
            if c not in a.sigma:
                problems.append(f"call tag {c} not in sigma")
        for q, p, c, t in mod.returns:
            if q not in mod.exits:
                problems.append(f"return from non-exit {format_state(q)}")
            if p not in all_states or t not in all_states:
                problems.append(f"return {format_state(q)} references unknown states")
            elif owners[p] != owners[t]:
                problems.append(f"return to {format_state(t)} leaves the caller module")
            if a.mu.get(m) != c:
                problems.append(f"module {format_type_id(m)} returns on {c}")
        for q, d, t in mod.internals:
            if q not in mod.states or t not in mod.states:
                problems.append(f"internal edge {format_state(q)} -{d}-> leaves its module")
    if problems:
        return problems
    returning = {q for mod in a.modules.values() for q, *_ in mod.returns} | set(a.finals)
    for mod in a.modules.values():
        for x in mod.exits:
            if x not in returning:
                problems.append(f"exit {format_state(x)} has no return")
    if not is_deterministic(a):
        problems.append("automaton is not deterministic")
    problems.extend(str(v) for v in check_single_exit(a))
    return problems


# -- module DFAs ------------------------------------------------------------


class SingleExitRequired(ValueError):
    pass


@dataclass(frozen=True)
class Dfa:
    """Partial DFA; missing edges lead to an implicit dead state."""

    states: frozenset
    start: Hashable
    accepting: frozenset
    edges: Mapping[tuple, Hashable]  # (state, symbol) -> state

    @property
    def alphabet(self) -> frozenset:
        return frozenset(sym for _, sym in self.edges)


def module_dfa(a: Xvpa, m: TypeId) -> Dfa:
    """Intermediate DFA of module ``m`` over type ids and datatypes.

    A call into module ``n`` followed by its return is a single ``n`` edge.
    """
    violations = check_single_exit(a)
    if violations:
        raise SingleExitRequired("; ".join(map(str, violations)))
    return _module_dfa(a, m)


def _module_dfa(a: Xvpa, m: TypeId) -> Dfa:
    mod = a.modules[m]
    back: dict[tuple[State, TypeId], State] = {}
    for n, callee in a.modules.items():
        for _, p, _c, t in callee.returns:
            back[(p, n)] = t
    edges: dict[tuple, Hashable] = {}
    for q, d, t in mod.internals:
        edges[(q, d)] = t
    for q, _c, n in mod.calls:
        t = back.get((q, n))
        if t is not None:
            edges[(q, n)] = t
    return Dfa(mod.states, mod.entry, mod.exits, edges)


def dfa_equivalent(d1: Dfa, d2: Dfa) -> bool:
    """Hopcroft-Karp language equivalence with union-find."""
    dead = object()
    parent: dict = {}

    def find(x):
        root = x
        while parent.get(root, root) is not root:
            root = parent[root]
        while parent.get(x, x) is not root:
            parent[x], x = root, parent[x]
        return root

    def node(side, q):
        return dead if q is None else (side, q)

    def accepting(n):
        if n is dead:
            return False
        side, q = n
        return q in (d1.accepting if side == 1 else d2.accepting)

    def step(n, sym):
        if n is dead:
            return dead
        side, q = n
        dfa = d1 if side == 1 else d2
        return node(side, dfa.edges.get((q, sym)))

    alphabet = sorted(d1.alphabet | d2.alphabet, key=repr)
    start = (node(1, d1.start), node(2, d2.start))
    todo = [start]
    parent[start[1]] = start[0]
    while todo:
        x, y = todo.pop()
        if accepting(x) != accepting(y):
            return False
        for sym in alphabet:
            nx, ny = step(x, sym), step(y, sym)
            rx, ry = find(nx), find(ny)
            if rx is not ry and rx != ry:
                parent[ry] = rx
                todo.append((nx, ny))
    return True
