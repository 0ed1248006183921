"""Learning an XVPA from example documents.

Pipeline: build the visibly pushdown prefix acceptor (VPPA) of the corpus,
merge states with equal (ancestor, left-sibling) suffixes, split the result
into typed modules with completed returns, then merge equivalent modules.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .automaton import (
    Module,
    State,
    TypeId,
    Xvpa,
    dfa_equivalent,
    format_type_id,
    _module_dfa,
)
from .datatypes import DEFAULT, DatatypeSystem
from .events import Close, Data, Event, Open, TypedEvent, abstract

__all__ = [
    "MergeParams",
    "Vppa",
    "EmptyCorpus",
    "InconsistentRoot",
    "MalformedEvents",
    "ROOT",
    "build_vppa",
    "f_kl",
    "merge",
    "to_xvpa",
    "minimize",
    "infer",
]

TEXT = "$"
ROOT = State((), ())


class EmptyCorpus(ValueError):
    pass


class InconsistentRoot(ValueError):
    pass


class MalformedEvents(ValueError):
    pass


@dataclass(frozen=True)
class MergeParams:
    k: int = 1
    l: int = 2

    def __post_init__(self):
        for name in ("k", "l"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")


def f_kl(q: State, p: MergeParams) -> State:
    return State(q.anc[-p.l :], q.lsib[-p.k :])


@dataclass(frozen=True, eq=False)
class Vppa:
    sigma: frozenset
    states: frozenset
    q0: State
    finals: frozenset
    calls: frozenset  # (q, c, q'); the pushed symbol is q
    returns: frozenset  # (q, p, c, q')
    type_dict: Mapping = field(default_factory=dict)  # (q, q') -> frozenset of minimal datatypes
    dts: DatatypeSystem = field(default=DEFAULT, repr=False)

    @property
    def internals(self) -> frozenset:
        out = set()
        for (q, t), types in self.type_dict.items():
            for d in self.dts.cl_inverse(types):
                out.add((q, d, t))
        return frozenset(out)

    def transition_count(self) -> int:
        return len(self.calls) + len(self.returns) + len(self.internals)


def _ident(q: State) -> State:
    return q


def build_vppa(
    corpus: Iterable[Iterable[Event | TypedEvent]],
    dts: DatatypeSystem | None = None,
    *,
    params: MergeParams | None = None,
    trim: bool = True,
) -> Vppa:
    """Prefix acceptor of ``corpus``.

    With ``params`` the states are created directly as their f_kl images,
    which yields the merged automaton in one pass.
    """
    dts = dts or DEFAULT
    fold = _ident if params is None else (lambda q: f_kl(q, params))
    sigma: set[str] = set()
    states: set[State] = {ROOT}
    finals: set[State] = set()
    calls: set = set()
    returns: set = set()
    type_dict: dict[tuple[State, State], frozenset] = {}
    n_docs = 0
    for doc_no, doc in enumerate(corpus, 1):
        n_docs += 1
        q = ROOT
        stack: list[State] = []
        pos = 0
        for ev in abstract(doc, dts, trim=trim):
            pos += 1
            t = type(ev)
            if t is Open:
                if not stack and q != ROOT:
                    raise MalformedEvents(f"document {doc_no}: second root element at event {pos}")
                c = ev.name
                sigma.add(c)
                nxt = fold(State(q.anc + (c,), ()))
                calls.add((q, c, nxt))
                stack.append(q)
            elif t is Close:
                c = ev.name
                if not stack or q.anc[-1] != c:
                    raise MalformedEvents(f"document {doc_no}: unmatched </{c}> at event {pos}")
                p = stack.pop()
                nxt = fold(State(p.anc, p.lsib + (c,)))
                returns.add((q, p, c, nxt))
            elif t is Data:
                if not stack:
                    raise MalformedEvents(f"document {doc_no}: text outside the root at event {pos}")
                if q.lsib[-1:] == (TEXT,):
                    raise MalformedEvents(f"document {doc_no}: adjacent text data at event {pos}")
                nxt = fold(State(q.anc, q.lsib + (TEXT,)))
                key = (q, nxt)
                type_dict[key] = type_dict.get(key, frozenset()) | ev.types
            else:
                raise MalformedEvents(f"document {doc_no}: unsupported event {ev!r}")
            states.add(nxt)
            q = nxt
        if q == ROOT:
            raise MalformedEvents(f"document {doc_no}: empty document")
        if stack:
            raise MalformedEvents(f"document {doc_no}: {len(stack)} unclosed element(s)")
        finals.add(q)
    if n_docs == 0:
        raise EmptyCorpus("no documents to learn from")
    return Vppa(
        frozenset(sigma),
        frozenset(states),
        ROOT,
        frozenset(finals),
        frozenset(calls),
        frozenset(returns),
        type_dict,
        dts,
    )


def merge(v: Vppa, p: MergeParams) -> Vppa:
    """Quotient of ``v`` under equal f_kl images."""

    def f(q):
        return f_kl(q, p)

    type_dict: dict[tuple[State, State], frozenset] = {}
    for (q, t), types in v.type_dict.items():
        key = (f(q), f(t))
        type_dict[key] = type_dict.get(key, frozenset()) | types
    return Vppa(
        v.sigma,
        frozenset(map(f, v.states)),
        f(v.q0),
        frozenset(map(f, v.finals)),
        frozenset((f(q), c, f(t)) for q, c, t in v.calls),
        frozenset((f(q), f(s), c, f(t)) for q, s, c, t in v.returns),
        type_dict,
        v.dts,
    )


def to_xvpa(v: Vppa, params: MergeParams | None = None) -> Xvpa:
    """Split a merged automaton into typed modules and complete the returns."""
    roots = sorted({t.anc for q, _, t in v.calls if q == v.q0})
    if len(roots) != 1:
        names = ", ".join(format_type_id(r) for r in roots)
        raise InconsistentRoot(f"corpus has {len(roots)} root types: {names}")
    m0 = roots[0]

    by_module: dict[TypeId, set[State]] = {}
    for q in v.states:
        if q.anc:
            by_module.setdefault(q.anc, set()).add(q)
    exits: dict[TypeId, set[State]] = {m: set() for m in by_module}
    shapes: dict[TypeId, set[tuple]] = {m: set() for m in by_module}
    for q, s, c, t in v.returns:
        exits[q.anc].add(q)
        if s != v.q0:
            shapes[q.anc].add((s, c, t))
    calls: dict[TypeId, set[tuple]] = {m: set() for m in by_module}
    for q, c, t in v.calls:
        if q != v.q0:
            calls[q.anc].add((q, c, t.anc))
    internals: dict[TypeId, set[tuple]] = {m: set() for m in by_module}
    for q, d, t in v.internals:
        internals[q.anc].add((q, d, t))

    modules = {}
    for m, states in by_module.items():
        rets = frozenset((x, s, c, t) for x in exits[m] for s, c, t in shapes[m])
        modules[m] = Module(
            m,
            frozenset(states),
            State(m, ()),
            frozenset(exits[m]),
            frozenset(calls[m]),
            rets,
            frozenset(internals[m]),
        )
    mu = {m: m[-1] for m in modules}
    return Xvpa(v.sigma, modules, mu, m0, params, v.dts)


def _merge_modules(a: Xvpa, keep: TypeId, drop: TypeId) -> Xvpa:
    mods = dict(a.modules)
    gone = mods.pop(drop)
    moved = {(s, c, t) for _, s, c, t in gone.returns if s not in gone.states}
    new = {}
    for m, mod in mods.items():
        calls = frozenset((q, c, keep if n == drop else n) for q, c, n in mod.calls)
        rets = {r for r in mod.returns if r[1] not in gone.states and r[3] not in gone.states}
        if m == keep:
            rets |= {(x, s, c, t) for x in mod.exits for s, c, t in moved}
        new[m] = Module(m, mod.states, mod.entry, mod.exits, calls, frozenset(rets), mod.internals)
    m0 = keep if a.m0 == drop else a.m0
    # drop modules no longer reachable from the start type
    seen = {m0}
    todo = [m0]
    while todo:
        for _, _, n in new[todo.pop()].calls:
            if n not in seen:
                seen.add(n)
                todo.append(n)
    live_states = set()
    for m in seen:
        live_states |= new[m].states
    out = {}
    for m in seen:
        mod = new[m]
        rets = frozenset(r for r in mod.returns if r[1] in live_states)
        out[m] = Module(m, mod.states, mod.entry, mod.exits, mod.calls, rets, mod.internals)
    return Xvpa(a.sigma, out, {m: a.mu[m] for m in out}, m0, a.params, a.dts)


def minimize(a: Xvpa) -> Xvpa:
    """Merge modules with the same tag and equivalent module DFAs until none remain."""
    while True:
        ids = sorted(a.modules)
        dfas = {m: _module_dfa(a, m) for m in ids}
        pair = None
        for i, m in enumerate(ids):
            for n in ids[i + 1 :]:
                if a.mu[m] == a.mu[n] and dfa_equivalent(dfas[m], dfas[n]):
                    pair = (m, n)
                    break
            if pair:
                break
        if pair is None:
            return a
        a = _merge_modules(a, *pair)


def infer(
    corpus: Iterable[Iterable[Event | TypedEvent]],
    dts: DatatypeSystem | None = None,
    params: MergeParams | None = None,
    *,
    combined: bool = True,
    trim: bool = True,
) -> Xvpa:
    params = params or MergeParams()
    if combined:
        v = build_vppa(corpus, dts, params=params, trim=trim)
    else:
        v = merge(build_vppa(corpus, dts, trim=trim), params)
    return minimize(to_xvpa(v, params))
