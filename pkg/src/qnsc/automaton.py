"""Deterministic generators and the language operations on them.

A :class:`Generator` stores its transition function as a dense ``int32``
table indexed by (state, event), ``-1`` marking undefined entries. Events are
kept sorted by name so two generators over the same alphabet share columns.
State labels are arbitrary hashable objects; composite operations build tuple
labels such as ``(plant_state, spec_state)`` or ``(state, counter)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Any, Hashable, Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .errors import (
    AlphabetMismatchError,
    NondeterminismError,
    StructureError,
    UnknownReferenceError,
)

DUMP = "⊥"


@dataclass(frozen=True, order=True)
class Event:
    name: str
    controllable: bool = True

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name or any(c.isspace() for c in self.name):
            raise StructureError(f"invalid event name {self.name!r}")


def label_sort_key(label: Any):
    """Natural ordering for state labels: numbers numerically, then the rest."""
    if isinstance(label, (int, np.integer)) and not isinstance(label, bool):
        return (0, int(label), "")
    if isinstance(label, str):
        if label.isdigit():
            return (0, int(label), label)
        return (1, 0, label)
    if isinstance(label, tuple):
        return (2, 0, tuple(label_sort_key(x) for x in label))
    return (3, 0, repr(label))


@dataclass(frozen=True, eq=False)
class Generator:
    """Immutable deterministic generator.

    ``delta[i, j]`` is the successor of state ``i`` under ``events[j]`` or -1.
    The empty generator has no states and ``initial == -1``.
    """

    events: tuple[Event, ...]
    states: tuple[Hashable, ...]
    delta: np.ndarray
    initial: int
    marked: np.ndarray

    def __post_init__(self):
        delta = np.ascontiguousarray(self.delta, dtype=np.int32).reshape(len(self.states), len(self.events))
        marked = np.ascontiguousarray(self.marked, dtype=bool).reshape(len(self.states))
        delta.flags.writeable = False
        marked.flags.writeable = False
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "marked", marked)
        object.__setattr__(self, "initial", int(self.initial))

    # -- basic views -------------------------------------------------------

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_events(self) -> int:
        return len(self.events)

    @property
    def n_transitions(self) -> int:
        return int(np.count_nonzero(self.delta >= 0))

    @property
    def is_empty(self) -> bool:
        return self.initial < 0

    @property
    def event_names(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.events)

    @cached_property
    def uncontrollable_mask(self) -> np.ndarray:
        return np.array([not e.controllable for e in self.events], dtype=bool)

    @cached_property
    def event_index(self) -> dict[str, int]:
        return {e.name: i for i, e in enumerate(self.events)}

    @cached_property
    def state_index(self) -> dict[Hashable, int]:
        return {s: i for i, s in enumerate(self.states)}

    @property
    def initial_state(self):
        return None if self.initial < 0 else self.states[self.initial]

    @property
    def marked_states(self) -> frozenset:
        return frozenset(self.states[i] for i in np.flatnonzero(self.marked))

    def transitions(self):
        """Yield ``(src, event_name, dst)`` label triples in (state, event) order."""
        src, ev = np.nonzero(self.delta >= 0)
        for i, j in zip(src.tolist(), ev.tolist()):
            yield self.states[i], self.events[j].name, self.states[int(self.delta[i, j])]

    def successor(self, state, event: str):
        j = self.delta[self.state_index[state], self.event_index[event]]
        return None if j < 0 else self.states[j]

    def run_index(self, word: Iterable[str], start: int | None = None) -> int:
        """Index reached by ``word`` from ``start`` (default: initial), or -1."""
        x = self.initial if start is None else start
        idx = self.event_index
        for name in word:
            if x < 0:
                return -1
            j = idx.get(name)
            if j is None:
                return -1
            x = int(self.delta[x, j])
        return x

    def run(self, word: Iterable[str], start=None):
        """State label reached by ``word``, or ``None`` if the run dies.

        A plain string is read as a sequence of one-character event names.
        """
        s = None if start is None else self.state_index[start]
        x = self.run_index(word, s)
        return None if x < 0 else self.states[x]

    def accepts(self, word: Iterable[str]) -> bool:
        x = self.run_index(word)
        return x >= 0 and bool(self.marked[x])

    def admits(self, word: Iterable[str]) -> bool:
        """Membership in the closed behaviour."""
        return self.run_index(word) >= 0

    def __repr__(self):
        return (f"Generator(states={self.n_states}, events={list(self.event_names)}, "
                f"transitions={self.n_transitions}, marked={int(self.marked.sum())})")


# ---------------------------------------------------------------------------
# construction


def _normalize_events(events) -> tuple[Event, ...]:
    out = []
    for e in events:
        if isinstance(e, Event):
            out.append(e)
        elif isinstance(e, str):
            out.append(Event(e))
        else:
            name, ctrl = e
            if isinstance(ctrl, str):
                if ctrl not in ("c", "u"):
                    raise StructureError(f"controllability of {name!r} must be 'c' or 'u'")
                ctrl = ctrl == "c"
            out.append(Event(name, bool(ctrl)))
    names = [e.name for e in out]
    if len(set(names)) != len(names):
        dup = sorted({n for n in names if names.count(n) > 1})
        raise StructureError(f"duplicate event name(s): {', '.join(dup)}")
    return tuple(sorted(out, key=lambda e: e.name))


def empty(events: Iterable = ()) -> Generator:
    """The zero-state generator (empty language) over ``events``."""
    ev = _normalize_events(events)
    return Generator(ev, (), np.empty((0, len(ev)), np.int32), -1, np.empty(0, bool))


def validate(description: Mapping[str, Any]) -> Generator:
    """Build a :class:`Generator` from a raw description.

    Keys: ``alphabet`` (``Event`` objects, names, or ``(name, 'c'|'u')``
    pairs), ``states``, ``initial``, ``marked`` and ``transitions`` (triples
    ``(src, event, dst)``). An optional ``positions`` list gives a source
    location per transition for error messages.
    """
    events = _normalize_events(description.get("alphabet", ()))
    states = list(description.get("states", ()))
    if len(set(states)) != len(states):
        raise StructureError("duplicate state identifiers")
    index = {s: i for i, s in enumerate(states)}
    eindex = {e.name: j for j, e in enumerate(events)}
    initial = description.get("initial")
    marked = list(description.get("marked", ()))
    transitions = list(description.get("transitions", ()))
    positions = description.get("positions") or [None] * len(transitions)

    if not states:
        if initial is not None:
            raise UnknownReferenceError(f"initial state {initial!r} is not declared")
        if marked:
            raise UnknownReferenceError(f"marked state {marked[0]!r} is not declared")
        if transitions:
            raise UnknownReferenceError(f"transition from {transitions[0][0]!r} references undeclared states")
        return empty(events)
    if initial is None:
        raise StructureError("a nonempty generator needs an initial state")
    if initial not in index:
        raise UnknownReferenceError(f"initial state {initial!r} is not declared")

    delta = np.full((len(states), len(events)), -1, np.int32)
    for (src, ev, dst), pos in zip(transitions, positions):
        line, col = pos if pos else (None, None)
        for s in (src, dst):
            if s not in index:
                raise UnknownReferenceError(f"unknown state {s!r}", line, col)
        if ev not in eindex:
            raise UnknownReferenceError(f"unknown event {ev!r}", line, col)
        i, j, k = index[src], eindex[ev], index[dst]
        if delta[i, j] >= 0 and delta[i, j] != k:
            raise NondeterminismError(
                f"state {src!r} has two successors under {ev!r}: "
                f"{states[delta[i, j]]!r} and {dst!r}", line, col)
        delta[i, j] = k
    mask = np.zeros(len(states), bool)
    for s in marked:
        if s not in index:
            raise UnknownReferenceError(f"marked state {s!r} is not declared")
        mask[index[s]] = True
    return Generator(events, tuple(states), delta, index[initial], mask)


def make_generator(
    transitions: Iterable[Sequence] = (),
    *,
    initial=None,
    marked: Iterable = (),
    states: Iterable | None = None,
    events: Iterable | None = None,
    uncontrollable: Iterable[str] = (),
) -> Generator:
    """Convenience constructor.

    States default to those mentioned (initial first, then in order of
    appearance); events default to those used by ``transitions``. Event names
    in ``uncontrollable`` are made uncontrollable unless ``events`` already
    carries :class:`Event` objects.
    """
    transitions = [tuple(t) for t in transitions]
    marked = list(marked)
    if states is None:
        seen = {}
        if initial is not None:
            seen[initial] = None
        for s, _, d in transitions:
            seen.setdefault(s)
            seen.setdefault(d)
        for s in marked:
            seen.setdefault(s)
        states = list(seen)
    if events is None:
        events = sorted({t[1] for t in transitions})
    unc = set(uncontrollable)
    evs = [e if isinstance(e, (Event, tuple)) else Event(e, e not in unc) for e in events]
    if initial is None and states:
        states = list(states)
        initial = states[0]
    return validate({"alphabet": evs, "states": states, "initial": initial,
                     "marked": marked, "transitions": transitions})


def with_marked(g: Generator, marked: np.ndarray) -> Generator:
    return Generator(g.events, g.states, g.delta, g.initial, np.asarray(marked, bool))


def mark_all(g: Generator) -> Generator:
    return with_marked(g, np.ones(g.n_states, bool))


def relabel(g: Generator, labels: Sequence[Hashable]) -> Generator:
    return Generator(g.events, tuple(labels), g.delta, g.initial, g.marked)


def subgenerator(g: Generator, keep: np.ndarray) -> tuple[Generator, np.ndarray]:
    """Restriction of ``g`` to the states in the boolean mask ``keep``.

    Returns the new generator and, for each of its states, the index in ``g``.
    If the initial state is dropped the result is the empty generator.
    """
    keep = np.asarray(keep, bool)
    if g.initial < 0 or not keep[g.initial]:
        return empty(g.events), np.empty(0, np.int64)
    kept = np.flatnonzero(keep)
    remap = np.full(g.n_states + 1, -1, np.int64)
    remap[kept] = np.arange(kept.size)
    # index -1 picks the trailing sentinel
    delta = remap[g.delta[kept]].astype(np.int32)
    states = tuple(g.states[i] for i in kept.tolist())
    return Generator(g.events, states, delta, int(remap[g.initial]), g.marked[kept]), kept


# ---------------------------------------------------------------------------
# reachability


def reachable_mask(g: Generator) -> np.ndarray:
    return kernels.forward_reach(g.delta, g.initial)


def coreachable_mask(g: Generator) -> np.ndarray:
    return kernels.backward_reach(g.delta, g.marked)


def reachable(g: Generator) -> frozenset:
    return frozenset(g.states[i] for i in np.flatnonzero(reachable_mask(g)))


def coreachable(g: Generator) -> frozenset:
    return frozenset(g.states[i] for i in np.flatnonzero(coreachable_mask(g)))


def trim_indexed(g: Generator) -> tuple[Generator, np.ndarray]:
    if g.is_empty:
        return g, np.empty(0, np.int64)
    keep = reachable_mask(g) & coreachable_mask(g)
    if keep.all():
        return g, np.arange(g.n_states)
    return subgenerator(g, keep)


def trim(g: Generator) -> Generator:
    """Keep only reachable and coreachable states (empty if the initial state goes)."""
    return trim_indexed(g)[0]


def accessible(g: Generator) -> Generator:
    if g.is_empty:
        return g
    keep = reachable_mask(g)
    return g if keep.all() else subgenerator(g, keep)[0]


def is_trim(g: Generator) -> bool:
    if g.is_empty:
        return g.n_states == 0
    return bool((reachable_mask(g) & coreachable_mask(g)).all())


def is_nonblocking(g: Generator):
    """Nonblocking verdict; witnesses are reachable states that cannot reach a marker.

    One witness is reported per terminal strongly connected component of the
    blocking region (the deadlocks and livelocks the system can end up in),
    each with its shortlex-least access string.
    """
    from .analysis import blocking_witnesses
    from .verdict import Verdict

    ws = blocking_witnesses(g)
    return Verdict(not ws, tuple(ws))


# ---------------------------------------------------------------------------
# binary operations


def check_alphabets(a: Generator, b: Generator) -> None:
    if a.events == b.events:
        return
    na, nb = set(a.event_names), set(b.event_names)
    if na != nb:
        raise AlphabetMismatchError(
            f"alphabets differ: only in first {sorted(na - nb)}, only in second {sorted(nb - na)}")
    clash = sorted(e.name for e, f in zip(a.events, b.events) if e.controllable != f.controllable)
    raise AlphabetMismatchError(f"controllability differs for event(s) {clash}")


def product_indexed(a: Generator, b: Generator):
    """Reachable synchronous product plus component index arrays ``(pa, pb)``."""
    check_alphabets(a, b)
    if a.is_empty or b.is_empty:
        return empty(a.events), np.empty(0, np.int64), np.empty(0, np.int64)
    pa, pb, trans = kernels.pair_product(a.delta, b.delta, a.initial, b.initial)
    sa, sb = a.states, b.states
    labels = tuple(zip([sa[i] for i in pa.tolist()], [sb[i] for i in pb.tolist()]))
    g = Generator(a.events, labels, trans, 0, a.marked[pa] & b.marked[pb])
    return g, pa, pb


def product(a: Generator, b: Generator) -> Generator:
    """Reachable part of the synchronous product; states are ``(a_state, b_state)``."""
    return product_indexed(a, b)[0]


def _fresh_dump(states) -> str:
    label, taken = DUMP, set(states)
    while label in taken:
        label += "'"
    return label


def totalize(g: Generator) -> Generator:
    """Add a dump state absorbing every undefined transition (marking unchanged)."""
    n, m = g.n_states, g.n_events
    delta = np.full((n + 1, m), n, np.int32)
    delta[:n] = np.where(g.delta >= 0, g.delta, n)
    init = n if g.initial < 0 else g.initial
    marked = np.append(g.marked, False)
    return Generator(g.events, g.states + (_fresh_dump(g.states),), delta, init, marked)


def complement(a: Generator) -> Generator:
    """Generator marking exactly the strings not marked by ``a``."""
    t = totalize(a)
    return with_marked(t, ~t.marked)


def union_marked(a: Generator, b: Generator) -> Generator:
    """Deterministic generator with ``L_m = L_m(a) | L_m(b)`` (De Morgan, then trim)."""
    check_alphabets(a, b)
    return trim(complement(product(complement(a), complement(b))))


@dataclass(frozen=True)
class Comparison:
    """Outcome of :func:`marked_language_compare`.

    ``only_in_a`` / ``only_in_b`` are shortlex-least strings separating the
    languages (``None`` when there is none).
    """

    relation: str
    only_in_a: tuple[str, ...] | None = None
    only_in_b: tuple[str, ...] | None = None

    @property
    def equal(self) -> bool:
        return self.relation == "equal"

    @property
    def a_le_b(self) -> bool:
        return self.only_in_a is None

    @property
    def witness(self):
        return self.only_in_a if self.only_in_a is not None else self.only_in_b


def _access_word(parent, via, names, node) -> tuple[str, ...]:
    word = []
    while parent[node] >= 0:
        word.append(names[via[node]])
        node = parent[node]
    return tuple(reversed(word))


def marked_language_compare(a: Generator, b: Generator) -> Comparison:
    """Compare ``L_m(a)`` and ``L_m(b)`` by a synchronized walk over dump-completed copies."""
    check_alphabets(a, b)
    ta, tb = totalize(a), totalize(b)
    pa, pb, trans = kernels.pair_product(ta.delta, tb.delta, ta.initial, tb.initial)
    ma, mb = ta.marked[pa], tb.marked[pb]
    ia = np.flatnonzero(ma & ~mb)
    ib = np.flatnonzero(mb & ~ma)
    if ia.size == 0 and ib.size == 0:
        return Comparison("equal")
    # product states are numbered in shortlex breadth-first order, so the
    # discoverer of state j is the first (row, event) entry pointing at j
    flat = trans.ravel().astype(np.int64)
    uniq, first = np.unique(flat, return_index=True)
    m = trans.shape[1]
    parent = np.full(trans.shape[0], -1, np.int64)
    via = np.full(trans.shape[0], -1, np.int64)
    sel = uniq > 0
    parent[uniq[sel]] = first[sel] // m
    via[uniq[sel]] = first[sel] % m
    names = a.event_names
    wa = _access_word(parent, via, names, int(ia[0])) if ia.size else None
    wb = _access_word(parent, via, names, int(ib[0])) if ib.size else None
    if wa is None:
        rel = "a_subset_b"
    elif wb is None:
        rel = "b_subset_a"
    else:
        rel = "incomparable"
    return Comparison(rel, wa, wb)


def language_equal(a: Generator, b: Generator) -> bool:
    return marked_language_compare(a, b).equal


def closed_language_equal(a: Generator, b: Generator) -> bool:
    return language_equal(mark_all(accessible(a)), mark_all(accessible(b)))


def words_to_generator(words: Iterable[Sequence[str]], events: Iterable) -> Generator:
    """Prefix-tree generator marking exactly ``words``."""
    evs = _normalize_events(events)
    index = {e.name: j for j, e in enumerate(evs)}
    trie: list[dict[int, int]] = [{}]
    marked = [False]
    for w in words:
        x = 0
        for name in w:
            j = index[name]
            nxt = trie[x].get(j)
            if nxt is None:
                nxt = len(trie)
                trie[x][j] = nxt
                trie.append({})
                marked.append(False)
            x = nxt
        marked[x] = True
    delta = np.full((len(trie), len(evs)), -1, np.int32)
    for x, row in enumerate(trie):
        for j, y in row.items():
            delta[x, j] = y
    return trim(Generator(evs, tuple(range(len(trie))), delta, 0, np.array(marked)))
