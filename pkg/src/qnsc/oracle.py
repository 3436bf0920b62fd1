"""Brute-force reference implementations and random instance generators.

Everything here works on explicit strings (tuples of event names) or on
exhaustive subsets of transitions, and is meant for desk-scale inputs only.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

import numpy as np

from . import kernels
from .automaton import Event, Generator, empty, label_sort_key, product, trim, union_marked
from .errors import BudgetError, StructureError

DEFAULT_CAP = 10**6
DEFAULT_TRANSITION_CAP = 12

Word = tuple[str, ...]


@dataclass(frozen=True)
class BoundedLanguage:
    max_len: int
    marked: frozenset[Word]
    closed: frozenset[Word]


def _check_budget(n_events: int, max_len: int, cap: int) -> None:
    if max_len < 0:
        raise ValueError("max_len must be nonnegative")
    if n_events ** max_len > cap:
        raise BudgetError(f"{n_events}^{max_len} strings exceed the enumeration cap {cap}")


def _walk(g: Generator, start: int, max_len: int) -> Iterator[tuple[Word, int]]:
    """All (word, state) pairs reachable from ``start`` in at most ``max_len`` steps, shortlex."""
    names = g.event_names
    level = [((), start)]
    for depth in range(max_len + 1):
        yield from level
        if depth == max_len:
            break
        nxt = []
        for w, x in level:
            row = g.delta[x]
            for j in range(g.n_events):
                if row[j] >= 0:
                    nxt.append((w + (names[j],), int(row[j])))
        level = nxt


def enumerate_bounded(g: Generator, max_len: int, cap: int = DEFAULT_CAP) -> BoundedLanguage:
    """Closed and marked strings of ``g`` up to length ``max_len``."""
    _check_budget(g.n_events, max_len, cap)
    if g.is_empty:
        return BoundedLanguage(max_len, frozenset(), frozenset())
    closed, marked = set(), set()
    for w, x in _walk(g, g.initial, max_len):
        closed.add(w)
        if g.marked[x]:
            marked.add(w)
    return BoundedLanguage(max_len, frozenset(marked), frozenset(closed))


def first_passages(g: Generator, start: int, target: np.ndarray, max_len: int) -> list[Word]:
    """Strings of length at most ``max_len`` leading ``start`` into ``target`` for the first time."""
    if target[start]:
        return [()]
    out, names = [], g.event_names
    level = [((), start)]
    for _ in range(max_len):
        nxt = []
        for w, x in level:
            for j in range(g.n_events):
                y = int(g.delta[x, j])
                if y < 0:
                    continue
                w2 = w + (names[j],)
                if target[y]:
                    out.append(w2)
                else:
                    nxt.append((w2, y))
        level = nxt
    return out


def is_qc_counterexample(k: Generator, N: int, s: Sequence[str], t: Sequence[str]) -> bool:
    """True iff ``s`` is a prefix of ``L_m(k)`` and ``t`` is a first completion of it longer than ``N``."""
    tk = trim(k)
    x = tk.run_index(s)
    if x < 0 or len(t) <= N:
        return False
    for name in t:
        if tk.marked[x]:
            return False
        x = tk.run_index((name,), x)
        if x < 0:
            return False
    return bool(tk.marked[x])


def refute_qc(g: Generator, N: int, budget: int, cap: int = DEFAULT_CAP) -> tuple[Word, Word] | None:
    """Search for ``(s, t)`` with ``s`` a prefix of ``L_m(g)`` and ``t`` a first completion, ``|t| > N``.

    Only strings with ``|s| + |t| <= budget`` are considered, so ``None`` does
    not certify anything. Prefixes are tried in shortlex order and the
    shortest offending completion is returned.
    """
    _check_budget(g.n_events, budget, cap)
    tk = trim(g)
    if tk.is_empty:
        return None
    for s, x in _walk(tk, tk.initial, budget):
        if tk.marked[x]:
            continue
        for t in first_passages(tk, x, tk.marked, budget - len(s)):
            if len(t) > N:
                return s, t
    return None


def kn_member(k: Generator, word: Sequence[str], N: int) -> bool:
    """Membership of ``word`` in ``closure(K) ∩ (Σ^{≤N-1} ∪ K Σ^{≤N})`` by a direct walk."""
    tk = trim(k)
    if tk.is_empty or tk.run_index(word) < 0:
        return False
    if len(word) <= N - 1:
        return True
    return any(tk.accepts(word[:i]) for i in range(max(0, len(word) - N), len(word) + 1))


def sup_qc_member(k: Generator, word: Sequence[str], N: int) -> bool:
    """``word ∈ K`` and every prefix of ``word`` is in ``K_N`` (string-level supQC membership)."""
    word = tuple(word)
    return trim(k).accepts(word) and all(kn_member(k, word[:i], N) for i in range(len(word) + 1))


def refute_hqc(g: Generator, k: Generator, bounds: Mapping, budget: int,
               cap: int = DEFAULT_CAP) -> tuple[Word, object, Word] | None:
    """Search for ``(s, q, t)``: ``t`` is a first completion of ``s`` to a string of ``L_m(k)``
    that drives the plant to marker ``q``, with ``|t| > bounds[q]``.
    """
    _check_budget(g.n_events, budget, cap)
    p = trim(product(g, k))
    if p.is_empty:
        return None
    plant = [s[0] for s in p.states]
    for q in sorted(bounds, key=label_sort_key):
        target = p.marked & np.array([s == q for s in plant], bool)
        for s, x in _walk(p, p.initial, budget):
            if target[x]:
                continue
            for t in first_passages(p, x, target, budget - len(s)):
                if len(t) > bounds[q]:
                    return s, q, t
    return None


# ---------------------------------------------------------------------------
# subautomaton brute force


def _qc_holds(g: Generator, N: int) -> bool:
    t = trim(g)
    if t.is_empty:
        return True
    v = kernels.first_passage(t.delta, t.marked)
    return bool((v >= 0).all() and v.max() <= N)


def _edges(g: Generator):
    src, ev = np.nonzero(g.delta >= 0)
    return list(zip(src.tolist(), ev.tolist()))


def _restrict(g: Generator, edges, mask: int) -> Generator:
    delta = np.full_like(g.delta, -1)
    for b, (i, j) in enumerate(edges):
        if mask >> b & 1:
            delta[i, j] = g.delta[i, j]
    return Generator(g.events, g.states, delta, g.initial, g.marked)


def _maximal_union(g: Generator, edges, passing: list[int]) -> Generator:
    maximal: list[int] = []
    for m in sorted(passing, key=lambda m: -bin(m).count("1")):
        if not any(m & big == m for big in maximal):
            maximal.append(m)
    out = empty(g.events)
    for m in maximal:
        out = union_marked(out, trim(_restrict(g, edges, m)))
    return out


def brute_supremal_subautomaton(k: Generator, N: int, cap: int = DEFAULT_TRANSITION_CAP) -> Generator:
    """Union of all quantitatively completable subautomata of ``k`` (transition subsets).

    This underapproximates the supremal sublanguage: it can miss sublanguages
    that need more states than ``k`` has.
    """
    tk = trim(k)
    edges = _edges(tk)
    if len(edges) > cap:
        raise BudgetError(f"{len(edges)} transitions exceed the subset cap {cap}")
    passing = [m for m in range(1 << len(edges)) if _qc_holds(_restrict(tk, edges, m), N)]
    return _maximal_union(tk, edges, passing)


def brute_supcon(g: Generator, k: Generator, cap: int = DEFAULT_TRANSITION_CAP) -> Generator:
    """Union of all controllable subautomata of ``trim(product(g, k))``."""
    p = trim(product(g, k))
    edges = _edges(p)
    if len(edges) > cap:
        raise BudgetError(f"{len(edges)} transitions exceed the subset cap {cap}")
    plant = [g.state_index[s[0]] for s in p.states]
    need = (g.delta[plant] >= 0) & g.uncontrollable_mask[None, :] if p.n_states else None

    def ok(mask):
        sub = trim(_restrict(p, edges, mask))
        if sub.is_empty:
            return True
        rows = [p.state_index[s] for s in sub.states]
        return not (need[rows] & (sub.delta < 0)).any()

    passing = [m for m in range(1 << len(edges)) if ok(m)]
    return _maximal_union(p, edges, passing)


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class SamplerParams:
    seed: int
    max_states: int = 5
    event_count: int = 3
    controllable_fraction: float = 0.5
    marked_fraction: float = 0.3
    transition_density: float = 0.5

    def __post_init__(self):
        if self.max_states < 1 or self.event_count < 1:
            raise StructureError("max_states and event_count must be at least 1")
        for name in ("controllable_fraction", "marked_fraction", "transition_density"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise StructureError(f"{name} must lie in [0, 1], got {v}")


def event_names(count: int) -> list[str]:
    if count <= 26:
        return [chr(ord("a") + i) for i in range(count)]
    return [f"e{i}" for i in range(count)]


def _raw_generator(rng: np.random.Generator, n: int, events, marked_fraction, density) -> Generator:
    m = len(events)
    on = rng.random((n, m)) < density
    delta = np.where(on, rng.integers(0, n, size=(n, m)), -1).astype(np.int32)
    marked = rng.random(n) < marked_fraction
    if marked_fraction > 0 and not marked.any():
        marked[rng.integers(n)] = True
    return Generator(events, tuple(range(n)), delta, 0, marked)


def sample_generator(params: SamplerParams, exact_states: bool = False) -> Generator:
    """Random trim generator; deterministic in ``params.seed``.

    The state count is drawn from ``1..max_states`` (or fixed to
    ``max_states`` with ``exact_states``) before trimming.
    """
    rng = np.random.default_rng(params.seed)
    n = params.max_states if exact_states else int(rng.integers(1, params.max_states + 1))
    ctrl = rng.random(params.event_count) < params.controllable_fraction
    events = tuple(Event(name, bool(c)) for name, c in zip(event_names(params.event_count), ctrl))
    return trim(_raw_generator(rng, n, events, params.marked_fraction, params.transition_density))


def sample_plant_spec(seed: int, max_states: int = 5, event_count: int = 3,
                      controllable_fraction: float = 0.5, marked_fraction: float = 0.4,
                      transition_density: float = 0.6) -> tuple[Generator, Generator]:
    """A random plant and a specification whose marked language lies inside the plant's."""
    rng = np.random.default_rng(seed)
    ctrl = rng.random(event_count) < controllable_fraction
    events = tuple(Event(name, bool(c)) for name, c in zip(event_names(event_count), ctrl))
    n = int(rng.integers(1, max_states + 1))
    g = _raw_generator(rng, n, events, marked_fraction, transition_density)
    ne = int(rng.integers(1, max_states + 1))
    e = _raw_generator(rng, ne, events, min(1.0, marked_fraction + 0.3), transition_density + (1 - transition_density) / 2)
    return g, trim(product(g, e))


def all_words(events: Sequence[str], max_len: int) -> Iterator[Word]:
    for n in range(max_len + 1):
        yield from itertools.product(events, repeat=n)


def bounded_sup_qc(k: Generator, N: int, max_len: int, cap: int = DEFAULT_CAP) -> frozenset[Word]:
    """Strings of ``L_m(sup QC(K, N))`` up to ``max_len``, decided string by string.

    ``s`` qualifies iff ``s ∈ K`` and every prefix ``p`` of ``s`` satisfies
    ``|p| <= N - 1`` or has a prefix in ``K`` at most ``N`` symbols shorter.
    Only the bounded enumeration of ``K`` is used.
    """
    lang = enumerate_bounded(trim(k), max_len, cap)
    K = lang.marked

    def in_kn(p: Word) -> bool:
        if len(p) <= N - 1:
            return True
        return any(p[:i] in K for i in range(max(0, len(p) - N), len(p) + 1))

    good: dict[Word, bool] = {(): in_kn(())}
    for w in sorted(lang.closed, key=len):
        if w:
            good[w] = good[w[:-1]] and in_kn(w)
    return frozenset(w for w in K if good[w])
