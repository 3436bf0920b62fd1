"""Decision procedures with counterexample witnesses.

All witness searches use shortlex breadth-first order (events sorted by
name), so reports are deterministic.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Iterable, Mapping

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import kernels
from .automaton import (
    Generator,
    check_alphabets,
    coreachable_mask,
    label_sort_key,
    marked_language_compare,
    product,
    reachable_mask,
    trim,
)
from .errors import BoundsMismatchError, ContainmentError, EmptyMarkerSupportError
from .verdict import Verdict, Witness

DEFAULT_MAX_WITNESSES = 8


# ---------------------------------------------------------------------------
# graph helpers


class _Tree:
    """Shortlex access strings from the initial state."""

    def __init__(self, g: Generator):
        self.g = g
        order, self.parent, self.via = kernels.bfs_tree(g.delta, g.initial)
        self.rank = np.full(g.n_states, np.iinfo(np.int64).max, np.int64)
        self.rank[order] = np.arange(order.size)

    def word(self, x: int) -> tuple[str, ...]:
        names = self.g.event_names
        out = []
        while self.parent[x] >= 0:
            out.append(names[self.via[x]])
            x = int(self.parent[x])
        return tuple(reversed(out))

    def sort(self, idx: np.ndarray) -> np.ndarray:
        return idx[np.argsort(self.rank[idx], kind="stable")]


def _scc_labels(delta: np.ndarray, keep: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """SCC labels of the subgraph induced by ``keep`` and a per-state cyclic flag."""
    n = delta.shape[0]
    src, ev = np.nonzero(delta >= 0)
    dst = delta[src, ev].astype(np.int64)
    sel = keep[src] & keep[dst]
    src, dst = src[sel], dst[sel]
    adj = csr_matrix((np.ones(src.size, np.int8), (src, dst)), shape=(n, n))
    _, labels = connected_components(adj, directed=True, connection="strong")
    sizes = np.bincount(labels, minlength=labels.max() + 1 if n else 0)
    cyclic = keep & (sizes[labels] > 1)
    loops = src[src == dst]
    cyclic[loops] = True
    return labels, cyclic


def _bfs_path(g: Generator, start: int, allowed: np.ndarray, goal) -> tuple[tuple[str, ...], int] | None:
    """Shortest nonempty path from ``start`` through ``allowed`` states to a ``goal`` state."""
    names = g.event_names
    prev = {start: None}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for j in range(g.n_events):
            y = int(g.delta[x, j])
            if y < 0 or not allowed[y]:
                continue
            if goal(y):
                word = [names[j]]
                while prev[x] is not None:
                    x, j2 = prev[x]
                    word.append(names[j2])
                return tuple(reversed(word)), y
            if y not in prev:
                prev[y] = (x, j)
                queue.append(y)
    return None


def blocking_witnesses(g: Generator, tree: _Tree | None = None, limit: int | None = None) -> list[Witness]:
    """One witness per terminal SCC of the reachable, non-coreachable region."""
    if g.is_empty:
        return []
    bad = reachable_mask(g) & ~coreachable_mask(g)
    if not bad.any():
        return []
    tree = tree or _Tree(g)
    labels, _ = _scc_labels(g.delta, bad)
    src, ev = np.nonzero((g.delta >= 0) & bad[:, None])
    dst = g.delta[src, ev]
    leaving = np.unique(labels[src[labels[src] != labels[dst]]])
    members = np.flatnonzero(bad & ~np.isin(labels, leaving))
    members = tree.sort(members)
    _, first = np.unique(labels[members], return_index=True)
    reps = members[np.sort(first)]
    if limit is not None:
        reps = reps[:limit]
    return [Witness(g.states[x], tree.word(x), (), "unreachable") for x in reps.tolist()]


# ---------------------------------------------------------------------------
# first-passage profile


@dataclass(frozen=True, eq=False)
class FirstPassageProfile:
    """Maximal first-passage distances to ``target``.

    ``values`` holds ``k >= 0`` for finite suprema, ``kernels.INFINITE`` (-2)
    and ``kernels.UNREACHABLE`` (-1).
    """

    generator: Generator
    target: np.ndarray
    values: np.ndarray

    def _idx(self, state) -> int:
        return self.generator.state_index[state]

    def value(self, state):
        """``int``, ``math.inf`` or ``None`` (target unreachable)."""
        v = int(self.values[self._idx(state)])
        if v == kernels.UNREACHABLE:
            return None
        if v == kernels.INFINITE:
            return math.inf
        return v

    def as_dict(self) -> dict:
        return {s: self.value(s) for s in self.generator.states}

    @cached_property
    def _cyclic(self) -> np.ndarray:
        return _scc_labels(self.generator.delta, self.values == kernels.INFINITE)[1]

    def longest_path(self, x: int) -> tuple[str, ...]:
        """Lexicographically first first-passage path of maximal length from ``x``."""
        g, val, tgt = self.generator, self.values, self.target
        names = g.event_names
        out = []
        while not tgt[x]:
            want = val[x] - 1
            for j in range(g.n_events):
                y = int(g.delta[x, j])
                if y >= 0 and (tgt[y] if want == 0 else (not tgt[y] and val[y] == want)):
                    out.append(names[j])
                    x = y
                    break
            else:  # pragma: no cover - values are consistent by construction
                raise AssertionError("inconsistent first-passage values")
        return tuple(out)

    def cycle_witness(self, x: int) -> tuple[tuple[str, ...], tuple[str, ...]]:
        """``(prefix, cycle)``: shortest route to a target-avoiding cycle, then that cycle."""
        inf = self.values == kernels.INFINITE
        cyc = self._cyclic
        if cyc[x]:
            prefix, c = (), x
        else:
            prefix, c = _bfs_path(self.generator, x, inf, lambda y: cyc[y])
        cycle, _ = _bfs_path(self.generator, c, inf, lambda y: y == c)
        return prefix, cycle

    def witness(self, state):
        """Longest first-passage path, ``(prefix, cycle)`` when infinite, ``None`` when unreachable."""
        x = self._idx(state)
        v = self.values[x]
        if v == kernels.UNREACHABLE:
            return None
        if v == kernels.INFINITE:
            return self.cycle_witness(x)
        return self.longest_path(x)


def _target_mask(g: Generator, target) -> np.ndarray:
    if isinstance(target, np.ndarray) and target.dtype == bool:
        return target
    mask = np.zeros(g.n_states, bool)
    for s in target:
        mask[g.state_index[s]] = True
    return mask


def first_passage_profile(g: Generator, target: Iterable[Hashable] | np.ndarray) -> FirstPassageProfile:
    mask = _target_mask(g, target)
    return FirstPassageProfile(g, mask, kernels.first_passage(g.delta, mask))


# ---------------------------------------------------------------------------
# quantitative nonblocking / completability


def _check_bound(N) -> int:
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise ValueError(f"step bound must be a positive integer, got {N!r}")
    return int(N)


def _bound_witnesses(prof: FirstPassageProfile, states: np.ndarray, tree: _Tree, bound: int,
                     labels=None, extra=None) -> list[Witness]:
    g = prof.generator
    out = []
    for x in states.tolist():
        v = prof.values[x]
        label = g.states[x] if labels is None else labels[x]
        kw = extra(x) if extra else {}
        if v == kernels.INFINITE:
            prefix, cycle = prof.cycle_witness(x)
            out.append(Witness(label, tree.word(x), prefix + cycle, "cycle", bound, cycle, **kw))
        elif v == kernels.UNREACHABLE:
            out.append(Witness(label, tree.word(x), (), "unreachable", bound, **kw))
        else:
            out.append(Witness(label, tree.word(x), prof.longest_path(x)[: bound + 1], "path", bound, **kw))
    return out


def is_quantitatively_nonblocking(g: Generator, N: int, max_witnesses: int = DEFAULT_MAX_WITNESSES) -> Verdict:
    """Every reachable state reaches a marker, and every first passage takes at most ``N`` steps."""
    N = _check_bound(N)
    if g.is_empty:
        return Verdict(True)
    tree = _Tree(g)
    ws = blocking_witnesses(g, tree, max_witnesses)
    prof = first_passage_profile(g, g.marked)
    val = prof.values
    bad = reachable_mask(g) & ((val == kernels.INFINITE) | (val > N))
    room = max_witnesses - len(ws)
    if room > 0 and bad.any():
        ws += _bound_witnesses(prof, tree.sort(np.flatnonzero(bad))[:room], tree, N)
    return Verdict(not ws and not bad.any(), tuple(ws))


def is_quantitatively_completable(k: Generator, N: int, max_witnesses: int = DEFAULT_MAX_WITNESSES) -> Verdict:
    """Decide quantitative completability of ``L_m(k)`` on the trimmed generator."""
    N = _check_bound(N)
    return is_quantitatively_nonblocking(trim(k), N, max_witnesses)


# ---------------------------------------------------------------------------
# heterogeneous markers


@dataclass(frozen=True)
class MarkerCorrespondence:
    """Plant markers reached by the marked strings of ``k`` and the ``k`` states realizing each."""

    plant_markers: tuple[Hashable, ...]
    rch: Mapping[Hashable, frozenset]

    @property
    def is_empty(self) -> bool:
        return not self.plant_markers


def _check_containment(g: Generator, k: Generator) -> None:
    cmp = marked_language_compare(k, g)
    if cmp.only_in_a is not None:
        raise ContainmentError(
            f"specification marks {' '.join(cmp.only_in_a) or 'the empty string'!r}, "
            "which the plant does not mark")


def marker_correspondence(g: Generator, k: Generator) -> MarkerCorrespondence:
    check_alphabets(g, k)
    _check_containment(g, k)
    p = product(g, k)
    rch: dict = {}
    for i in np.flatnonzero(p.marked).tolist():
        q, x = p.states[i]
        rch.setdefault(q, set()).add(x)
    markers = tuple(sorted(rch, key=label_sort_key))
    return MarkerCorrespondence(markers, {q: frozenset(rch[q]) for q in markers})


def _check_bounds(corr: MarkerCorrespondence, bounds: Mapping) -> dict:
    if corr.is_empty:
        raise EmptyMarkerSupportError("the specification reaches no plant marker state")
    keys, want = set(bounds), set(corr.plant_markers)
    if keys != want:
        missing = sorted(want - keys, key=label_sort_key)
        extra = sorted(keys - want, key=label_sort_key)
        raise BoundsMismatchError(
            f"bounds must cover exactly the reached plant markers {list(corr.plant_markers)}"
            + (f"; missing {missing}" if missing else "") + (f"; unexpected {extra}" if extra else ""))
    return {q: _check_bound(bounds[q]) for q in corr.plant_markers}


def is_heterogeneously_quantitatively_completable(
    g: Generator, k: Generator, bounds: Mapping, max_witnesses: int = DEFAULT_MAX_WITNESSES
) -> Verdict:
    """Per plant marker ``q``: from every prefix, strings reaching ``q`` exist and need at most ``bounds[q]`` steps.

    Decided on the trimmed synchronous product of ``g`` and ``k``, whose
    states know the plant state each prefix leads to. Witness states are
    ``k`` states; ``plant_state`` and ``marker`` give the plant side.
    """
    corr = marker_correspondence(g, k)
    bounds = _check_bounds(corr, bounds)
    p = trim(product(g, k))
    tree = _Tree(p)
    plant = [s[0] for s in p.states]
    spec = [s[1] for s in p.states]
    ws: list[Witness] = []
    failed = False
    for q in corr.plant_markers:
        target = p.marked & np.array([s == q for s in plant], bool)
        prof = first_passage_profile(p, target)
        val = prof.values
        bad = (val == kernels.UNREACHABLE) | (val == kernels.INFINITE) | (val > bounds[q])
        if not bad.any():
            continue
        failed = True
        room = max_witnesses - len(ws)
        if room > 0:
            ws += _bound_witnesses(prof, tree.sort(np.flatnonzero(bad))[:room], tree, bounds[q],
                                   labels=spec, extra=lambda x, q=q: {"marker": q, "plant_state": plant[x]})
    return Verdict(not failed, tuple(ws))


# ---------------------------------------------------------------------------
# controllability


def is_controllable(g: Generator, k: Generator, max_witnesses: int = DEFAULT_MAX_WITNESSES) -> Verdict:
    """``closure(L_m(k))`` followed by an uncontrollable event stays inside it whenever the plant allows."""
    check_alphabets(g, k)
    tk = trim(k)
    if tk.is_empty:
        return Verdict(True)
    if g.is_empty:
        raise ContainmentError("specification behaviour is not contained in the empty plant")
    pa, pb, trans = kernels.pair_product(g.delta, tk.delta, g.initial, tk.initial)
    gd = g.delta[pa] >= 0
    kd = tk.delta[pb] >= 0
    pair = Generator(g.events, tuple(zip(pa.tolist(), pb.tolist())), trans, 0, np.zeros(pa.size, bool))
    escape = kd & ~gd
    if escape.any():
        i, j = map(int, np.argwhere(escape)[0])
        word = _Tree(pair).word(i) + (g.events[j].name,)
        raise ContainmentError(
            f"specification allows {' '.join(word)!r}, which the plant cannot execute")
    bad = gd & ~kd & g.uncontrollable_mask[None, :]
    if not bad.any():
        return Verdict(True)
    tree = _Tree(pair)
    rows = tree.sort(np.flatnonzero(bad.any(axis=1)))
    ws = []
    for i in rows.tolist():
        for j in np.flatnonzero(bad[i]).tolist():
            if len(ws) >= max_witnesses:
                break
            ws.append(Witness(tk.states[pb[i]], tree.word(i), (g.events[j].name,), "uncontrollable",
                              plant_state=g.states[pa[i]]))
    return Verdict(False, tuple(ws))
