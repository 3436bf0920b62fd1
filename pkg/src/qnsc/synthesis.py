"""Supremal sublanguage synthesis.

``sup_qc`` is the counter-augmented traversal; ``sup_qc_language`` computes
the same language through automaton algebra and serves as an independent
cross-check. ``supcon`` is the usual bad-state pruning for controllability,
and the heterogeneous variants iterate per-marker ``sup_qc`` passes (and
``supcon``) to a marked-language fixpoint.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from . import kernels
from .analysis import _check_bound, _check_bounds, _check_containment, marker_correspondence
from .automaton import (
    Generator,
    check_alphabets,
    empty,
    marked_language_compare,
    mark_all,
    product,
    product_indexed,
    subgenerator,
    trim,
    trim_indexed,
    union_marked,
    with_marked,
)
from .errors import AutomatonError


@dataclass
class SynthesisTrace:
    """Step log of a synthesis run.

    Each entry records the step name, the state/transition counts before and
    after, and optional details (e.g. a language comparison). ``removed``
    lists transitions dropped by the counter traversal as
    ``(state, event)`` pairs of the augmented generator.
    """

    entries: list[dict[str, Any]] = field(default_factory=list)
    removed: list[tuple[Any, str]] = field(default_factory=list)

    def log(self, step: str, before: Generator | None, after: Generator | None, **details):
        entry = {"step": step}
        if before is not None:
            entry["before"] = {"states": before.n_states, "transitions": before.n_transitions}
        if after is not None:
            entry["after"] = {"states": after.n_states, "transitions": after.n_transitions}
        entry.update(details)
        self.entries.append(entry)

    def to_json(self) -> str:
        def enc(x):
            if isinstance(x, tuple):
                return [enc(v) for v in x]
            if isinstance(x, (str, int, float, bool)) or x is None:
                return x
            return str(x)
        data = {"entries": self.entries, "removed": [[enc(s), e] for s, e in self.removed]}
        return json.dumps(data, indent=2, default=enc)


def _log(trace, *args, **kw):
    if trace is not None:
        trace.log(*args, **kw)


# ---------------------------------------------------------------------------
# generator-based supQC


def _sup_qc_indexed(k: Generator, N: int, frontier=None, trace=None) -> tuple[Generator, np.ndarray]:
    """``sup_qc`` plus, per output state, the index of its base state in ``k``."""
    N = _check_bound(N)
    tk, kept = trim_indexed(k)
    _log(trace, "trim", k, tk)
    if tk.is_empty:
        _log(trace, "done", None, tk, fixpoint=True)
        return tk, np.empty(0, np.int64)
    t0 = time.perf_counter()
    order, trans, skip_src, skip_ev = kernels.counter_expand(tk.delta, tk.marked, tk.initial, N, frontier)
    base = order // N
    depth = order - base * N
    labels = tuple(zip([tk.states[x] for x in base.tolist()], depth.tolist()))
    aug = Generator(tk.events, labels, trans, 0, tk.marked[base])
    _log(trace, "counter-expand", tk, aug, bound=N, dropped=int(skip_src.size),
         ms=round(1000 * (time.perf_counter() - t0), 3))
    if trace is not None:
        names = tk.event_names
        trace.removed.extend((labels[s], names[e]) for s, e in zip(skip_src.tolist(), skip_ev.tolist()))
    out, idx = trim_indexed(aug)
    _log(trace, "trim", aug, out, fixpoint=True)
    return out, kept[base[idx]] if idx.size else idx


def sup_qc(k: Generator, N: int, frontier: str | None = None, trace: SynthesisTrace | None = None) -> Generator:
    """Supremal quantitatively completable sublanguage of ``L_m(k)`` wrt ``N``.

    States of the result are ``(k_state, d)`` where ``d`` counts steps since
    the last marker visit (or since the start). ``frontier`` picks the
    traversal discipline (``"stack"`` or ``"queue"``); the language does not
    depend on it.
    """
    return _sup_qc_indexed(k, N, frontier, trace)[0]


def _short_strings(events, N: int) -> Generator:
    """All strings of length at most ``N - 1``, all marked."""
    m = len(events)
    delta = np.full((N, m), -1, np.int32)
    delta[: N - 1] = np.arange(1, N, dtype=np.int32)[:, None]
    return Generator(events, tuple(range(N)), delta, 0, np.ones(N, bool))


def _extensions(k: Generator, N: int) -> Generator:
    """Deterministic generator marking ``s`` iff some prefix ``p`` of ``s`` is in
    ``L_m(k)`` with ``|s| - |p| <= N``.

    State ``(x, c)``: ``x`` is the state of ``k`` reached (``None`` once the run
    left ``k``), ``c`` the number of steps since the last marked prefix,
    saturated at ``N + 1``.
    """
    inf = N + 1
    m = k.n_events
    start = (k.initial, 0 if k.marked[k.initial] else inf)
    ids = {start: 0}
    rows = []
    todo = [start]
    i = 0
    while i < len(todo):
        x, c = todo[i]
        i += 1
        row = [-1] * m
        for j in range(m):
            y = int(k.delta[x, j]) if x is not None and x >= 0 else -1
            y = None if y < 0 else y
            c2 = 0 if y is not None and k.marked[y] else min(c + 1, inf)
            if y is None and c2 == inf:
                continue
            key = (y, c2)
            if key not in ids:
                ids[key] = len(todo)
                todo.append(key)
            row[j] = ids[key]
        rows.append(row)
    labels = tuple(("_" if x is None else k.states[x], c) for x, c in todo)
    marked = np.array([c <= N for _, c in todo], bool)
    return Generator(k.events, labels, np.array(rows, np.int32).reshape(len(todo), m), 0, marked)


def sup_qc_language(k: Generator, N: int, trace: SynthesisTrace | None = None) -> Generator:
    """Same language as :func:`sup_qc`, built as ``pre(K_N) ∩ K`` with
    ``K_N = closure(K) ∩ (short strings ∪ K-extensions of length <= N)``.
    """
    N = _check_bound(N)
    tk = trim(k)
    if tk.is_empty:
        return tk
    a1 = _short_strings(tk.events, N)
    a2 = _extensions(tk, N)
    a3 = union_marked(a1, a2)
    a4 = product(mark_all(tk), a3)
    # every prefix must lie in K_N: keep the run inside A4's marked states
    a5 = mark_all(subgenerator(a4, a4.marked)[0])
    out = trim(product(a5, tk))
    for name, g in (("A1", a1), ("A2", a2), ("A3", a3), ("A4", a4), ("A5", a5), ("result", out)):
        _log(trace, name, None, g)
    return out


# ---------------------------------------------------------------------------
# controllability


def _supcon_indexed(g: Generator, k: Generator, trace=None, check=True):
    check_alphabets(g, k)
    if check:
        _check_containment(g, k)
    p, pa, _ = product_indexed(g, trim(k))
    if p.is_empty:
        return p, pa
    unc = g.uncontrollable_mask
    need = (g.delta[pa] >= 0) & unc[None, :]
    alive = np.ones(p.n_states, bool)
    rounds = 0
    while True:
        rounds += 1
        ok = np.where(p.delta >= 0, alive[np.maximum(p.delta, 0)], False)
        survive = alive & ~(need & ~ok).any(axis=1)
        sub, idx = subgenerator(p, survive)
        _, kept = trim_indexed(sub)
        new = np.zeros_like(alive)
        new[idx[kept]] = True
        if (new == alive).all():
            break
        alive = new
    out, idx = subgenerator(p, alive)
    _log(trace, "supcon", p, out, rounds=rounds)
    return out, pa[idx] if idx.size else idx


def supcon(g: Generator, k: Generator, trace: SynthesisTrace | None = None) -> Generator:
    """Supremal controllable sublanguage of ``L_m(k)`` wrt plant ``g``.

    States of the result are ``(plant_state, k_state)`` pairs.
    """
    return _supcon_indexed(g, k, trace)[0]


def sup_cqc(g: Generator, k: Generator, N: int, trace: SynthesisTrace | None = None) -> Generator:
    """Supremal controllable and quantitatively completable sublanguage of ``L_m(k)``."""
    check_alphabets(g, k)
    _check_containment(g, k)
    return supcon(g, sup_qc(k, N, trace=trace), trace=trace)


# ---------------------------------------------------------------------------
# heterogeneous bounds


def _same_language(a: Generator, b: Generator, trace, step: str) -> bool:
    cmp = marked_language_compare(a, b)
    _log(trace, step, a, b, relation=cmp.relation)
    return cmp.equal


def _sup_hqc(g: Generator, k: Generator, bounds: Mapping, markers, trace=None, max_sweeps=None) -> Generator:
    """Sweeps of per-marker ``sup_qc`` passes until the marked language is stable.

    ``cur`` always sits on top of the plant (its state labels have the form
    ``(plant_state, ...)`` after the first product), so each pass can mark
    plant marker ``q`` alone and restore the other markers afterwards.
    """
    cur = trim(k)
    sweep = 0
    while not cur.is_empty:
        sweep += 1
        if max_sweeps is not None and sweep > max_sweeps:
            raise AutomatonError(f"no fixpoint after {max_sweeps} sweeps")
        prev = cur
        for q in markers:
            gi = with_marked(g, np.array([s == q for s in g.states], bool) & g.marked)
            p, _, pb = product_indexed(gi, cur)
            x, base = _sup_qc_indexed(p, bounds[q])
            _log(trace, f"sweep {sweep} marker {q}", p, x, bound=bounds[q])
            if x.is_empty:
                cur = x
                break
            # restore markers: closure(X) ∩ K
            cur = trim(with_marked(x, cur.marked[pb[base]]))
        if cur.is_empty or _same_language(prev, cur, trace, f"sweep {sweep} compare"):
            break
    return cur


def sup_hqc(g: Generator, k: Generator, bounds: Mapping, trace: SynthesisTrace | None = None,
            max_sweeps: int | None = None) -> Generator:
    """Supremal heterogeneously quantitatively completable sublanguage of ``L_m(k)``.

    ``bounds`` maps each plant marker state reached by ``L_m(k)`` to its step
    bound; markers are processed in ascending natural order.
    """
    corr = marker_correspondence(g, k)
    bounds = _check_bounds(corr, bounds)
    return _sup_hqc(g, k, bounds, corr.plant_markers, trace, max_sweeps)


def sup_chqc(g: Generator, e: Generator, bounds: Mapping, trace: SynthesisTrace | None = None,
             max_rounds: int | None = None) -> Generator:
    """Supremal controllable, heterogeneously quantitatively completable sublanguage of ``L_m(e) ∩ L_m(g)``."""
    check_alphabets(g, e)
    cur = trim(product(g, e))
    corr = marker_correspondence(g, cur)
    bounds = _check_bounds(corr, bounds)
    rounds = 0
    while True:
        rounds += 1
        if max_rounds is not None and rounds > max_rounds:
            raise AutomatonError(f"no fixpoint after {max_rounds} rounds")
        h = _sup_hqc(g, cur, bounds, corr.plant_markers, trace)
        c = _supcon_indexed(g, h, trace, check=False)[0]
        if c.is_empty:
            _log(trace, "done", None, c, fixpoint=True)
            return empty(g.events)
        if _same_language(cur, c, trace, f"round {rounds} compare"):
            return c
        cur = c
