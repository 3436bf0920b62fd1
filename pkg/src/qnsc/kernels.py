"""Array kernels behind the automaton operations.

Every generator is stored as a dense ``int32`` table ``delta[state, event]``
with ``-1`` for undefined transitions. Each kernel has two implementations:

* ``*_loop``: explicit worklist loops, compiled with numba when available;
* ``*_numpy``: level-synchronous, vectorised numpy.

The public functions dispatch on the active backend (``numba`` when it can be
imported and ``QNSC_DISABLE_NUMBA`` is unset, ``numpy`` otherwise). Both
backends return the same sets; state numbering of the loop kernels run with a
FIFO frontier matches the numpy kernels exactly.
"""
from __future__ import annotations

from contextlib import contextmanager

import numpy as np

from ._accel import HAVE_NUMBA, jit

UNREACHABLE = -1
INFINITE = -2

_backend = "numba" if HAVE_NUMBA else "numpy"


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not available (or disabled by QNSC_DISABLE_NUMBA)")
    _backend = name


@contextmanager
def use_backend(name: str):
    old = _backend
    set_backend(name)
    try:
        yield
    finally:
        set_backend(old)


# ---------------------------------------------------------------------------
# helpers


def _reverse_csr(src: np.ndarray, dst: np.ndarray, n: int):
    """Predecessor lists for the edge list ``src -> dst`` as (indptr, preds)."""
    order = np.argsort(dst, kind="stable")
    preds = src[order]
    indptr = np.zeros(n + 1, np.int64)
    np.cumsum(np.bincount(dst, minlength=n), out=indptr[1:])
    return indptr, preds


def _gather(indptr: np.ndarray, values: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    """Concatenate ``values[indptr[v]:indptr[v+1]]`` over ``nodes``."""
    starts = indptr[nodes]
    counts = indptr[nodes + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return values[:0]
    offs = np.repeat(starts - np.cumsum(counts) + counts, counts) + np.arange(total)
    return values[offs]


def _edges(delta: np.ndarray):
    src, ev = np.nonzero(delta >= 0)
    return src.astype(np.int64), ev.astype(np.int64), delta[src, ev].astype(np.int64)


def _first_occurrence(codes: np.ndarray) -> np.ndarray:
    """Unique values of ``codes`` in order of first appearance."""
    if codes.size == 0:
        return codes
    uniq, first = np.unique(codes, return_index=True)
    return uniq[np.argsort(first, kind="stable")]


# ---------------------------------------------------------------------------
# reachability


@jit
def _forward_reach_loop(delta, init):
    n, m = delta.shape
    seen = np.zeros(n, np.bool_)
    if init < 0:
        return seen
    stack = np.empty(n, np.int64)
    stack[0] = init
    top = 1
    seen[init] = True
    while top > 0:
        top -= 1
        x = stack[top]
        for e in range(m):
            y = delta[x, e]
            if y >= 0 and not seen[y]:
                seen[y] = True
                stack[top] = y
                top += 1
    return seen


def _forward_reach_numpy(delta, init):
    n = delta.shape[0]
    seen = np.zeros(n, bool)
    if init < 0:
        return seen
    seen[init] = True
    frontier = np.array([init], np.int64)
    while frontier.size:
        nxt = delta[frontier].ravel()
        nxt = nxt[nxt >= 0]
        nxt = np.unique(nxt[~seen[nxt]])
        seen[nxt] = True
        frontier = nxt
    return seen


@jit
def _backward_reach_loop(delta, target):
    n, m = delta.shape
    indptr = np.zeros(n + 1, np.int64)
    for x in range(n):
        for e in range(m):
            y = delta[x, e]
            if y >= 0:
                indptr[y + 1] += 1
    for i in range(n):
        indptr[i + 1] += indptr[i]
    fill = indptr[:-1].copy()
    preds = np.empty(indptr[n], np.int64)
    for x in range(n):
        for e in range(m):
            y = delta[x, e]
            if y >= 0:
                preds[fill[y]] = x
                fill[y] += 1
    seen = np.zeros(n, np.bool_)
    stack = np.empty(n, np.int64)
    top = 0
    for x in range(n):
        if target[x]:
            seen[x] = True
            stack[top] = x
            top += 1
    while top > 0:
        top -= 1
        y = stack[top]
        for k in range(indptr[y], indptr[y + 1]):
            x = preds[k]
            if not seen[x]:
                seen[x] = True
                stack[top] = x
                top += 1
    return seen


def _backward_reach_numpy(delta, target):
    n = delta.shape[0]
    seen = np.asarray(target, bool).copy()
    src, _, dst = _edges(delta)
    indptr, preds = _reverse_csr(src, dst, n)
    frontier = np.flatnonzero(seen)
    while frontier.size:
        p = _gather(indptr, preds, frontier)
        p = np.unique(p[~seen[p]])
        seen[p] = True
        frontier = p
    return seen


def forward_reach(delta: np.ndarray, init: int) -> np.ndarray:
    """Boolean mask of the states reachable from ``init`` (none if ``init < 0``)."""
    if _backend == "numba":
        return _forward_reach_loop(delta, np.int64(init))
    return _forward_reach_numpy(delta, init)


def backward_reach(delta: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Boolean mask of the states from which some state in ``target`` is reachable."""
    target = np.ascontiguousarray(target, dtype=np.bool_)
    if _backend == "numba":
        return _backward_reach_loop(delta, target)
    return _backward_reach_numpy(delta, target)


# ---------------------------------------------------------------------------
# counter-augmented traversal
#
# Augmented state ``a = x * bound + d``: base state ``x`` and the number ``d``
# of steps taken since the current marker-free stretch began. Leaving a marked
# state, or entering one, resets ``d`` to 0; a step that would make ``d`` equal
# ``bound`` while landing on an unmarked state is dropped.


@jit
def _counter_expand_loop(delta, marked, init, bound, lifo):
    n, m = delta.shape
    size = n * bound
    ids = np.full(size, -1, np.int64)
    order = np.empty(size, np.int64)
    trans = np.full((size, m), -1, np.int32)
    work = np.empty(size, np.int64)
    skip_src = np.empty(size * m, np.int64)
    skip_ev = np.empty(size * m, np.int64)
    nskip = 0
    a0 = init * bound
    ids[a0] = 0
    order[0] = a0
    count = 1
    work[0] = a0
    top = 1
    head = 0
    while (lifo and top > 0) or ((not lifo) and head < count):
        if lifo:
            top -= 1
            a = work[top]
        else:
            a = order[head]
            head += 1
        x = a // bound
        d = a - x * bound
        src = ids[a]
        for e in range(m):
            y = delta[x, e]
            if y < 0:
                continue
            if marked[x] or marked[y]:
                d2 = 0
            else:
                d2 = d + 1
                if d2 == bound:
                    skip_src[nskip] = src
                    skip_ev[nskip] = e
                    nskip += 1
                    continue
            b = y * bound + d2
            if ids[b] < 0:
                ids[b] = count
                order[count] = b
                count += 1
                if lifo:
                    work[top] = b
                    top += 1
            trans[src, e] = ids[b]
    return order[:count].copy(), trans[:count].copy(), skip_src[:nskip].copy(), skip_ev[:nskip].copy()


def _counter_expand_numpy(delta, marked, init, bound):
    n, m = delta.shape
    size = n * bound
    ids = np.full(size, -1, np.int64)
    a0 = init * bound
    ids[a0] = 0
    chunks = [np.array([a0], np.int64)]
    rows = []
    skips = []
    count = 1
    frontier = chunks[0]
    while frontier.size:
        x = frontier // bound
        d = frontier - x * bound
        y = delta[x].astype(np.int64)
        ok = y >= 0
        ysafe = np.where(ok, y, 0)
        reset = marked[x][:, None] | marked[ysafe]
        d2 = np.where(reset, 0, d[:, None] + 1)
        over = ok & (d2 >= bound)
        ok &= ~over
        b = np.where(ok, ysafe * bound + d2, -1)
        src_ids = ids[frontier]
        if over.any():
            r, c = np.nonzero(over)
            skips.append(np.stack([src_ids[r], c]))
        flat = b.ravel()
        cand = flat[flat >= 0]
        new = _first_occurrence(cand[ids[cand] < 0])
        ids[new] = np.arange(count, count + new.size)
        count += new.size
        rows.append(b)
        chunks.append(new)
        frontier = new
    order = np.concatenate(chunks)
    b_all = np.concatenate(rows) if rows else np.empty((0, m), np.int64)
    trans = np.where(b_all >= 0, ids[np.maximum(b_all, 0)], -1).astype(np.int32)
    # rows were produced in discovery order, one block per BFS level
    if skips:
        sk = np.concatenate(skips, axis=1)
        skip_src, skip_ev = sk[0], sk[1]
    else:
        skip_src = skip_ev = np.empty(0, np.int64)
    return order, trans, skip_src, skip_ev


def counter_expand(delta, marked, init, bound, frontier=None):
    """Counter-augmented expansion of ``delta`` from ``(init, 0)``.

    Returns ``(order, trans, skip_src, skip_ev)``: augmented codes of the
    discovered states (``x * bound + d``) in discovery order, their transition
    table over discovered ids, and the dropped transitions as (source id,
    event) pairs.

    ``frontier`` selects the worklist discipline of the loop kernel (``"stack"``
    or ``"queue"``); ``None`` uses the backend default (numba: stack, numpy:
    vectorised level order, which numbers states exactly like ``"queue"``).
    """
    if bound < 1:
        raise ValueError("bound must be >= 1")
    marked = np.ascontiguousarray(marked, dtype=np.bool_)
    if frontier is None:
        if _backend == "numpy":
            return _counter_expand_numpy(delta, marked, init, bound)
        frontier = "stack"
    if frontier not in ("stack", "queue"):
        raise ValueError(f"frontier must be 'stack' or 'queue', not {frontier!r}")
    return _counter_expand_loop(delta, marked, np.int64(init), np.int64(bound), frontier == "stack")


# ---------------------------------------------------------------------------
# synchronous product


@jit
def _ht_find(keys, code):
    mask = keys.shape[0] - 1
    h = (code * 2654435761) & mask
    while keys[h] != -1 and keys[h] != code:
        h = (h + 1) & mask
    return h


@jit
def _pair_product_loop(da, db, ia, ib):
    m = da.shape[1]
    nb = db.shape[0]
    cap = 64
    keys = np.full(2 * cap, -1, np.int64)
    vals = np.empty(2 * cap, np.int64)
    pa = np.empty(cap, np.int64)
    pb = np.empty(cap, np.int64)
    trans = np.full((cap, m), -1, np.int32)
    code0 = ia * nb + ib
    h = _ht_find(keys, code0)
    keys[h] = code0
    vals[h] = 0
    pa[0] = ia
    pb[0] = ib
    count = 1
    i = 0
    while i < count:
        a = pa[i]
        b = pb[i]
        for e in range(m):
            ya = da[a, e]
            yb = db[b, e]
            if ya < 0 or yb < 0:
                continue
            code = np.int64(ya) * nb + yb
            h = _ht_find(keys, code)
            if keys[h] == -1:
                if count == cap:
                    cap *= 2
                    pa2 = np.empty(cap, np.int64)
                    pb2 = np.empty(cap, np.int64)
                    tr2 = np.full((cap, m), -1, np.int32)
                    pa2[:count] = pa[:count]
                    pb2[:count] = pb[:count]
                    tr2[:count] = trans[:count]
                    pa, pb, trans = pa2, pb2, tr2
                    keys2 = np.full(2 * cap, -1, np.int64)
                    vals2 = np.empty(2 * cap, np.int64)
                    for k in range(keys.shape[0]):
                        if keys[k] != -1:
                            h2 = _ht_find(keys2, keys[k])
                            keys2[h2] = keys[k]
                            vals2[h2] = vals[k]
                    keys, vals = keys2, vals2
                    h = _ht_find(keys, code)
                keys[h] = code
                vals[h] = count
                pa[count] = ya
                pb[count] = yb
                count += 1
            trans[i, e] = vals[h]
        i += 1
    return pa[:count].copy(), pb[:count].copy(), trans[:count].copy()


_DENSE_LIMIT = 1 << 24


def _pair_product_numpy(da, db, ia, ib):
    m = da.shape[1]
    nb = db.shape[0]
    total = da.shape[0] * nb
    dense = total <= _DENSE_LIMIT
    if dense:
        ids = np.full(total, -1, np.int64)
    else:
        known_codes = np.empty(0, np.int64)
        known_ids = np.empty(0, np.int64)
    code0 = np.int64(ia) * nb + ib
    codes = [np.array([code0], np.int64)]
    if dense:
        ids[code0] = 0
    else:
        known_codes, known_ids = codes[0].copy(), np.zeros(1, np.int64)
    count = 1
    rows = []
    frontier = codes[0]
    while frontier.size:
        fa = frontier // nb
        fb = frontier - fa * nb
        ya = da[fa].astype(np.int64)
        yb = db[fb].astype(np.int64)
        ok = (ya >= 0) & (yb >= 0)
        c = np.where(ok, ya * nb + yb, -1)
        rows.append(c)
        flat = c.ravel()
        flat = flat[flat >= 0]
        if dense:
            new = _first_occurrence(flat[ids[flat] < 0])
            ids[new] = np.arange(count, count + new.size)
        else:
            pos = np.searchsorted(known_codes, flat)
            pos = np.minimum(pos, known_codes.size - 1)
            new = _first_occurrence(flat[known_codes[pos] != flat])
            merged = np.concatenate([known_codes, new])
            merged_ids = np.concatenate([known_ids, np.arange(count, count + new.size)])
            o = np.argsort(merged, kind="stable")
            known_codes, known_ids = merged[o], merged_ids[o]
        count += new.size
        codes.append(new)
        frontier = new
    allc = np.concatenate(codes)
    c_all = np.concatenate(rows) if rows else np.empty((0, m), np.int64)
    safe = np.maximum(c_all, 0)
    if dense:
        tid = ids[safe]
    else:
        tid = known_ids[np.searchsorted(known_codes, safe).clip(0, known_codes.size - 1)]
    trans = np.where(c_all >= 0, tid, -1).astype(np.int32)
    pa = allc // nb
    return pa, allc - pa * nb, trans


def pair_product(da: np.ndarray, db: np.ndarray, ia: int, ib: int):
    """Reachable synchronous product of two tables over the same event columns.

    Returns ``(pa, pb, trans)``: component indices of each product state in
    breadth-first discovery order and the product transition table.
    """
    if _backend == "numba":
        return _pair_product_loop(da, db, np.int64(ia), np.int64(ib))
    return _pair_product_numpy(da, db, ia, ib)


# ---------------------------------------------------------------------------
# first-passage distances


@jit
def _first_passage_loop(delta, target):
    n, m = delta.shape
    can = _backward_reach_loop(delta, target)
    val = np.full(n, -1, np.int64)
    outdeg = np.zeros(n, np.int64)
    indptr = np.zeros(n + 1, np.int64)
    for x in range(n):
        if can[x] and not target[x]:
            for e in range(m):
                y = delta[x, e]
                if y >= 0 and can[y] and not target[y]:
                    outdeg[x] += 1
                    indptr[y + 1] += 1
    for i in range(n):
        indptr[i + 1] += indptr[i]
    fill = indptr[:-1].copy()
    preds = np.empty(indptr[n], np.int64)
    for x in range(n):
        if can[x] and not target[x]:
            for e in range(m):
                y = delta[x, e]
                if y >= 0 and can[y] and not target[y]:
                    preds[fill[y]] = x
                    fill[y] += 1
    queue = np.empty(n, np.int64)
    head = 0
    tail = 0
    for x in range(n):
        if target[x]:
            val[x] = 0
        elif can[x]:
            val[x] = -2
            if outdeg[x] == 0:
                queue[tail] = x
                tail += 1
    while head < tail:
        x = queue[head]
        head += 1
        best = 0
        for e in range(m):
            y = delta[x, e]
            if y >= 0 and can[y]:
                v = val[y] + 1
                if v > best:
                    best = v
        val[x] = best
        for k in range(indptr[x], indptr[x + 1]):
            p = preds[k]
            outdeg[p] -= 1
            if outdeg[p] == 0:
                queue[tail] = p
                tail += 1
    return val


def _first_passage_numpy(delta, target):
    n = delta.shape[0]
    target = np.asarray(target, bool)
    can = _backward_reach_numpy(delta, target)
    inner = can & ~target
    val = np.full(n, -1, np.int64)
    val[target] = 0
    val[inner] = -2
    src, _, dst = _edges(delta)
    useful = inner[src] & can[dst]
    src, dst = src[useful], dst[useful]
    internal = inner[dst]
    outdeg = np.bincount(src[internal], minlength=n)
    r_indptr, r_preds = _reverse_csr(src[internal], dst[internal], n)
    f_order = np.argsort(src, kind="stable")
    f_dst = dst[f_order]
    f_indptr = np.zeros(n + 1, np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=f_indptr[1:])
    frontier = np.flatnonzero(inner & (outdeg == 0))
    best = np.zeros(n, np.int64)
    while frontier.size:
        succ = _gather(f_indptr, f_dst, frontier)
        owner = np.repeat(frontier, f_indptr[frontier + 1] - f_indptr[frontier])
        np.maximum.at(best, owner, val[succ] + 1)
        val[frontier] = best[frontier]
        p = _gather(r_indptr, r_preds, frontier)
        if p.size == 0:
            break
        outdeg -= np.bincount(p, minlength=n)
        p = np.unique(p)
        frontier = p[outdeg[p] == 0]
    return val


def first_passage(delta: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Maximal first-passage distance from every state into ``target``.

    Entry ``k >= 0`` is the length of the longest path that reaches ``target``
    for the first time; ``INFINITE`` flags states that can enter a
    target-avoiding cycle from which ``target`` stays reachable; ``UNREACHABLE``
    flags states with no path to ``target``.
    """
    target = np.ascontiguousarray(target, dtype=np.bool_)
    if _backend == "numba":
        return _first_passage_loop(delta, target)
    return _first_passage_numpy(delta, target)


# ---------------------------------------------------------------------------
# breadth-first spanning tree


def bfs_tree(delta: np.ndarray, init: int):
    """Shortlex breadth-first tree from ``init``.

    Returns ``(order, parent, via)``: visit order, and per state the parent
    index and the event column used to reach it (``-1`` for the root and for
    unreached states). Ties are broken by event column, so the tree path to
    every state is its shortlex-least access string.
    """
    n = delta.shape[0]
    parent = np.full(n, -1, np.int64)
    via = np.full(n, -1, np.int64)
    if init < 0:
        return np.empty(0, np.int64), parent, via
    seen = np.zeros(n, bool)
    seen[init] = True
    chunks = [np.array([init], np.int64)]
    frontier = chunks[0]
    m = delta.shape[1]
    while frontier.size:
        succ = delta[frontier].astype(np.int64).ravel()
        pos = np.flatnonzero(succ >= 0)
        cand = succ[pos]
        fresh = ~seen[cand]
        cand, pos = cand[fresh], pos[fresh]
        uniq, first = np.unique(cand, return_index=True)
        o = np.argsort(first, kind="stable")
        new, src = uniq[o], pos[first[o]]
        seen[new] = True
        parent[new] = frontier[src // m]
        via[new] = src % m
        chunks.append(new)
        frontier = new
    return np.concatenate(chunks), parent, via
