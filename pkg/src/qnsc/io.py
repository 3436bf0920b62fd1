"""Automaton text format, canonical serialization, DOT export and JSON reports.

File layout::

    # comment
    alphabet:
    a c
    b u
    states:
    0 1
    initial:
    0
    marked:
    0
    trans:
    0 a 1
    1 b 0

Items may also follow the section header on the same line
(``initial: 0``). ``c``/``u`` flag controllable/uncontrollable events.
"""
from __future__ import annotations

import json
import os
import tempfile
from typing import Any, Iterable

import numpy as np

from . import kernels
from .automaton import Event, Generator, validate
from .errors import NondeterminismError, ParseError, StructureError, UnknownReferenceError
from .verdict import Verdict

SECTIONS = ("alphabet", "states", "initial", "marked", "trans")


def _tokens(line: str) -> list[tuple[str, int]]:
    """Whitespace-separated tokens with 1-based columns, comments stripped."""
    line = line.split("#", 1)[0]
    out, i = [], 0
    while i < len(line):
        if line[i].isspace():
            i += 1
            continue
        j = i
        while j < len(line) and not line[j].isspace():
            j += 1
        out.append((line[i:j], i + 1))
        i = j
    return out


def parse_automaton(text: str, parity_convention: bool = False) -> Generator:
    """Parse the text format into a validated :class:`Generator`.

    With ``parity_convention`` event controllability comes from the event
    name: odd numbers are controllable, even numbers uncontrollable (a
    trailing ``c``/``u`` flag is then optional and ignored).
    """
    section = None
    seen: dict[str, int] = {}
    events: list[Event] = []
    event_pos: dict[str, tuple[int, int]] = {}
    states: list[str] = []
    state_pos: dict[str, tuple[int, int]] = {}
    initial: list[tuple[str, int, int]] = []
    marked: list[tuple[str, int, int]] = []
    trans: list[tuple[tuple[str, int], tuple[str, int], tuple[str, int], int]] = []

    for lineno, line in enumerate(text.splitlines(), 1):
        toks = _tokens(line)
        if not toks:
            continue
        head, col = toks[0]
        if head.endswith(":") and head[:-1] in SECTIONS:
            section = head[:-1]
            if section in seen:
                raise ParseError(f"section {section!r} repeated (first on line {seen[section]})", lineno, col)
            seen[section] = lineno
            toks = toks[1:]
            if not toks:
                continue
        elif head.endswith(":"):
            raise ParseError(f"unknown section {head[:-1]!r}", lineno, col)
        if section is None:
            raise ParseError("content before the first section header", lineno, col)

        if section == "alphabet":
            name, ncol = toks[0]
            if parity_convention:
                if len(toks) > 2:
                    raise ParseError("expected '<event> [c|u]'", lineno, toks[2][1])
                if not name.isdigit():
                    raise ParseError(f"parity convention needs numeric event names, got {name!r}", lineno, ncol)
                ctrl = int(name) % 2 == 1
            else:
                if len(toks) != 2:
                    raise ParseError("expected '<event> <c|u>'", lineno, (toks[2] if len(toks) > 2 else toks[0])[1])
                flag, fcol = toks[1]
                if flag not in ("c", "u"):
                    raise ParseError(f"controllability flag must be 'c' or 'u', got {flag!r}", lineno, fcol)
                ctrl = flag == "c"
            if name in event_pos:
                raise ParseError(f"event {name!r} declared twice", lineno, ncol)
            event_pos[name] = (lineno, ncol)
            events.append(Event(name, ctrl))
        elif section == "states":
            for tok, c in toks:
                if tok in state_pos:
                    raise ParseError(f"state {tok!r} declared twice", lineno, c)
                state_pos[tok] = (lineno, c)
                states.append(tok)
        elif section == "initial":
            for tok, c in toks:
                initial.append((tok, lineno, c))
        elif section == "marked":
            for tok, c in toks:
                marked.append((tok, lineno, c))
        else:
            if len(toks) != 3:
                raise ParseError("expected '<src> <event> <dst>'", lineno, toks[min(len(toks), 3) - 1][1])
            trans.append((toks[0], toks[1], toks[2], lineno))

    if len(initial) > 1:
        tok, ln, c = initial[1]
        raise ParseError("exactly one initial state expected", ln, c)
    for tok, ln, c in initial + marked:
        if tok not in state_pos:
            raise UnknownReferenceError(f"unknown state {tok!r}", ln, c)
    if states and not initial:
        raise StructureError("a nonempty automaton needs an 'initial:' entry", seen.get("states"))

    triples, positions, first = [], [], {}
    for (src, sc), (ev, ec), (dst, dc), ln in trans:
        for tok, c in ((src, sc), (dst, dc)):
            if tok not in state_pos:
                raise UnknownReferenceError(f"unknown state {tok!r}", ln, c)
        if ev not in event_pos:
            raise UnknownReferenceError(f"unknown event {ev!r}", ln, ec)
        key = (src, ev)
        if key in first:
            prev_ln, prev_dst = first[key]
            if prev_dst != dst:
                raise NondeterminismError(
                    f"state {src!r} already moves to {prev_dst!r} under {ev!r} (line {prev_ln})", ln, sc)
            raise ParseError(f"transition '{src} {ev} {dst}' repeated (line {prev_ln})", ln, sc)
        first[key] = (ln, dst)
        triples.append((src, ev, dst))
        positions.append((ln, sc))

    return validate({
        "alphabet": events,
        "states": states,
        "initial": initial[0][0] if initial else None,
        "marked": [t for t, _, _ in marked],
        "transitions": triples,
        "positions": positions,
    })


def canonical_order(g: Generator) -> np.ndarray:
    """State indices in canonical order: breadth-first from the initial state, then the rest."""
    order, _, _ = kernels.bfs_tree(g.delta, g.initial)
    rest = np.setdiff1d(np.arange(g.n_states), order)
    return np.concatenate([order, rest]).astype(np.int64)


def canonicalize(g: Generator) -> Generator:
    """Same generator with states renumbered ``0..n-1`` in canonical order."""
    order = canonical_order(g)
    pos = np.empty(g.n_states + 1, np.int64)
    pos[order] = np.arange(order.size)
    pos[-1] = -1
    delta = pos[g.delta[order]].astype(np.int32)
    init = int(pos[g.initial]) if g.initial >= 0 else -1
    return Generator(g.events, tuple(range(g.n_states)), delta, init, g.marked[order])


def serialize_automaton(g: Generator) -> str:
    """Canonical text: renumbered states, one item per line, transitions sorted by (src, event)."""
    c = canonicalize(g)
    lines = ["alphabet:"]
    lines += [f"{e.name} {'c' if e.controllable else 'u'}" for e in c.events]
    lines.append("states:")
    lines += [str(i) for i in range(c.n_states)]
    if c.initial >= 0:
        lines += ["initial:", str(c.initial)]
    lines.append("marked:")
    lines += [str(i) for i in np.flatnonzero(c.marked).tolist()]
    lines.append("trans:")
    names = c.event_names
    src, ev = np.nonzero(c.delta >= 0)
    lines += [f"{i} {names[j]} {c.delta[i, j]}" for i, j in zip(src.tolist(), ev.tolist())]
    return "\n".join(lines) + "\n"


def _dot_id(label) -> str:
    s = str(label).replace("\\", "\\\\").replace('"', '\\"')
    return f'"{s}"'


def export_dot(g: Generator, name: str = "G") -> str:
    """Graphviz digraph: double circles for marked states, dashed edges for uncontrollable events."""
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    if g.n_states:
        lines.append("  node [shape=circle];")
        if g.initial >= 0:
            lines.append('  "__init" [shape=point];')
        for i, s in enumerate(g.states):
            attr = " [shape=doublecircle]" if g.marked[i] else ""
            lines.append(f"  {_dot_id(s)}{attr};")
        if g.initial >= 0:
            lines.append(f'  "__init" -> {_dot_id(g.states[g.initial])};')
        for src, ev, dst in g.transitions():
            style = "" if g.events[g.event_index[ev]].controllable else ", style=dashed"
            lines.append(f"  {_dot_id(src)} -> {_dot_id(dst)} [label={_dot_id(ev)}{style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def generator_stats(g: Generator) -> dict[str, int]:
    return {"states": g.n_states, "transitions": g.n_transitions}


def report(prop: str, params: dict[str, Any], holds: bool, g: Generator | None = None,
           witnesses: Iterable = (), elapsed_ms: float | None = None, **extra) -> dict[str, Any]:
    out = {
        "verdict": bool(holds),
        "property": {"name": prop, "parameters": params},
        "witnesses": [w.to_json() for w in witnesses],
        "stats": dict(generator_stats(g) if g is not None else {}),
    }
    if elapsed_ms is not None:
        out["stats"]["elapsed_ms"] = round(elapsed_ms, 3)
    out.update(extra)
    return out


def verdict_report(prop: str, params: dict[str, Any], verdict: Verdict, g: Generator,
                   elapsed_ms: float | None = None) -> dict[str, Any]:
    return report(prop, params, verdict.holds, g, verdict.witnesses, elapsed_ms)


def atomic_write(path: str, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=False) + "\n"
