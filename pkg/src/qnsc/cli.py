"""Command-line interface.

Exit codes: 0 when a check holds or a synthesis result is nonempty, 1 when a
check fails or the result is empty, 2 on usage, parse or precondition errors.
"""
from __future__ import annotations

import argparse
import sys
import time
from typing import Sequence

from . import analysis, oracle, synthesis
from .automaton import (
    complement,
    is_nonblocking,
    marked_language_compare,
    product,
    trim,
    union_marked,
)
from .errors import AutomatonError
from .io import (
    atomic_write,
    dump_json,
    export_dot,
    parse_automaton,
    report,
    serialize_automaton,
    verdict_report,
)

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1: {v}")
    return v


def parse_bounds(text: str) -> dict[str, int]:
    """``"q1=3,q2=1"`` -> ``{"q1": 3, "q2": 1}``."""
    out: dict[str, int] = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        q, sep, n = item.partition("=")
        if not sep or not q:
            raise CliError(f"bad bound {item!r}; expected STATE=N")
        if q in out:
            raise CliError(f"state {q!r} bounded twice")
        try:
            out[q] = _positive(n)
        except argparse.ArgumentTypeError as exc:
            raise CliError(f"bound for {q!r}: {exc}") from None
    if not out:
        raise CliError("empty --bounds")
    return out


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write the result here instead of standard output")
    p.add_argument("--report", help="write a JSON report to this path")
    p.add_argument("--trace", help="write the synthesis step log (JSON) to this path")
    p.add_argument("--parity-convention", action="store_true",
                   help="odd numeric event names are controllable, even ones uncontrollable")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qnsc", description="Quantitatively nonblocking supervisory control.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def cmd(name, help, files, **extra):
        p = sub.add_parser(name, help=help)
        for f in files:
            p.add_argument(f)
        for flag, kw in extra.items():
            p.add_argument("--" + flag, **kw)
        _common(p)
        return p

    n_opt = dict(type=_positive, required=True, dest="n", help="step bound N")
    b_opt = dict(required=True, help="per-marker bounds STATE=N[,STATE=N...]")
    cmd("check-nb", "nonblocking check", ["file"])
    cmd("check-qc", "quantitative completability check", ["file"], n=n_opt)
    cmd("check-hqc", "heterogeneous completability check", ["plant", "spec"], bounds=b_opt)
    cmd("check-ctrl", "controllability check", ["plant", "spec"])
    cmd("supqc", "supremal quantitatively completable sublanguage", ["spec"], n=n_opt,
        method=dict(choices=("generator", "language", "both"), default="generator"))
    cmd("supcon", "supremal controllable sublanguage", ["plant", "spec"])
    cmd("synth-q", "controllable + quantitatively completable synthesis", ["plant", "spec"], n=n_opt)
    cmd("suphqc", "supremal heterogeneously completable sublanguage", ["plant", "spec"], bounds=b_opt)
    cmd("synth-hq", "controllable + heterogeneously completable synthesis", ["plant", "spec"], bounds=b_opt)
    cmd("product", "synchronous product", ["a", "b"])
    cmd("union", "marked-language union", ["a", "b"])
    cmd("complement", "marked-language complement", ["file"])
    cmd("compare", "compare marked languages", ["a", "b"])
    cmd("dot", "Graphviz export", ["file"])
    orc = sub.add_parser("oracle", help="brute-force helpers")
    osub = orc.add_subparsers(dest="oracle_cmd", required=True, parser_class=_Parser)
    en = osub.add_parser("enum", help="enumerate closed/marked strings up to a length")
    en.add_argument("file")
    en.add_argument("--max-len", type=int, required=True)
    _common(en)
    return ap


def _read(path: str, parity: bool):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}") from None
    try:
        return parse_automaton(text, parity_convention=parity)
    except AutomatonError as exc:
        raise AutomatonError(f"{path}: {exc}") from None


def _emit(text: str, path: str | None, stdout) -> None:
    if path:
        atomic_write(path, text)
    else:
        stdout.write(text)


def _word(w) -> str:
    return " ".join(w) if w else "ε"


def _verdict_text(label: str, v) -> str:
    lines = [f"{label}: {'holds' if v.holds else 'violated'}"]
    for w in v.witnesses:
        extra = f" bound={w.bound}" if w.bound is not None else ""
        if w.marker is not None:
            extra += f" marker={w.marker}"
        lines.append(f"  {w.kind} at {w.state} via [{_word(w.access)}] then [{_word(w.trace)}]{extra}")
    return "\n".join(lines) + "\n"


def _run(args, stdout) -> int:
    parity = args.parity_convention
    load = lambda p: _read(p, parity)  # noqa: E731
    t0 = time.perf_counter()
    ms = lambda: 1000 * (time.perf_counter() - t0)  # noqa: E731
    trace = synthesis.SynthesisTrace() if args.trace else None
    rep = None
    code = EXIT_OK

    if args.cmd in ("check-nb", "check-qc"):
        g = load(args.file)
        if args.cmd == "check-nb":
            v, params = is_nonblocking(g), {}
        else:
            v, params = analysis.is_quantitatively_completable(g, args.n), {"N": args.n}
        _emit(_verdict_text(args.cmd, v), args.out, stdout)
        rep = verdict_report(args.cmd, params, v, g, ms())
        code = EXIT_OK if v.holds else EXIT_FAIL
    elif args.cmd in ("check-hqc", "check-ctrl"):
        g, k = load(args.plant), load(args.spec)
        if args.cmd == "check-hqc":
            bounds = parse_bounds(args.bounds)
            v = analysis.is_heterogeneously_quantitatively_completable(g, k, bounds)
            params = {"bounds": bounds}
        else:
            v, params = analysis.is_controllable(g, k), {}
        _emit(_verdict_text(args.cmd, v), args.out, stdout)
        rep = verdict_report(args.cmd, params, v, k, ms())
        code = EXIT_OK if v.holds else EXIT_FAIL
    elif args.cmd in ("supqc", "supcon", "synth-q", "suphqc", "synth-hq"):
        extra = {}
        if args.cmd == "supqc":
            k = load(args.spec)
            params = {"N": args.n, "method": args.method}
            if args.method == "language":
                out = synthesis.sup_qc_language(k, args.n, trace=trace)
            else:
                out = synthesis.sup_qc(k, args.n, trace=trace)
            if args.method == "both":
                other = synthesis.sup_qc_language(k, args.n)
                cmp = marked_language_compare(out, other)
                if not cmp.equal:
                    raise AssertionError(
                        f"generator and language methods disagree on {_word(cmp.witness)!r}")
                extra["methods_agree"] = True
        else:
            g, spec = load(args.plant), load(args.spec)
            if args.cmd == "synth-hq":
                params = {"bounds": parse_bounds(args.bounds)}
                out = synthesis.sup_chqc(g, spec, params["bounds"], trace=trace)
            else:
                k = trim(product(g, spec))
                if args.cmd == "supcon":
                    params = {}
                    out = synthesis.supcon(g, k, trace=trace)
                elif args.cmd == "synth-q":
                    params = {"N": args.n}
                    out = synthesis.sup_cqc(g, k, args.n, trace=trace)
                else:
                    params = {"bounds": parse_bounds(args.bounds)}
                    out = synthesis.sup_hqc(g, k, params["bounds"], trace=trace)
        _emit(serialize_automaton(out), args.out, stdout)
        rep = report(args.cmd, params, not out.is_empty, out, (), ms(), **extra)
        code = EXIT_OK if not out.is_empty else EXIT_FAIL
    elif args.cmd in ("product", "union"):
        a, b = load(args.a), load(args.b)
        out = product(a, b) if args.cmd == "product" else union_marked(a, b)
        _emit(serialize_automaton(out), args.out, stdout)
        rep = report(args.cmd, {}, not out.is_empty, out, (), ms())
        code = EXIT_OK if not out.is_empty else EXIT_FAIL
    elif args.cmd == "complement":
        out = complement(load(args.file))
        _emit(serialize_automaton(out), args.out, stdout)
        rep = report(args.cmd, {}, True, out, (), ms())
    elif args.cmd == "compare":
        a, b = load(args.a), load(args.b)
        cmp = marked_language_compare(a, b)
        text = cmp.relation + "\n"
        if cmp.only_in_a is not None:
            text += f"only in A: {_word(cmp.only_in_a)}\n"
        if cmp.only_in_b is not None:
            text += f"only in B: {_word(cmp.only_in_b)}\n"
        _emit(text, args.out, stdout)
        rep = report("compare", {}, cmp.equal, None, (), ms(), relation=cmp.relation,
                     only_in_a=list(cmp.only_in_a) if cmp.only_in_a is not None else None,
                     only_in_b=list(cmp.only_in_b) if cmp.only_in_b is not None else None)
        code = EXIT_OK if cmp.equal else EXIT_FAIL
    elif args.cmd == "dot":
        g = load(args.file)
        _emit(export_dot(g), args.out, stdout)
    elif args.cmd == "oracle":
        g = load(args.file)
        lang = oracle.enumerate_bounded(g, args.max_len)
        order = lambda ws: sorted(ws, key=lambda w: (len(w), w))  # noqa: E731
        lines = [f"closed {_word(w)}" for w in order(lang.closed)]
        lines += [f"marked {_word(w)}" for w in order(lang.marked)]
        _emit("\n".join(lines) + "\n", args.out, stdout)
        rep = report("oracle enum", {"max_len": args.max_len}, True, g, (), ms(),
                     closed=len(lang.closed), marked=len(lang.marked))

    if args.report and rep is not None:
        atomic_write(args.report, dump_json(rep))
    if trace is not None:
        atomic_write(args.trace, trace.to_json())
    return code


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return _run(args, stdout)
    except (CliError, AutomatonError, ValueError) as exc:
        print(f"qnsc: error: {exc}", file=stderr)
        return EXIT_ERROR
    except AssertionError as exc:
        print(f"qnsc: internal assertion failed: {exc}", file=stderr)
        return EXIT_ERROR


run_cli = main

if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
