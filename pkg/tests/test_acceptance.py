"""Acceptance run: one pass/fail line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script.
"""
import io
import sys
import time
import tracemalloc
from pathlib import Path

import numpy as np
import pytest

from qnsc import (
    Generator,
    is_controllable,
    is_heterogeneously_quantitatively_completable,
    is_quantitatively_completable,
    kernels,
    marker_correspondence,
    product,
    sup_chqc,
    sup_cqc,
    sup_hqc,
    sup_qc,
    sup_qc_language,
    supcon,
    trim,
    union_marked,
)
from qnsc.automaton import closed_language_equal, language_equal, marked_language_compare
from qnsc.cli import main
from qnsc.io import parse_automaton, serialize_automaton
from qnsc.oracle import SamplerParams, bounded_sup_qc, enumerate_bounded, sample_generator, sample_plant_spec

sys.path.insert(0, str(Path(__file__).parent))
from helpers import ALTERNATING, FAR_MARKER, LOOP_TRAP, random_plant_spec, random_trim  # noqa: E402


def announce(capsys, n, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


def contained(a, b):
    return marked_language_compare(a, b).a_le_b


def spec_for(g, rng, max_states=5):
    """Random specification over the plant's alphabet, intersected with the plant."""
    n = int(rng.integers(1, max_states + 1))
    on = rng.random((n, g.n_events)) < 0.75
    delta = np.where(on, rng.integers(0, n, size=(n, g.n_events)), -1).astype(np.int32)
    marked = rng.random(n) < 0.7
    marked[0] = marked[0] or not marked.any()
    e = Generator(g.events, tuple(range(n)), delta, 0, marked)
    return trim(product(g, e))


def test_c01_dual_equivalence(capsys):
    t0 = time.perf_counter()
    bad = 0
    for i in range(1000):
        k = random_trim(i, max_states=8, max_events=4)
        N = 1 + i % 5
        bad += not language_equal(sup_qc(k, N), sup_qc_language(k, N))
    dt = time.perf_counter() - t0
    announce(capsys, 1, bad == 0 and dt < 60,
             f"sup_qc vs language route on 1000 instances: {bad} mismatches, {dt:.1f}s (limit 60s)")


def test_c02_string_oracle(capsys):
    bad = 0
    for i in range(300):
        k = random_trim(10_000 + i, max_states=6, max_events=3)
        N = 1 + i % 5
        bad += enumerate_bounded(sup_qc(k, N), 6).marked != bounded_sup_qc(k, N, 6)
    announce(capsys, 2, bad == 0, f"string-level prefix oracle up to length 6 on 300 instances: {bad} disagreements")


def test_c03_soundness(capsys):
    fails = []
    for i in range(500):
        g, k, bounds = random_plant_spec(20_000 + i)
        N = min(bounds.values())
        q = sup_qc(k, N)
        if not (contained(q, k) and is_quantitatively_completable(q, N).holds):
            fails.append(("sup_qc", i))
        c = sup_cqc(g, k, N)
        if not (contained(c, k) and is_controllable(g, c).holds and is_quantitatively_completable(c, N).holds):
            fails.append(("sup_cqc", i))
        h = sup_hqc(g, k, bounds)
        if not contained(h, k) or not (h.is_empty or is_heterogeneously_quantitatively_completable(g, h, bounds).holds):
            fails.append(("sup_hqc", i))
        ch = sup_chqc(g, k, bounds)
        ok = contained(ch, k) and is_controllable(g, ch).holds
        if not ok or not (ch.is_empty or is_heterogeneously_quantitatively_completable(g, ch, bounds).holds):
            fails.append(("sup_chqc", i))
    announce(capsys, 3, not fails, f"4 synthesis procedures x 500 instances: {len(fails)} failures {fails[:3]}")


def test_c04_idempotence_monotonicity(capsys):
    idem = mono = 0
    for i in range(500):
        k = random_trim(30_000 + i, max_states=8, max_events=4)
        N = 1 + i % 5
        once = sup_qc(k, N)
        idem += language_equal(sup_qc(once, N), once)
        outs = [sup_qc(k, n) for n in range(1, 6)]
        mono += all(contained(a, b) for a, b in zip(outs, outs[1:]))
    announce(capsys, 4, idem == 500 and mono == 500,
             f"idempotent {idem}/500, monotone in N=1..5 {mono}/500")


def test_c05_propositions(capsys):
    rng = np.random.default_rng(5)
    p1 = p3 = p4 = 0
    n1 = n3 = n4 = 0
    for i in range(200):
        g = sample_generator(SamplerParams(seed=40_000 + i, max_states=5, event_count=3, marked_fraction=0.4,
                                           transition_density=0.6))
        if g.is_empty:
            g = random_trim(40_000 + i, max_events=3)
        N = 1 + i % 4
        a, b = sup_qc(spec_for(g, rng), N), sup_qc(spec_for(g, rng), N)
        n1 += 1
        p1 += is_quantitatively_completable(union_marked(a, b), N).holds
    for i in range(200):
        g, k = sample_plant_spec(50_000 + i)
        N = 1 + i % 4
        n3 += 1
        p3 += is_quantitatively_completable(supcon(g, sup_qc(k, N)), N).holds
    attempts = 0
    while n4 < 100 and attempts < 20_000:
        attempts += 1
        g, k1, bounds = random_plant_spec(60_000 + attempts)
        k2 = spec_for(g, rng)
        if k2.is_empty:
            continue
        h1 = sup_hqc(g, k1, bounds)
        try:
            h2 = sup_hqc(g, k2, bounds)
        except ValueError:
            continue
        if h1.is_empty or h2.is_empty:
            continue
        if marker_correspondence(g, h1).plant_markers != marker_correspondence(g, h2).plant_markers:
            continue
        n4 += 1
        p4 += is_heterogeneously_quantitatively_completable(g, union_marked(h1, h2), bounds).holds
    ok = (p1, p3, p4) == (n1, n3, n4) == (200, 200, 100)
    announce(capsys, 5, ok, f"union of QC outputs {p1}/{n1}, supcon keeps QC {p3}/{n3}, "
                            f"union of HQC outputs (equal support) {p4}/{n4}")


def test_c06_single_marker(capsys):
    bad = 0
    for i in range(300):
        g, k, bounds = random_plant_spec(70_000 + i, markers=1)
        ((_, N),) = bounds.items()
        bad += not language_equal(sup_hqc(g, k, bounds), sup_qc(k, N))
    announce(capsys, 6, bad == 0, f"single marker sup_hqc vs sup_qc on 300 instances: {bad} mismatches")


def test_c07_hqc_implies_qc(capsys):
    good = seen = tried = 0
    while seen < 300 and tried < 20_000:
        g, k, bounds = random_plant_spec(80_000 + tried)
        tried += 1
        h = sup_hqc(g, k, bounds)
        if h.is_empty:
            continue
        seen += 1
        good += is_quantitatively_completable(h, min(bounds.values())).holds
    announce(capsys, 7, good == seen == 300, f"nonempty sup_hqc outputs QC at min bound: {good}/{seen}")


def test_c08_fixtures(capsys):
    a = all(not is_quantitatively_completable(LOOP_TRAP, N).holds for N in range(1, 11))
    b = (is_quantitatively_completable(ALTERNATING, 1).holds
         and not is_heterogeneously_quantitatively_completable(ALTERNATING, ALTERNATING, {1: 3, 2: 3}).holds)
    c = not sup_qc(FAR_MARKER, 1).is_empty and sup_hqc(FAR_MARKER, FAR_MARKER, {1: 3, 2: 1}).is_empty
    announce(capsys, 8, a and b and c,
             f"cycle fixture rejected for N=1..10: {a}; alternating loop QC(1) but not HQC: {b}; "
             f"QC synthesis nonempty, HQC synthesis empty: {c}")


def test_c09_frontier_order(capsys):
    same = 0
    for i in range(300):
        k = random_trim(90_000 + i, max_states=8, max_events=4)
        N = 1 + i % 5
        same += language_equal(sup_qc(k, N, frontier="stack"), sup_qc(k, N, frontier="queue"))
    announce(capsys, 9, same == 300, f"stack vs queue frontier equal on {same}/300")


def _perf_instance(n):
    return sample_generator(SamplerParams(seed=7, max_states=n, event_count=8, marked_fraction=0.3,
                                          transition_density=0.5), exact_states=True)


def _best_time(g, N, reps=3):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        sup_qc(g, N)
        best = min(best, time.perf_counter() - t0)
    return best


def _peak_bytes(g, N):
    # numpy allocations are visible to tracemalloc, compiled-kernel ones are not
    with kernels.use_backend("numpy"):
        tracemalloc.start()
        sup_qc(g, N)
        peak = tracemalloc.get_traced_memory()[1]
        tracemalloc.stop()
    return peak


def test_c10_performance(capsys):
    small, big = _perf_instance(5_000), _perf_instance(50_000)
    sup_qc(small, 10)  # compile / warm caches
    t0 = time.perf_counter()
    out = sup_qc(big, 10)
    dt = time.perf_counter() - t0
    ts, tb = _best_time(small, 10), _best_time(big, 10)
    ms, mb = _peak_bytes(small, 10), _peak_bytes(big, 10)
    size_ratio = big.n_states / small.n_states
    ok = dt < 10 and tb / ts <= 2 * size_ratio and mb / ms <= 2 * size_ratio
    announce(capsys, 10, ok,
             f"{big.n_states} states x 8 events, N=10 -> {out.n_states} states in {dt:.2f}s (limit 10s); "
             f"x{size_ratio:.1f} states: time x{tb / ts:.1f}, memory x{mb / ms:.1f} (limit x{2 * size_ratio:.1f}) "
             f"[{kernels.get_backend()}]")


def test_c11_round_trip_and_cli(capsys, tmp_path):
    rng = np.random.default_rng(11)
    bad = 0
    for i in range(1000):
        if i % 2:
            g = random_trim(100_000 + i, max_states=8, max_events=4)
        else:
            # raw generators keep unreachable and blocking states
            n, m = int(rng.integers(1, 7)), int(rng.integers(1, 4))
            base = random_trim(100_000 + i, max_events=m)
            delta = np.where(rng.random((n, base.n_events)) < 0.5,
                             rng.integers(0, n, size=(n, base.n_events)), -1).astype(np.int32)
            g = Generator(base.events, tuple(range(n)), delta, 0, rng.random(n) < 0.4)
        h = parse_automaton(serialize_automaton(g))
        bad += not (language_equal(h, g) and closed_language_equal(h, g))
    trips = runs = 0
    for i in range(200):
        k = random_trim(110_000 + i, max_states=6, max_events=3)
        p = tmp_path / f"k{i}.aut"
        p.write_text(serialize_automaton(k))
        err = io.StringIO()
        code = main(["supqc", str(p), "--n", str(1 + i % 5), "--method", "both"], stdout=io.StringIO(), stderr=err)
        runs += 1
        trips += code == 2
    announce(capsys, 11, bad == 0 and trips == 0,
             f"1000 serialize/parse round-trips: {bad} language mismatches; "
             f"--method both on {runs} files: {trips} assertion trips")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
