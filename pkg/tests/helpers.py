"""Shared fixtures and instance generators for the test-suite."""
from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from qnsc import Event, Generator, make_generator
from qnsc.analysis import marker_correspondence
from qnsc.oracle import SamplerParams, enumerate_bounded, sample_generator, sample_plant_spec


def w(s: str) -> tuple[str, ...]:
    """Word over one-character event names."""
    return tuple(s)


def words(*ss: str) -> frozenset:
    return frozenset(w(s) for s in ss)


def marked(g: Generator, max_len: int = 6) -> frozenset:
    return enumerate_bounded(g, max_len).marked


F1 = make_generator([("A", "a", "B"), ("B", "b", "A")], initial="A", marked=["A"])
F1_ABC = make_generator([("A", "a", "B"), ("B", "b", "A")], initial="A", marked=["A"], events="abc")
F2 = make_generator([(0, "a", 1), (1, "b", 1), (1, "c", 2)], initial=0, marked=[2])
F2_NO_C = make_generator([(0, "a", 1), (1, "b", 1)], initial=0, marked=[2], states=[0, 1, 2], events="abc")
F3 = make_generator([(0, "a", 1), (1, "b", 2), (2, "c", 0)], initial=0, marked=[1, 2])
CHAIN = make_generator([(0, "a", 1), (1, "b", 2)], initial=0, marked=[2])

# initial path 11.13.23 into a 19/17 loop between two unmarked states, exit 24 to a marker
LOOP_TRAP = make_generator(
    [(0, "11", 1), (1, "13", 5), (5, "23", 3), (3, "19", 4), (4, "17", 3), (3, "24", 2)],
    initial=0, marked=[1, 2])
# marker-alternating loop (11.29)^n next to a second marker reached by 13
ALTERNATING = make_generator([(0, "11", 1), (1, "29", 0), (0, "13", 2), (2, "24", 0)], initial=0, marked=[1, 2])
# marker 2 only reachable three steps away from the start
FAR_MARKER = make_generator([(0, "11", 1), (1, "29", 0), (1, "21", 3), (3, "24", 2)], initial=0, marked=[1, 2])

UNC_PLANT = make_generator([(0, "u", 1), (0, "a", 2)], initial=0, marked=[2], uncontrollable=["u"])
ONLY_A = make_generator([(0, "a", 1)], initial=0, marked=[1], events=[Event("a"), Event("u", False)])


def random_trim(seed: int, max_states: int = 8, max_events: int = 4) -> Generator:
    """Nonempty trim generator with at most ``max_states`` states and ``max_events`` events."""
    rng = np.random.default_rng(seed)
    while True:
        params = SamplerParams(
            seed=int(rng.integers(2**31)),
            max_states=max_states,
            event_count=int(rng.integers(1, max_events + 1)),
            controllable_fraction=float(rng.uniform(0.3, 1.0)),
            marked_fraction=float(rng.uniform(0.15, 0.5)),
            transition_density=float(rng.uniform(0.3, 0.8)),
        )
        g = sample_generator(params)
        if not g.is_empty:
            return g


def random_plant_spec(seed: int, max_states: int = 5, event_count: int | None = None, markers: int | None = None):
    """Plant/spec pair with a nonempty reached marker set (optionally of a given size)."""
    rng = np.random.default_rng(seed)
    while True:
        ev = event_count or int(rng.integers(2, 4))
        g, k = sample_plant_spec(int(rng.integers(2**31)), max_states=max_states, event_count=ev,
                                 controllable_fraction=float(rng.uniform(0.3, 1.0)))
        if k.is_empty:
            continue
        corr = marker_correspondence(g, k)
        if corr.is_empty or (markers is not None and len(corr.plant_markers) != markers):
            continue
        bounds = {q: int(rng.integers(1, 6)) for q in corr.plant_markers}
        return g, k, bounds


@st.composite
def generators(draw, max_states: int = 5, events: str = "ab", uncontrollable: str = "") -> Generator:
    """Arbitrary (not necessarily trim) generator over one-character events."""
    n = draw(st.integers(1, max_states))
    ev = [Event(e, e not in uncontrollable) for e in events]
    delta = np.array(
        [[draw(st.integers(-1, n - 1)) for _ in events] for _ in range(n)], dtype=np.int32)
    mk = np.array([draw(st.booleans()) for _ in range(n)], bool)
    return Generator(tuple(ev), tuple(range(n)), delta, 0, mk)
