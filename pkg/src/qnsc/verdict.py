from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Hashable


@dataclass(frozen=True)
class Witness:
    """Counterexample evidence attached to a failed check.

    ``access`` drives the analysed generator from its initial state to
    ``state``; ``trace`` is then replayable from ``state``. For ``kind ==
    "cycle"`` the trace ends with ``cycle``, which returns to the state the
    cycle starts from. ``bound`` is the bound that was exceeded, if any.
    """

    state: Hashable
    access: tuple[str, ...]
    trace: tuple[str, ...]
    kind: str
    bound: int | None = None
    cycle: tuple[str, ...] = ()
    marker: Hashable | None = None
    plant_state: Hashable | None = None

    def to_json(self) -> dict[str, Any]:
        out = {
            "state": _jsonable(self.state),
            "access": list(self.access),
            "trace": list(self.trace),
            "kind": self.kind,
            "bound": self.bound,
        }
        if self.cycle:
            out["cycle"] = list(self.cycle)
        if self.marker is not None:
            out["marker"] = _jsonable(self.marker)
        if self.plant_state is not None:
            out["plant_state"] = _jsonable(self.plant_state)
        return out


@dataclass(frozen=True)
class Verdict:
    holds: bool
    witnesses: tuple[Witness, ...] = field(default_factory=tuple)

    def __bool__(self) -> bool:
        return self.holds


def _jsonable(x):
    if isinstance(x, tuple):
        return [_jsonable(v) for v in x]
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    return str(x)
