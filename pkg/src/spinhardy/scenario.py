"""Hardy and Cabello scenarios and their zero-probability constraint sets.

A scenario fixes, for each of ``n`` spin-s parties, an unprimed and a primed
measurement direction plus two outcome selectors: the unprimed selector
(used by the all-unprimed joint-zero event) and the primed selector (used by
the all-primed target event).

Three families of zero events are supported:

``relaxed``
    one all-unprimed event at the unprimed selectors, and for each party k
    the 2s events where party k is measured unprimed at a value other than
    its selector while every other party is measured primed at its primed
    selector. 2ns + 1 events in total.
``legacy``
    bipartite only, selectors fixed to (+s, +s | -s, -s): the joint-zero
    event plus every pair with m + m' < 0 in settings (a, b') and (a', b).
    1 + 2s(2s + 1) events.
``cabello``
    bipartite only: the relaxed events without the joint-zero one, whose
    outcome becomes the anchor event with probability q.

Every zero event carries a single outcome tuple and maps to one product
vector, so "orthogonal to the event" and "orthogonal to the vector" coincide.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import PreconditionError
from .spin import (
    Direction,
    MeasurementBasis,
    check_label,
    check_two_s,
    direction_basis,
    format_label,
    joint_vector,
    labels,
    random_direction,
)

MODES = ("relaxed", "legacy", "cabello")

JOINT_ZERO = "JOINT_ZERO"
TARGET = "TARGET"
ANCHOR = "ANCHOR"


def a_side_tag(k: int) -> str:
    return f"A_SIDE_ZERO({k})"


def legacy_tag(i: int) -> str:
    return f"LEGACY({i})"


@dataclass(frozen=True)
class Scenario:
    n: int
    two_s: int
    directions: tuple[tuple[Direction, Direction], ...]
    selectors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise PreconditionError(f"party count must be >= 2, got {self.n!r}")
        check_two_s(self.two_s)
        if len(self.directions) != self.n or len(self.selectors) != self.n:
            raise PreconditionError("need one direction pair and one selector pair per party")
        for pair in self.directions:
            if len(pair) != 2 or not all(isinstance(d, Direction) for d in pair):
                raise PreconditionError("each party needs an (unprimed, primed) Direction pair")
        for sel in self.selectors:
            if len(sel) != 2:
                raise PreconditionError("each party needs an (unprimed, primed) selector pair")
            for m in sel:
                check_label(self.two_s, m)

    @property
    def dim(self) -> int:
        return (self.two_s + 1) ** self.n

    def basis(self, party: int, primed: bool) -> MeasurementBasis:
        return direction_basis(self.two_s, self.directions[party][int(primed)])

    def bases(self, settings: Sequence[bool]) -> list[MeasurementBasis]:
        return [self.basis(k, p) for k, p in enumerate(settings)]

    def with_legacy_selectors(self) -> "Scenario":
        return replace(self, selectors=default_selectors(self.n, self.two_s))


def default_selectors(n: int, two_s: int) -> tuple[tuple[int, int], ...]:
    return tuple((two_s, -two_s) for _ in range(n))


def random_scenario(n: int, two_s: int, seed: int = 42, selectors=None) -> Scenario:
    """Scenario with directions drawn uniformly from the sphere.

    Draw order: party 0 unprimed, party 0 primed, party 1 unprimed, ...
    """
    rng = np.random.default_rng(seed)
    dirs = tuple((random_direction(rng), random_direction(rng)) for _ in range(n))
    sel = tuple(tuple(s) for s in selectors) if selectors is not None else default_selectors(n, two_s)
    return Scenario(n, two_s, dirs, sel)


@dataclass(frozen=True)
class Event:
    """A joint outcome event: per-party setting flags and accepted outcome tuples.

    ``settings[k]`` is True when party k is measured along its primed direction.
    """

    settings: tuple[bool, ...]
    outcomes: frozenset
    tag: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.outcomes:
            raise PreconditionError("event outcome set must be nonempty")
        for t in self.outcomes:
            if len(t) != len(self.settings):
                raise PreconditionError("outcome tuple length must match party count")

    @classmethod
    def single(cls, settings: Iterable[bool], outcome: Iterable[int], tag: str = "") -> "Event":
        return cls(tuple(bool(s) for s in settings), frozenset([tuple(int(m) for m in outcome)]), tag)

    def validate(self, two_s: int) -> None:
        for t in self.outcomes:
            for m in t:
                check_label(two_s, m)

    def describe(self) -> str:
        """Readable form such as ``P(a1=+1, a2'=-1)``; multi-tuple events list their tuples."""
        marks = ["'" if p else "" for p in self.settings]
        parts = []
        for t in sorted(self.outcomes):
            parts.append(", ".join(f"a{k + 1}{marks[k]}={format_label(m)}" for k, m in enumerate(t)))
        return "P(" + " | ".join(parts) + ")"


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """Product vectors a solution state must be orthogonal to, with their source events."""

    vectors: tuple[np.ndarray, ...]
    tags: tuple[str, ...]
    events: tuple[Event, ...]
    ambient_dim: int

    def __len__(self) -> int:
        return len(self.vectors)

    @property
    def zero_vectors(self) -> list[tuple[np.ndarray, str]]:
        return list(zip(self.vectors, self.tags))


def event_vector(sc: Scenario, event: Event) -> np.ndarray:
    """Product vector of a single-tuple event."""
    if len(event.outcomes) != 1:
        raise PreconditionError("only single-tuple events map to one product vector")
    (t,) = event.outcomes
    return joint_vector(sc.bases(event.settings), t)


def _all_unprimed(n: int) -> tuple[bool, ...]:
    return (False,) * n


def _all_primed(n: int) -> tuple[bool, ...]:
    return (True,) * n


def relaxed_events(sc: Scenario) -> list[Event]:
    n = sc.n
    unprimed = [sel[0] for sel in sc.selectors]
    primed = [sel[1] for sel in sc.selectors]
    events = [Event.single(_all_unprimed(n), unprimed, JOINT_ZERO)]
    for k in range(n):
        settings = tuple(j != k for j in range(n))
        for m in labels(sc.two_s):
            if m == unprimed[k]:
                continue
            outcome = [primed[j] if j != k else m for j in range(n)]
            events.append(Event.single(settings, outcome, a_side_tag(k)))
    return events


def legacy_events(sc: Scenario) -> list[Event]:
    if sc.n != 2:
        raise PreconditionError("legacy conditions are defined for two parties only")
    two_s = sc.two_s
    events = [Event.single((False, False), (two_s, two_s), legacy_tag(0))]
    pairs = [(m, mp) for m in labels(two_s) for mp in labels(two_s) if m + mp < 0]
    for settings in ((False, True), (True, False)):
        for m, mp in pairs:
            events.append(Event.single(settings, (m, mp), legacy_tag(len(events))))
    return events


def cabello_events(sc: Scenario) -> list[Event]:
    if sc.n != 2:
        raise PreconditionError("the Cabello-type conditions are implemented for two parties only")
    return relaxed_events(sc)[1:]


def target_event(sc: Scenario) -> Event:
    return Event.single(_all_primed(sc.n), [sel[1] for sel in sc.selectors], TARGET)


def anchor_event(sc: Scenario) -> Event:
    return Event.single(_all_unprimed(sc.n), [sel[0] for sel in sc.selectors], ANCHOR)


def _constraint_set(sc: Scenario, events: list[Event]) -> ConstraintSet:
    vecs = tuple(event_vector(sc, e) for e in events)
    return ConstraintSet(vecs, tuple(e.tag for e in events), tuple(events), sc.dim)


def relaxed_constraints(sc: Scenario) -> ConstraintSet:
    return _constraint_set(sc, relaxed_events(sc))


def legacy_constraints(sc: Scenario) -> ConstraintSet:
    """Legacy conditions; the scenario's selectors are replaced by (+s, -s)."""
    sc = sc.with_legacy_selectors()
    return _constraint_set(sc, legacy_events(sc))


def cabello_constraints(sc: Scenario) -> tuple[ConstraintSet, np.ndarray, np.ndarray]:
    """Return (zeros, anchor vector, target vector)."""
    zeros = _constraint_set(sc, cabello_events(sc))
    return zeros, event_vector(sc, anchor_event(sc)), target_vector(sc)


def target_vector(sc: Scenario) -> np.ndarray:
    return event_vector(sc, target_event(sc))


def constraints_for(sc: Scenario, which: str) -> ConstraintSet:
    if which == "relaxed":
        return relaxed_constraints(sc)
    if which == "legacy":
        return legacy_constraints(sc)
    if which == "cabello":
        return cabello_constraints(sc)[0]
    raise PreconditionError(f"unknown constraint family {which!r}; choose from {MODES}")


def zero_events(sc: Scenario, which: str) -> list[Event]:
    if which == "relaxed":
        return relaxed_events(sc)
    if which == "legacy":
        return legacy_events(sc.with_legacy_selectors())
    if which == "cabello":
        return cabello_events(sc)
    raise PreconditionError(f"unknown constraint family {which!r}; choose from {MODES}")


def expand_events(sc: Scenario, which: str) -> list[tuple[Event, Any]]:
    """Zero events with required probability 0.0, then the anchor ("q", cabello
    only) and the target ("p")."""
    if which == "legacy":
        sc = sc.with_legacy_selectors()
    out: list[tuple[Event, Any]] = [(e, 0.0) for e in zero_events(sc, which)]
    if which == "cabello":
        out.append((anchor_event(sc), "q"))
    out.append((target_event(sc), "p"))
    return out


def expected_dims(n: int, two_s: int, which: str) -> dict[str, int]:
    """Closed-form dimensions of M, its complement, and the complement with the target adjoined."""
    d = (two_s + 1) ** n
    if which == "relaxed":
        m = n * two_s + 1
    elif which == "legacy":
        m = 1 + two_s * (two_s + 1)
    elif which == "cabello":
        m = 2 * two_s
    else:
        raise PreconditionError(f"unknown constraint family {which!r}")
    return {"M": m, "M_bar": d - m, "M_bar_prime": d - m - 1}


# --- JSON ---------------------------------------------------------------

def _parse_direction(obj: Any, where: str) -> Direction:
    if isinstance(obj, dict):
        if set(obj) - {"theta", "phi"} or "theta" not in obj:
            raise PreconditionError(f"{where}: angle form needs 'theta' and optional 'phi'")
        return Direction.from_angles(float(obj["theta"]), float(obj.get("phi", 0.0)))
    if isinstance(obj, (list, tuple)):
        return Direction.from_vector(obj)
    raise PreconditionError(f"{where}: direction must be [x, y, z] or {{'theta', 'phi'}}")


def scenario_from_dict(data: dict, seed: int = 42) -> Scenario:
    """Build a Scenario from the JSON schema.

    ``parties`` may be omitted, in which case directions are drawn with
    :func:`random_scenario` from ``seed``. Missing selectors default to
    s_i = +s, s_j = -s.
    """
    if not isinstance(data, dict):
        raise PreconditionError("scenario must be a JSON object")
    try:
        n = int(data["n"])
        two_s = int(data["two_s"])
    except KeyError as exc:
        raise PreconditionError(f"scenario is missing required key {exc.args[0]!r}") from None
    except (TypeError, ValueError):
        raise PreconditionError("'n' and 'two_s' must be integers") from None
    check_two_s(two_s)
    parties = data.get("parties")
    if parties is None:
        return random_scenario(n, two_s, seed)
    if not isinstance(parties, list) or len(parties) != n:
        raise PreconditionError(f"'parties' must list exactly n={n} entries")
    dirs, sels = [], []
    for k, p in enumerate(parties):
        if not isinstance(p, dict):
            raise PreconditionError(f"parties[{k}] must be an object")
        for key in ("a", "a_prime"):
            if key not in p:
                raise PreconditionError(f"parties[{k}] is missing {key!r}")
        dirs.append((_parse_direction(p["a"], f"parties[{k}].a"),
                     _parse_direction(p["a_prime"], f"parties[{k}].a_prime")))
        sels.append((int(p.get("s_i", two_s)), int(p.get("s_j", -two_s))))
    return Scenario(n, two_s, tuple(dirs), tuple(sels))


def scenario_to_dict(sc: Scenario) -> dict:
    return {
        "n": sc.n,
        "two_s": sc.two_s,
        "parties": [
            {
                "a": list(d[0].as_tuple()),
                "a_prime": list(d[1].as_tuple()),
                "s_i": sel[0],
                "s_j": sel[1],
            }
            for d, sel in zip(sc.directions, sc.selectors)
        ],
    }


def symmetric_scenario(n: int, two_s: int, theta: float, selectors=None) -> Scenario:
    """Every party measures along +z (unprimed) and at polar angle ``theta`` in the xz-plane (primed)."""
    z = Direction(0.0, 0.0, 1.0)
    tilted = Direction.from_angles(theta, 0.0)
    sel = tuple(tuple(s) for s in selectors) if selectors is not None else default_selectors(n, two_s)
    return Scenario(n, two_s, tuple((z, tilted) for _ in range(n)), sel)
