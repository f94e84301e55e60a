"""Exhaustive local-hidden-variable oracle.

A deterministic local strategy assigns every party one outcome for its
unprimed setting and one for its primed setting. Local models are convex
mixtures of these, so the best value of a linear objective over local models
satisfying a list of zero events is the best value over the deterministic
strategies that never fire a zero event. That is computed here by plain
enumeration of all (2s+1)^(2n) strategies.

Strategy ``index`` encodes its outcomes as base-(2s+1) digits, most
significant first, in the order party 0 unprimed, party 0 primed, party 1
unprimed, ...; digit 0 stands for m = -s.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import NoContradiction, PreconditionError, ResourceLimit
from .scenario import Event, Scenario, anchor_event, target_event, zero_events
from .spin import check_two_s, label_index

STRATEGY_GUARD = 10 ** 7
CHUNK = 1 << 18
GAP_TOL = 1e-10
GREEDY_ABOVE = 20


@dataclass(frozen=True)
class LhvStrategy:
    """Per-party (unprimed outcome, primed outcome), as 2m labels."""

    outcomes: tuple[tuple[int, int], ...]

    @classmethod
    def from_index(cls, index: int, n: int, two_s: int) -> "LhvStrategy":
        d = two_s + 1
        digits = []
        for _ in range(2 * n):
            index, r = divmod(index, d)
            digits.append(r)
        digits.reverse()
        lab = [2 * r - two_s for r in digits]
        return cls(tuple((lab[2 * k], lab[2 * k + 1]) for k in range(n)))

    def index(self, two_s: int) -> int:
        d = two_s + 1
        idx = 0
        for pair in self.outcomes:
            for m in pair:
                idx = idx * d + label_index(two_s, m)
        return idx


def strategy_count(n: int, two_s: int) -> int:
    return (two_s + 1) ** (2 * n)


def _check_space(n: int, two_s: int) -> int:
    check_two_s(two_s)
    total = strategy_count(n, two_s)
    if total > STRATEGY_GUARD:
        raise ResourceLimit(f"{total} local strategies exceed the guard of {STRATEGY_GUARD}")
    return total


def strategy_indicator(strategy: LhvStrategy, event: Event) -> int:
    """1 if the strategy's outcomes at the event's settings form an accepted tuple."""
    if len(event.settings) != len(strategy.outcomes):
        raise PreconditionError("event and strategy disagree on the party count")
    t = tuple(pair[int(p)] for pair, p in zip(strategy.outcomes, event.settings))
    return int(t in event.outcomes)


def _digit_chunks(n: int, two_s: int) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (start index, digits array of shape (chunk, 2n))."""
    d = two_s + 1
    total = strategy_count(n, two_s)
    powers = d ** np.arange(2 * n - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, CHUNK):
        idx = np.arange(start, min(total, start + CHUNK), dtype=np.int64)
        yield start, (idx[:, None] // powers[None, :]) % d


def _indicator(digits: np.ndarray, two_s: int, event: Event) -> np.ndarray:
    hit = np.zeros(digits.shape[0], dtype=bool)
    for t in event.outcomes:
        ok = np.ones(digits.shape[0], dtype=bool)
        for k, (primed, m) in enumerate(zip(event.settings, t)):
            ok &= digits[:, 2 * k + int(primed)] == label_index(two_s, m)
        hit |= ok
    return hit


def _validate(n: int, two_s: int, events: Sequence[Event]) -> None:
    for e in events:
        if len(e.settings) != n:
            raise PreconditionError(f"event {e.describe()} does not have {n} parties")
        e.validate(two_s)


def lhv_max(n: int, two_s: int, zero_events: Sequence[Event],
            objective: Sequence[tuple[Event, float]]) -> tuple[float, LhvStrategy | None, int]:
    """Best local value of ``sum(weight * P(event))`` subject to the zero events.

    Returns ``(max_value, argmax, surviving)``. ``argmax`` is the first
    surviving strategy in index order attaining the maximum. With no surviving
    strategy the value is ``-inf`` and ``argmax`` is None.
    """
    _check_space(n, two_s)
    _validate(n, two_s, list(zero_events) + [e for e, _ in objective])
    best, best_idx, surviving = -np.inf, None, 0
    for start, digits in _digit_chunks(n, two_s):
        alive = np.ones(digits.shape[0], dtype=bool)
        for e in zero_events:
            alive &= ~_indicator(digits, two_s, e)
        count = int(alive.sum())
        if not count:
            continue
        surviving += count
        value = np.zeros(digits.shape[0])
        for e, w in objective:
            value += w * _indicator(digits, two_s, e)
        value[~alive] = -np.inf
        k = int(np.argmax(value))
        if value[k] > best:
            best, best_idx = float(value[k]), start + k
    arg = LhvStrategy.from_index(best_idx, n, two_s) if best_idx is not None else None
    return best, arg, surviving


@lru_cache(maxsize=256)
def _cached_lhv_max(n, two_s, zeros, objective):
    # the bound depends only on the event combinatorics, never on directions
    return lhv_max(n, two_s, zeros, objective)


def _objective(sc: Scenario, mode: str) -> list[tuple[Event, float]]:
    if mode == "legacy":
        return [(target_event(sc.with_legacy_selectors()), 1.0)]
    if mode == "hardy":
        return [(target_event(sc), 1.0)]
    if mode == "cabello":
        return [(target_event(sc), 1.0), (anchor_event(sc), -1.0)]
    raise PreconditionError(f"unknown mode {mode!r}; choose hardy, cabello or legacy")


def _family(mode: str) -> str:
    return {"hardy": "relaxed", "legacy": "legacy", "cabello": "cabello"}[mode]


@dataclass(frozen=True)
class Certificate:
    mode: str
    quantum_value: float
    lhv_bound: float
    gap: float
    max_zero_residual: float
    certified: bool
    strategies_total: int
    strategies_surviving: int
    dims: dict = field(default_factory=dict)


def certify(sc: Scenario, mode: str, solution, dims: dict | None = None) -> Certificate:
    """Compare a quantum solution with the best local model under the same zero events.

    ``mode`` is ``hardy`` (relaxed zeros, objective P(target)), ``legacy``
    (legacy zeros, same objective) or ``cabello`` (objective
    P(target) - P(anchor)).
    """
    objective = _objective(sc, mode)
    zsc = sc.with_legacy_selectors() if mode == "legacy" else sc
    zeros = zero_events(zsc, _family(mode))
    bound, _, surviving = _cached_lhv_max(sc.n, sc.two_s, tuple(zeros), tuple(objective))
    quantum = solution.p - solution.q if mode == "cabello" else solution.p
    gap = quantum - bound
    ok = bool(gap > GAP_TOL and solution.max_zero_residual < GAP_TOL)
    return Certificate(mode, float(quantum), float(bound), float(gap), float(solution.max_zero_residual),
                       ok, strategy_count(sc.n, sc.two_s), surviving, dict(dims or {}))


def _masks(n: int, two_s: int, events: Sequence[Event]) -> list[int]:
    """Each event's hit set over all strategies as a Python int bitmask."""
    out = []
    hits = [[] for _ in events]
    for _, digits in _digit_chunks(n, two_s):
        for h, e in zip(hits, events):
            h.append(_indicator(digits, two_s, e))
    for h in hits:
        bits = np.packbits(np.concatenate(h), bitorder="little")
        out.append(int.from_bytes(bits.tobytes(), "little"))
    return out


def minimal_zero_subset(n: int, two_s: int, zero_events: Sequence[Event],
                        target: Event) -> tuple[tuple[int, ...], bool]:
    """Smallest set of zero events that already forbids every local strategy hitting ``target``.

    Exhaustive by increasing size (lexicographically first among ties) for up
    to 20 events; beyond that a deletion pass from the full set returns an
    irreducible but possibly non-minimum subset, flagged ``exact=False``.
    """
    _check_space(n, two_s)
    _validate(n, two_s, list(zero_events) + [target])
    masks = _masks(n, two_s, list(zero_events) + [target])
    zmask, tmask = masks[:-1], masks[-1]

    def suffices(subset) -> bool:
        covered = 0
        for i in subset:
            covered |= zmask[i]
        return tmask & ~covered == 0

    every = tuple(range(len(zmask)))
    if not suffices(every):
        raise NoContradiction("a local strategy hits the target while respecting every zero event")
    if len(zmask) <= GREEDY_ABOVE:
        for size in range(len(zmask) + 1):
            for subset in itertools.combinations(every, size):
                if suffices(subset):
                    return subset, True
    keep = list(every)
    for i in every:
        trial = [j for j in keep if j != i]
        if suffices(trial):
            keep = trial
    return tuple(keep), False
