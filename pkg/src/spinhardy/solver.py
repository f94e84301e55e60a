"""Solution subspaces, extremal states, probabilities and sampling.

The solution space of a constraint set is the orthogonal complement of the
span of its zero vectors. For Hardy-type problems the reported state is the
normalized projection of the target vector onto that complement: it has the
largest target probability of any state satisfying the zero constraints. For
Cabello-type problems the state is the top eigenvector of the compressed
operator P_D - P_A on the complement.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cxmat import (
    DEFAULT_TOL,
    SubspaceBasis,
    as_cvec,
    hermitian_eig,
    numeric_rank,
    orthonormal_complement,
    phase_fix,
    project_onto_span,
)
from .errors import NoCabelloGap, NoHardyState, PreconditionError
from .scenario import (
    ConstraintSet,
    Event,
    Scenario,
    cabello_constraints,
    legacy_constraints,
    relaxed_constraints,
    target_vector,
)
from .spin import MeasurementBasis, joint_vector

NORM_EPS = 1e-12
PSD_TOL = -1e-10


@dataclass(frozen=True, eq=False)
class SubspaceReport:
    basis_M_bar: SubspaceBasis
    dim_M: int
    dim_M_bar: int
    dim_M_bar_prime: int
    constraints: ConstraintSet

    @property
    def ambient_dim(self) -> int:
        return self.basis_M_bar.ambient_dim

    def dims(self) -> dict[str, int]:
        return {"M": self.dim_M, "M_bar": self.dim_M_bar, "M_bar_prime": self.dim_M_bar_prime}


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise PreconditionError("density matrix must be square")
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise PreconditionError("density matrix must be Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-10:
            raise PreconditionError("density matrix must have unit trace")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return hermitian_eig(self.matrix)[0]


@dataclass(frozen=True, eq=False)
class HardySolution:
    state: np.ndarray | DensityMatrix
    p: float
    q: float = 0.0
    max_zero_residual: float = 0.0
    nondegenerate: bool = True
    value: float | None = None

    @property
    def gap(self) -> float:
        return self.p - self.q


def hardy_subspace(cs: ConstraintSet, ambient_dim: int, target, tol: float = DEFAULT_TOL) -> SubspaceReport:
    target = as_cvec(target)
    if target.shape[0] != ambient_dim or cs.ambient_dim != ambient_dim:
        raise PreconditionError("constraint vectors, target and ambient_dim disagree")
    vecs = list(cs.vectors)
    comp = orthonormal_complement(vecs, ambient_dim, tol)
    rank = ambient_dim - comp.dim
    rank_prime = numeric_rank(vecs + [target], tol)
    return SubspaceReport(comp, rank, comp.dim, ambient_dim - rank_prime, cs)


def zero_residual(state, cs: ConstraintSet) -> float:
    """Largest probability the state assigns to any zero vector."""
    if not len(cs):
        return 0.0
    if isinstance(state, DensityMatrix):
        return float(max(np.vdot(v, state.matrix @ v).real for v in cs.vectors))
    return float(max(abs(np.vdot(v, state)) ** 2 for v in cs.vectors))


def max_hardy_state(rep: SubspaceReport, target) -> HardySolution:
    """Unit vector in the solution space with the largest overlap with ``target``."""
    target = as_cvec(target)
    proj = project_onto_span(target, rep.basis_M_bar)
    nrm = float(np.linalg.norm(proj))
    if nrm < NORM_EPS:
        raise NoHardyState("target vector lies in the span of the zero constraints; p = 0 for every solution")
    state = phase_fix(proj / nrm)
    p = abs(np.vdot(target, state)) ** 2
    return HardySolution(state, float(p), 0.0, zero_residual(state, rep.constraints), True, float(p))


def cabello_operator(rep: SubspaceReport, anchor, target) -> np.ndarray:
    """P_D - P_A compressed to the solution space, in the basis_M_bar coordinates."""
    b = rep.basis_M_bar.vectors
    u = b.conj() @ as_cvec(target)
    v = b.conj() @ as_cvec(anchor)
    return np.outer(u, u.conj()) - np.outer(v, v.conj())


def cabello_spectrum(rep: SubspaceReport, anchor, target) -> tuple[np.ndarray, list[np.ndarray]]:
    """Eigenvalues (descending) and the matching states in the ambient space."""
    if rep.dim_M_bar == 0:
        return np.zeros(0), []
    evals, vecs = hermitian_eig(cabello_operator(rep, anchor, target))
    b = rep.basis_M_bar.vectors
    states = [phase_fix(c @ b) for c in vecs.vectors[::-1]]
    return evals[::-1].copy(), states


def _cabello_solution(state: np.ndarray, rep: SubspaceReport, anchor, target, value: float) -> HardySolution:
    p = float(abs(np.vdot(target, state)) ** 2)
    q = float(abs(np.vdot(anchor, state)) ** 2)
    return HardySolution(state, p, q, zero_residual(state, rep.constraints), q >= NORM_EPS, value)


def max_cabello_state(rep: SubspaceReport, anchor, target) -> HardySolution:
    """State in the solution space maximizing P(target) - P(anchor).

    ``nondegenerate`` is False when the maximizer is orthogonal to the anchor
    (q below 1e-12), i.e. the Hardy limit of the argument.
    """
    anchor, target = as_cvec(anchor), as_cvec(target)
    evals, states = cabello_spectrum(rep, anchor, target)
    if not len(evals) or evals[0] <= NORM_EPS:
        raise NoCabelloGap("no state in the solution space has P(target) > P(anchor)")
    return _cabello_solution(states[0], rep, anchor, target, float(evals[0]))


def cabello_pair(rep: SubspaceReport, anchor, target) -> tuple[HardySolution, HardySolution]:
    """Two distinct solutions with P(target) - P(anchor) > 0.

    The compressed operator is a difference of two rank-one projectors, so it
    has at most one positive eigenvalue. The second solution therefore tilts
    the top eigenvector toward the next eigenvector until its value drops to
    half the top eigenvalue.
    """
    anchor, target = as_cvec(anchor), as_cvec(target)
    evals, states = cabello_spectrum(rep, anchor, target)
    if not len(evals) or evals[0] <= NORM_EPS:
        raise NoCabelloGap("no state in the solution space has P(target) > P(anchor)")
    if len(evals) < 2:
        raise NoCabelloGap("solution space is one-dimensional; only one solution ray exists")
    top, nxt = evals[0], evals[1]
    sin2 = 0.5 * top / (top - nxt)
    alpha = math.asin(math.sqrt(min(1.0, sin2)))
    tilted = phase_fix(math.cos(alpha) * states[0] + math.sin(alpha) * states[1])
    value = top * math.cos(alpha) ** 2 + nxt * math.sin(alpha) ** 2
    first = _cabello_solution(states[0], rep, anchor, target, float(top))
    second = _cabello_solution(tilted, rep, anchor, target, float(value))
    return first, second


def mix(states: Sequence[np.ndarray], weights: Sequence[float]) -> DensityMatrix:
    if len(states) != len(weights) or not states:
        raise PreconditionError("mix needs one weight per state")
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise PreconditionError("weights must be nonnegative and sum to 1")
    dims = {len(s) for s in states}
    if len(dims) != 1:
        raise PreconditionError("states must share one dimension")
    rho = sum(wk * np.outer(s, np.conj(s)) for wk, s in zip(w, states))
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho)


def mixed_solution(solutions: Sequence[HardySolution], weights: Sequence[float],
                   rep: SubspaceReport, anchor, target) -> HardySolution:
    rho = mix([s.state for s in solutions], weights)
    p = float(np.vdot(target, rho.matrix @ target).real)
    q = float(np.vdot(anchor, rho.matrix @ anchor).real) if anchor is not None else 0.0
    return HardySolution(rho, p, q, zero_residual(rho, rep.constraints), q >= NORM_EPS, p - q)


def _event_matches(bases: Sequence[MeasurementBasis], event: Event) -> None:
    if len(bases) != len(event.settings):
        raise PreconditionError("one measurement basis per party is required")


def quantum_probability(state, bases: Sequence[MeasurementBasis], event: Event) -> float:
    """Born-rule probability of ``event`` with party k measured in ``bases[k]``.

    ``bases`` must already reflect the event's settings (primed or not).
    """
    _event_matches(bases, event)
    total = 0.0
    for t in event.outcomes:
        v = joint_vector(bases, t)
        if isinstance(state, DensityMatrix):
            total += np.vdot(v, state.matrix @ v).real
        else:
            total += abs(np.vdot(v, state)) ** 2
    return float(min(1.0, max(0.0, total)))


def outcome_distribution(state, bases: Sequence[MeasurementBasis]) -> tuple[list[tuple[int, ...]], np.ndarray]:
    """All outcome tuples (lexicographic, ascending m) with their probabilities."""
    two_s = bases[0].two_s
    ms = list(range(-two_s, two_s + 1, 2))
    tuples = list(itertools.product(ms, repeat=len(bases)))
    # rows of the product basis matrix follow the same lexicographic order
    big = bases[0].eigenvectors
    for b in bases[1:]:
        big = np.kron(big, b.eigenvectors)
    if isinstance(state, DensityMatrix):
        probs = np.einsum("ij,jk,ik->i", big.conj(), state.matrix, big).real
    else:
        probs = np.abs(big.conj() @ state) ** 2
    probs = np.clip(probs, 0.0, None)
    return tuples, probs / probs.sum()


def sample_outcomes(state, bases: Sequence[MeasurementBasis], shots: int,
                    seed: int | np.random.Generator) -> dict[tuple[int, ...], int]:
    """Multinomial draw of ``shots`` joint outcomes; deterministic given ``seed``."""
    if shots < 1:
        raise PreconditionError("shots must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    tuples, probs = outcome_distribution(state, bases)
    counts = rng.multinomial(shots, probs)
    return {t: int(c) for t, c in zip(tuples, counts)}


def solve_scenario(sc: Scenario, mode: str, tol: float = DEFAULT_TOL) -> tuple[SubspaceReport, HardySolution]:
    """Subspace report and extremal solution for ``hardy``, ``legacy`` or ``cabello`` mode.

    Raises NoHardyState / NoCabelloGap when no valid solution exists.
    """
    if mode == "hardy":
        cs, target = relaxed_constraints(sc), target_vector(sc)
    elif mode == "legacy":
        cs, target = legacy_constraints(sc), target_vector(sc.with_legacy_selectors())
    elif mode == "cabello":
        cs, anchor, target = cabello_constraints(sc)
        rep = hardy_subspace(cs, sc.dim, target, tol)
        return rep, max_cabello_state(rep, anchor, target)
    else:
        raise PreconditionError(f"unknown mode {mode!r}; choose hardy, cabello or legacy")
    rep = hardy_subspace(cs, sc.dim, target, tol)
    return rep, max_hardy_state(rep, target)
