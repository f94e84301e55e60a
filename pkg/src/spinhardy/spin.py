"""Spin-s operators, directional measurement bases and joint product vectors.

Outcomes are exact: a spin projection m is always carried as the integer
``two_m = 2m``, and a spin s as ``two_s = 2s``. Storage order inside a basis
is ascending in m, so index 0 is m = -s.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Sequence

import numpy as np

from .cxmat import hermitian_eig
from .errors import ConsistencyError, PreconditionError

LABEL_TOL = 1e-8


def check_two_s(two_s: int) -> int:
    if int(two_s) != two_s or two_s < 1:
        raise PreconditionError(f"two_s must be a positive integer, got {two_s!r}")
    return int(two_s)


def labels(two_s: int) -> list[int]:
    """All outcome labels 2m for spin s, ascending from -2s to +2s."""
    check_two_s(two_s)
    return list(range(-two_s, two_s + 1, 2))


def check_label(two_s: int, two_m: int) -> int:
    if int(two_m) != two_m or abs(two_m) > two_s or (two_m - two_s) % 2:
        raise PreconditionError(f"label 2m={two_m!r} is not a valid outcome for 2s={two_s}")
    return int(two_m)


def label_index(two_s: int, two_m: int) -> int:
    """Storage index of outcome ``two_m``: (m + s)."""
    return (check_label(two_s, two_m) + two_s) // 2


def format_label(two_m: int) -> str:
    """Human form of a label: ``+1/2``, ``-1``, ``0``."""
    if two_m == 0:
        return "0"
    sign = "+" if two_m > 0 else "-"
    mag = abs(two_m)
    return f"{sign}{mag // 2}" if mag % 2 == 0 else f"{sign}{mag}/2"


def format_spin(two_s: int) -> str:
    return str(two_s // 2) if two_s % 2 == 0 else f"{two_s}/2"


@dataclass(frozen=True)
class Direction:
    x: float
    y: float
    z: float

    def __post_init__(self):
        nrm = math.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2)
        if abs(nrm - 1.0) > 1e-12:
            raise PreconditionError(f"direction ({self.x}, {self.y}, {self.z}) is not a unit vector")

    @classmethod
    def from_vector(cls, v: Sequence[float]) -> "Direction":
        """Build from any nonzero Cartesian triple, normalizing it."""
        v = [float(c) for c in v]
        if len(v) != 3:
            raise PreconditionError(f"direction needs 3 components, got {len(v)}")
        nrm = math.sqrt(sum(c * c for c in v))
        if nrm == 0.0 or not math.isfinite(nrm):
            raise PreconditionError("direction vector must be finite and nonzero")
        return cls(v[0] / nrm, v[1] / nrm, v[2] / nrm)

    @classmethod
    def from_angles(cls, theta: float, phi: float = 0.0) -> "Direction":
        st = math.sin(theta)
        return cls.from_vector((st * math.cos(phi), st * math.sin(phi), math.cos(theta)))

    def angles(self) -> tuple[float, float]:
        """(theta, phi) in radians."""
        return math.acos(max(-1.0, min(1.0, self.z))), math.atan2(self.y, self.x)

    def __neg__(self) -> "Direction":
        return Direction(-self.x, -self.y, -self.z)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


Z_AXIS = Direction(0.0, 0.0, 1.0)
X_AXIS = Direction(1.0, 0.0, 0.0)


def random_direction(rng: np.random.Generator) -> Direction:
    """Uniform point on the sphere: cos(theta) ~ U[-1, 1], phi ~ U[0, 2pi)."""
    cos_t = rng.uniform(-1.0, 1.0)
    phi = rng.uniform(0.0, 2.0 * math.pi)
    sin_t = math.sqrt(max(0.0, 1.0 - cos_t * cos_t))
    return Direction.from_vector((sin_t * math.cos(phi), sin_t * math.sin(phi), cos_t))


@lru_cache(maxsize=32)
def spin_operators(two_s: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (Sx, Sy, Sz) for spin s = two_s / 2 in ascending-m order."""
    check_two_s(two_s)
    s = two_s / 2
    dim = two_s + 1
    ms = np.arange(-two_s, two_s + 1, 2) / 2
    splus = np.zeros((dim, dim), dtype=complex)
    for k in range(dim - 1):
        m = ms[k]
        splus[k + 1, k] = math.sqrt(s * (s + 1) - m * (m + 1))
    sminus = splus.conj().T
    sx = 0.5 * (splus + sminus)
    sy = -0.5j * (splus - sminus)
    sz = np.diag(ms).astype(complex)
    for op in (sx, sy, sz):
        op.setflags(write=False)
    return sx, sy, sz


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """Eigenbasis of the spin component along ``direction``.

    ``eigenvectors[k]`` belongs to m = -s + k.
    """

    two_s: int
    direction: Direction
    eigenvectors: np.ndarray

    def vector(self, two_m: int) -> np.ndarray:
        return self.eigenvectors[label_index(self.two_s, two_m)]


def spin_component(two_s: int, n: Direction) -> np.ndarray:
    sx, sy, sz = spin_operators(two_s)
    return n.x * sx + n.y * sy + n.z * sz


@lru_cache(maxsize=4096)
def direction_basis(two_s: int, n: Direction) -> MeasurementBasis:
    check_two_s(two_s)
    evals, vecs = hermitian_eig(spin_component(two_s, n))
    expected = np.arange(-two_s, two_s + 1, 2) / 2
    err = np.max(np.abs(evals - expected))
    if err > LABEL_TOL:
        raise ConsistencyError(
            f"spin component eigenvalues {evals} miss the half-integer ladder by {err:.3g}"
        )
    ev = vecs.vectors.copy()
    ev.setflags(write=False)
    return MeasurementBasis(two_s, n, ev)


def joint_vector(bases: Sequence[MeasurementBasis], outcomes: Sequence[int]) -> np.ndarray:
    """Tensor product of the chosen eigenvectors, party 0 leftmost."""
    if len(bases) != len(outcomes) or not bases:
        raise PreconditionError("joint_vector needs one outcome per basis")
    return reduce(np.kron, [b.vector(m) for b, m in zip(bases, outcomes)])


def joint_index(two_s: int, outcomes: Sequence[int]) -> int:
    """Index of a product of standard-order outcomes: sum_k (m_k + s)(2s+1)^(n-1-k)."""
    d = two_s + 1
    idx = 0
    for m in outcomes:
        idx = idx * d + label_index(two_s, m)
    return idx
