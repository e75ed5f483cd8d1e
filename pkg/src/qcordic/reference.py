"""Real-arithmetic rotator model: direction sequences, gain, matrix forms.

Everything here runs in double precision and serves as the yardstick the
fixed-point pipeline is measured against.  The per-stage recurrence lives in
the kernel backend so the Monte Carlo harness and this module share one
bit-identical implementation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import backend
from .fixed import DEFAULT_ROUNDING, RoundingMode


class Mode(enum.Enum):
    ROTATION = "rotation"
    VECTORING = "vectoring"


class ConvergenceRangeError(ValueError):
    """Requested angle (or input vector) is outside the reachable cone."""


@dataclass(frozen=True)
class CordicParams:
    stages: int = 16
    start_index: int = 0
    frac_bits: int = 15
    guard_int_bits: int = 1
    rounding: RoundingMode = DEFAULT_ROUNDING
    mode: Mode = Mode.ROTATION

    def __post_init__(self):
        if self.stages < 1:
            raise ValueError("stages must be >= 1")
        if self.start_index not in (0, 1):
            raise ValueError("start_index must be 0 or 1")
        if self.frac_bits < 1:
            raise ValueError("frac_bits must be >= 1")
        if self.guard_int_bits < 0:
            raise ValueError("guard_int_bits must be >= 0")

    def shift_exponent(self, j: int) -> int:
        """Shift amount used by stage j (0-based)."""
        return self.start_index + j


class Vec2(NamedTuple):
    x: float
    y: float


class Gain(NamedTuple):
    k: float
    k_inv: float


@dataclass(frozen=True)
class SigmaSequence:
    """Greedy direction decisions for one target angle plus the residual
    angle left after the last stage."""

    sigmas: tuple[int, ...]
    residual: float

    def __post_init__(self):
        if any(s not in (-1, 1) for s in self.sigmas):
            raise ValueError("directions must be -1 or +1")

    def __len__(self) -> int:
        return len(self.sigmas)

    def __iter__(self):
        return iter(self.sigmas)

    def __getitem__(self, i):
        return self.sigmas[i]


# "paper": the replication profile -- 16 stages starting at shift 1, which
# matches the documented +-0.9579 rad range; "standard": same datapath with
# the shift-0 stage included (range +-1.7433 rad).
PROFILES = {
    "paper": CordicParams(stages=16, start_index=1, frac_bits=15,
                          guard_int_bits=1,
                          rounding=RoundingMode.NEAREST_TIES_AWAY),
    "standard": CordicParams(stages=16, start_index=0, frac_bits=15,
                             guard_int_bits=1,
                             rounding=RoundingMode.NEAREST_TIES_AWAY),
}


def atan_table(params: CordicParams) -> list[float]:
    """Elementary angles atan(2**-(i0+j)) for j = 0..N-1."""
    return [math.atan(math.ldexp(1.0, -params.shift_exponent(j)))
            for j in range(params.stages)]


def gain(params: CordicParams) -> Gain:
    """Accumulated magnitude growth K of the un-normalized recurrence and its
    reciprocal.  K depends only on stage count and start index."""
    k = 1.0
    for j in range(params.stages):
        k *= math.sqrt(1.0 + math.ldexp(1.0, -2 * params.shift_exponent(j)))
    return Gain(k, 1.0 / k)


def convergence_range(params: CordicParams) -> float:
    """Largest |theta| the direction sequence can reach: sum of the table."""
    return math.fsum(atan_table(params))


def sigma_sequence(theta: float, params: CordicParams) -> SigmaSequence:
    """Greedy angle decomposition: sigma(j) = +1 if the remaining angle is
    >= 0 else -1 (ties take +1).  Residual is theta - sum(sigma * alpha)."""
    bound = convergence_range(params)
    if not abs(theta) <= bound:
        raise ConvergenceRangeError(
            f"theta {theta!r} outside convergence range +-{bound!r}"
        )
    sigmas = []
    z = theta
    for alpha in atan_table(params):
        s = 1 if z >= 0.0 else -1
        sigmas.append(s)
        z -= s * alpha
    return SigmaSequence(tuple(sigmas), z)


def rotation_matrix(i: int, sigma: int) -> np.ndarray:
    """Un-normalized stage matrix P(i) = [[1, -sigma*2^-i], [sigma*2^-i, 1]].

    i is the shift exponent itself, not the stage position.
    """
    if sigma not in (-1, 1):
        raise ValueError("sigma must be -1 or +1")
    t = sigma * math.ldexp(1.0, -i)
    return np.array([[1.0, -t], [t, 1.0]])


def propagation_matrix(i: int, sigmas: Sequence[int],
                       params: CordicParams) -> np.ndarray:
    """Product of the stage matrices downstream of stage i:
    B(i) = P(N-1) ... P(i+1), with B(N-1) = I.

    An error injected at the output of stage i reaches the pipeline output
    multiplied by B(i).
    """
    n = params.stages
    if len(sigmas) != n:
        raise ValueError(f"expected {n} directions, got {len(sigmas)}")
    if not 0 <= i < n:
        raise ValueError(f"stage index {i} outside 0..{n - 1}")
    out = np.eye(2)
    # build by the recurrence B(i) = B(i+1) @ P(i+1)
    for j in range(n - 1, i, -1):
        out = out @ rotation_matrix(params.shift_exponent(j), sigmas[j])
    return out


def rotate_reference(v0: Vec2, theta: float,
                     params: CordicParams) -> tuple[Vec2, float]:
    """Run the double-precision recurrence with the greedy directions and the
    exact final gain correction.  Returns the rotated vector and the residual
    angle."""
    bound = convergence_range(params)
    if not abs(theta) <= bound:
        raise ConvergenceRangeError(
            f"theta {theta!r} outside convergence range +-{bound!r}"
        )
    tbl = np.asarray(atan_table(params), dtype=np.float64)
    x, y, residual = backend.kernels.rotate_ref(
        float(v0.x), float(v0.y), float(theta),
        params.stages, params.start_index, tbl, gain(params).k_inv,
    )
    return Vec2(float(x), float(y)), float(residual)


def vector_reference(v0: Vec2, params: CordicParams) -> tuple[float, float]:
    """Vectoring mode on the reference model: drive y to zero, return the
    accumulated angle and the gain-corrected magnitude."""
    if not v0.x > 0.0:
        raise ConvergenceRangeError(
            f"vectoring needs x > 0, got x = {v0.x!r}"
        )
    bound = convergence_range(params)
    target = math.atan2(v0.y, v0.x)
    if abs(target) > bound:
        raise ConvergenceRangeError(
            f"input angle {target!r} outside convergence range +-{bound!r}"
        )
    x, y = float(v0.x), float(v0.y)
    angle = 0.0
    for j, alpha in enumerate(atan_table(params)):
        s = -1 if y > 0.0 else 1
        t = math.ldexp(1.0, -params.shift_exponent(j))
        x, y = x - s * t * y, y + s * t * x
        angle -= s * alpha
    return angle, x * gain(params).k_inv
