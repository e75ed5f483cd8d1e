"""Closed-form error budget of the quantized rotator.

Three independent sources are modeled: the residual angle left after finitely
many micro-rotations, the quantization of the stored scale constant, and the
per-stage shift rounding.  Each has a mean-square formula here; the harness
compares their sum against measured pipeline error.

Conventions shared by all formulas: b fractional bits give a rounding unit
eps = 2^-(b+1) (half an lsb); sigma entries are the per-stage direction
decisions; stage j shifts by start_index + j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .reference import CordicParams, propagation_matrix


@dataclass(frozen=True)
class ErrorBreakdown:
    angle_mse: float
    scaling_mse: float
    rounding_mse: float
    total_mse: float
    epsilon: float
    delta: float

    def __post_init__(self):
        if min(self.angle_mse, self.scaling_mse, self.rounding_mse) < 0:
            raise ValueError("mean-square components cannot be negative")


def epsilon(b: int) -> float:
    """Rounding unit: half an lsb, 2^-(b+1)."""
    if b < 0:
        raise ValueError("b must be >= 0")
    return math.ldexp(0.5, -b)


def angle_error_bound(delta: float) -> float:
    """Exact output-error norm for a unit input when the achieved rotation
    is off by delta: 2|sin(delta/2)| (~ |delta| for small delta)."""
    return 2.0 * abs(math.sin(delta / 2.0))


def angle_mse(delta: float) -> float:
    """4 sin^2(delta/2); identically angle_error_bound(delta)**2."""
    s = math.sin(delta / 2.0)
    return 4.0 * (s * s)


def scaling_mse(b: int) -> float:
    """Variance of the quantized scale constant's error, modeled uniform on
    [-2^-(b+1), 2^-(b+1)]: 2^-2b / 12."""
    if b < 1:
        raise ValueError("b must be >= 1")
    return math.ldexp(1.0, -2 * b) / 12.0


def rounding_bound_per_stage(eps: float) -> float:
    """Norm bound of one stage's injected rounding pair: sqrt(2) * eps."""
    if eps < 0:
        raise ValueError("eps must be >= 0")
    return math.sqrt(2.0) * eps


def _check_sigmas(sigmas, params: CordicParams) -> list[int]:
    sig = [int(s) for s in sigmas]
    if len(sig) != params.stages:
        raise ValueError(f"expected {params.stages} directions, got {len(sig)}")
    if any(s not in (-1, 1) for s in sig):
        raise ValueError("directions must be -1 or +1")
    return sig


def rounding_mse(sigmas, b: int, params: CordicParams) -> float:
    """Closed-form accumulated rounding MSE for one direction sequence:

        (4 eps^2 / 3) * sum_j [1 - prod_{i<j} sigma(i) 2^-(start_index+i)]^2

    evaluated exactly in rational arithmetic (empty product = 1, so the
    first term vanishes), then rounded once to float.
    """
    sig = _check_sigmas(sigmas, params)
    eps2 = Fraction(1, 1 << (2 * b + 2))
    total = Fraction(0)
    prod = Fraction(1)
    for j in range(params.stages):
        total += (1 - prod) ** 2
        prod *= Fraction(sig[j], 1 << params.shift_exponent(j))
    return float(Fraction(4, 3) * eps2 * total)


def rounding_mse_expected(params: CordicParams, b: int) -> float:
    """Exact mean of the propagated per-stage noise model.

    Each stage injects an independent pair with components uniform on
    {-eps, 0, +eps}; propagating through the downstream stage matrices gives
    E = (2 eps^2/3) * sum_j ||B(j)||_F^2, and the Frobenius norms collapse to
    running products of the per-stage gains:

        (4 eps^2 / 3) * sum_j prod_{i>j} (1 + 2^-2(start_index+i)).

    Direction-independent: every B(j) has the same norm for any sigmas.
    """
    eps2 = Fraction(1, 1 << (2 * b + 2))
    total = Fraction(0)
    prod = Fraction(1)
    for j in range(params.stages - 1, -1, -1):
        total += prod
        prod *= 1 + Fraction(1, 1 << (2 * params.shift_exponent(j)))
    return float(Fraction(4, 3) * eps2 * total)


def rounding_mse_empirical_reference(sigmas, params: CordicParams,
                                     trials: int, seed: int) -> float:
    """Monte Carlo estimate of E ||sum_j B(j) e(j)||^2 with each component of
    e(j) drawn independently and uniformly from {-eps, 0, +eps}.

    Deterministic for a given seed; single pass, so worker counts cannot
    change the result.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    sig = _check_sigmas(sigmas, params)
    n = params.stages
    mats = np.stack([propagation_matrix(j, sig, params) for j in range(n)])
    eps = epsilon(params.frac_bits)
    rng = np.random.default_rng(seed)
    draws = rng.integers(-1, 2, size=(trials, n, 2)).astype(np.float64) * eps
    out = np.einsum("jab,tjb->ta", mats, draws)
    return float(np.mean(np.sum(out * out, axis=1)))


def total_mse(delta: float, sigmas, b: int,
              params: CordicParams) -> ErrorBreakdown:
    """Compose the three sources; the total is their plain left-to-right
    float sum so callers can reproduce it exactly."""
    a = angle_mse(delta)
    s = scaling_mse(b)
    r = rounding_mse(sigmas, b, params)
    return ErrorBreakdown(angle_mse=a, scaling_mse=s, rounding_mse=r,
                          total_mse=a + s + r, epsilon=epsilon(b), delta=delta)
