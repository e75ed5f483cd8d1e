"""Experiment harness: the published angle grid, Monte Carlo error
measurement against theory, bit-width sweeps, constant-table export, and
report serialization.

Reproducibility rules: one central generator seeds every run, trials are
split into contiguous slices per worker, and reductions use exact summation
in a fixed order, so results are byte-identical across worker counts.
"""

from __future__ import annotations

import json
import math
import multiprocessing
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import backend
from .error_model import (ErrorBreakdown, epsilon, rounding_mse,
                          rounding_mse_expected, scaling_mse)
from .fixed import (Fixed, FixedPointOverflowError, RoundingMode,
                    _round_ratio, quantize, to_real)
from .pipeline import (angle_format, build_rom, kernel_config, measured_error,
                       pipeline_rotate_fast, rotation_init, write_rom_files)
from .reference import (ConvergenceRangeError, CordicParams, Mode, PROFILES,
                        atan_table, convergence_range, gain, sigma_sequence)

# The 19-angle grid exactly as published (nominal values; they already sit
# close to the Q1.15 lattice).
TABLE1_ANGLES = (
    -0.9000, -0.8000, -0.7000, -0.6001, -0.5001, -0.4001, -0.3001,
    -0.2002, -0.1002, -0.0002, 0.0998, 0.1997, 0.2997, 0.3997,
    0.4997, 0.5996, 0.6996, 0.7996, 0.8996,
)

TABLE1_CSV_HEADER = "angle_rad,cos_err,sin_err"

# How many leading trials feed the per-angle closed-form rounding average
# (exact rational evaluation per angle is too slow to run on every trial).
ROUNDING_SUBSAMPLE = 512


@dataclass(frozen=True)
class Table1Row:
    angle_rad: float
    angle_quantized: float
    cos_err: float
    sin_err: float


@dataclass(frozen=True)
class MseReport:
    trials: int
    seed: int
    empirical_mse: float
    theoretical: ErrorBreakdown
    rounding_closed_form_vs_propagated_ratio: float
    saturated_outputs: int
    params: CordicParams


def run_table1(params: CordicParams | None = None,
               angle_grid=None) -> list[Table1Row]:
    """One row per angle: quantize, rotate, compare against library cos/sin
    at the quantized angle."""
    if params is None:
        params = PROFILES["paper"]
    if angle_grid is None:
        angle_grid = TABLE1_ANGLES
    bound = convergence_range(params)
    rom = build_rom(params)
    afmt = angle_format(params)
    rows = []
    for nominal in angle_grid:
        if not abs(nominal) <= bound:
            raise ConvergenceRangeError(
                f"angle {nominal!r} outside convergence range +-{bound!r}")
        thq = to_real(quantize(nominal, afmt, params.rounding))
        ce, se = measured_error(thq, params, rom)
        rows.append(Table1Row(nominal, thq, ce, se))
    return rows


def _clamp_raw_bound(params: CordicParams) -> int:
    """Largest raw angle word whose value stays inside the convergence
    range (computed exactly)."""
    bound = Fraction(convergence_range(params)) * (1 << params.frac_bits)
    raw = int(bound)  # floor for positive values
    return min(raw, angle_format(params).max_raw)


def _quantize_angles(thetas: np.ndarray, params: CordicParams) -> np.ndarray:
    """Vectorized nearest-ties-away quantization of a batch of angles onto
    the accumulator lattice, clamped into the convergence range.

    Bit-identical to the scalar quantize() for |theta|*2^b < 2^52: the
    scaling by a power of two is exact, and floor/compare arithmetic on the
    scaled values is exact in doubles.
    """
    scaled = thetas * float(1 << params.frac_bits)
    floors = np.floor(scaled)
    frac = scaled - floors
    up = (frac > 0.5) | ((frac == 0.5) & (scaled >= 0.0))
    raws = floors.astype(np.int64) + up.astype(np.int64)
    lim = _clamp_raw_bound(params)
    return np.clip(raws, -lim, lim)


def _mc_slice(args):
    raws, params, rom = args
    kern = backend.kernels_for(params)
    cfg = kernel_config(params, rom)
    x0, y0 = rotation_init(params)
    sq = np.empty(len(raws), dtype=np.float64)
    res = np.empty(len(raws), dtype=np.float64)
    tbl = np.asarray(atan_table(params), dtype=np.float64)
    sat = kern.mc_block(raws, x0.raw, y0.raw, to_real(x0), to_real(y0),
                        sat_window=cfg["sat_window"],
                        n=cfg["n"], start_index=cfg["start_index"],
                        frac_bits=cfg["frac_bits"], rounding=cfg["rounding"],
                        xy_min=cfg["xy_min"], xy_max=cfg["xy_max"],
                        z_min=cfg["z_min"], z_max=cfg["z_max"],
                        out_min=cfg["out_min"], out_max=cfg["out_max"],
                        atan_raws=cfg["atan_raws"],
                        inv_gain_raw=cfg["inv_gain_raw"],
                        atan_tbl=tbl, k_inv=gain(params).k_inv,
                        sq_err=sq, residual=res)
    return sq, res, sat


def monte_carlo_mse(params: CordicParams, trials: int, seed: int,
                    workers: int = 1) -> MseReport:
    """Uniform angles over the convergence range, quantized, pushed through
    the fixed-point pipeline and the double-precision reference; empirical
    mean squared output difference against the theoretical budget."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if params.mode is not Mode.ROTATION:
        raise ValueError("monte_carlo_mse needs rotation-mode params")
    bound = convergence_range(params)
    rng = np.random.default_rng(seed)
    thetas = rng.uniform(-bound, bound, trials)
    raws = _quantize_angles(thetas, params)
    rom = build_rom(params)

    if workers <= 1:
        parts = [_mc_slice((raws, params, rom))]
    else:
        chunks = np.array_split(raws, workers)
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(workers) as pool:
            parts = pool.map(_mc_slice,
                             [(c, params, rom) for c in chunks])
    sq_err = np.concatenate([p[0] for p in parts])
    residual = np.concatenate([p[1] for p in parts])
    saturated = sum(p[2] for p in parts)

    empirical = math.fsum(sq_err) / trials

    # theory: angle term averaged per trial, rounding term averaged over a
    # fixed leading subsample of direction sequences, scale term constant
    half = residual * 0.5
    angle_terms = 4.0 * np.sin(half) ** 2
    angle_component = math.fsum(angle_terms) / trials

    b = params.frac_bits
    sub = raws[:min(trials, ROUNDING_SUBSAMPLE)]
    vals = []
    for raw in sub:
        theta_q = math.ldexp(int(raw), -b)
        sig = sigma_sequence(theta_q, params)
        vals.append(rounding_mse(sig, b, params))
    rounding_component = math.fsum(vals) / len(vals)

    scale_component = scaling_mse(b)
    delta_rms = math.sqrt(math.fsum(residual * residual) / trials)
    breakdown = ErrorBreakdown(
        angle_mse=angle_component,
        scaling_mse=scale_component,
        rounding_mse=rounding_component,
        total_mse=angle_component + scale_component + rounding_component,
        epsilon=epsilon(b),
        delta=delta_rms,
    )
    ratio = rounding_component / rounding_mse_expected(params, b)
    return MseReport(trials=trials, seed=seed, empirical_mse=empirical,
                     theoretical=breakdown,
                     rounding_closed_form_vs_propagated_ratio=ratio,
                     saturated_outputs=int(saturated), params=params)


def sweep_bits(params: CordicParams, b_values, trials: int, seed: int,
               workers: int = 1) -> list[tuple[int, MseReport]]:
    """One report per fractional bit width, all with the same seed."""
    out = []
    for b in b_values:
        p = replace(params, frac_bits=b)
        out.append((b, monte_carlo_mse(p, trials, seed, workers)))
    return out


def export_rom(params: CordicParams, out_dir) -> list[Path]:
    return write_rom_files(build_rom(params), out_dir)


def table1_to_csv(rows, paper_format: bool = False) -> str:
    """CSV with full-precision (shortest round-trip) values, or fixed
    4-decimal signed rendering when paper_format is set."""
    lines = [TABLE1_CSV_HEADER]
    for r in rows:
        if paper_format:
            lines.append(f"{r.angle_rad:.4f},{r.cos_err:.4f},{r.sin_err:.4f}")
        else:
            lines.append(f"{r.angle_rad!r},{r.cos_err!r},{r.sin_err!r}")
    return "\n".join(lines) + "\n"


def report_to_json(report: MseReport) -> str:
    """Byte-stable JSON: fixed key order, shortest round-trip floats."""
    p = report.params
    t = report.theoretical
    doc = {
        "trials": report.trials,
        "seed": report.seed,
        "params": {
            "stages": p.stages,
            "start_index": p.start_index,
            "frac_bits": p.frac_bits,
            "guard_int_bits": p.guard_int_bits,
            "rounding": p.rounding.name,
            "mode": p.mode.value,
        },
        "empirical_mse": report.empirical_mse,
        "theoretical": {
            "angle_mse": t.angle_mse,
            "scaling_mse": t.scaling_mse,
            "rounding_mse": t.rounding_mse,
            "total_mse": t.total_mse,
            "epsilon": t.epsilon,
            "delta": t.delta,
        },
        "rounding_closed_form_vs_propagated_ratio":
            report.rounding_closed_form_vs_propagated_ratio,
        "saturated_outputs": report.saturated_outputs,
    }
    return json.dumps(doc, indent=2) + "\n"


def report_from_json(text: str) -> MseReport:
    doc = json.loads(text)
    p = doc["params"]
    params = CordicParams(stages=p["stages"], start_index=p["start_index"],
                          frac_bits=p["frac_bits"],
                          guard_int_bits=p["guard_int_bits"],
                          rounding=RoundingMode[p["rounding"]],
                          mode=Mode(p["mode"]))
    t = doc["theoretical"]
    breakdown = ErrorBreakdown(angle_mse=t["angle_mse"],
                               scaling_mse=t["scaling_mse"],
                               rounding_mse=t["rounding_mse"],
                               total_mse=t["total_mse"],
                               epsilon=t["epsilon"], delta=t["delta"])
    return MseReport(
        trials=doc["trials"], seed=doc["seed"],
        empirical_mse=doc["empirical_mse"], theoretical=breakdown,
        rounding_closed_form_vs_propagated_ratio=doc[
            "rounding_closed_form_vs_propagated_ratio"],
        saturated_outputs=doc["saturated_outputs"], params=params)


def overflow_scan(params: CordicParams, count: int = 10000) -> tuple[int, int]:
    """Sweep a uniform angle grid across the full convergence range; returns
    (overflow_count, saturated_count) from the fast pipeline path."""
    if count < 2:
        raise ValueError("count must be >= 2")
    bound = convergence_range(params)
    rom = build_rom(params)
    afmt = angle_format(params)
    lim = _clamp_raw_bound(params)
    overflows = 0
    saturated = 0
    for k in range(count):
        theta = -bound + (2.0 * bound) * k / (count - 1)
        # round onto the lattice, then clamp into both the range and the
        # format (a guardless format may not even hold the range endpoints)
        scaled = Fraction(theta) * (1 << params.frac_bits)
        raw = _round_ratio(scaled.numerator, scaled.denominator,
                           params.rounding)
        raw = max(-lim, min(lim, raw))
        try:
            _, _, flags = pipeline_rotate_fast(Fixed(raw, afmt), params, rom)
        except FixedPointOverflowError:
            overflows += 1
        else:
            if flags:
                saturated += 1
    return overflows, saturated
