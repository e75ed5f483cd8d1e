"""Stage-accurate fixed-point rotator.

The datapath carries x, y and the angle accumulator z in Q(1+guard).b words;
the stored constants (arctan table, scale factor) and the outputs use Q1.b.
Every stage applies the configured rounding once per shifted operand, adds
are exact, and any stage overflow raises.  After the last stage one scaling
multiply per coordinate maps the grown vector back to unit magnitude.

The scaling multiply is the one place a small clamp window applies: K times
the quantized 1/K can exceed 1 by about 1e-5, so for angles near 0 the scaled
x coordinate can land a count or two above the Q1.b maximum.  Those outputs
clamp to full scale (recorded in the trace); anything beyond the window is a
real overflow and still raises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import backend
from .fixed import (Fixed, FixedPointOverflowError, QFormat, RoundingMode,
                    _round_shift, add, from_hex, quantize, shift_right, sub,
                    to_hex, to_real)
from .reference import (ConvergenceRangeError, CordicParams, Mode,
                        atan_table, convergence_range, gain)

# Final-scaling clamp window, in output LSBs.  Grid runs put the worst
# overshoot at 6 counts (truncate mode); 16 leaves margin without masking
# genuine headroom bugs, which overshoot by thousands of counts.
OUTPUT_SATURATION_ULPS = 16

ATAN_ROM_FILENAME = "atan_rom.hex"
SCALE_ROM_FILENAME = "scale_rom.hex"


def xy_format(params: CordicParams) -> QFormat:
    return QFormat(1 + params.guard_int_bits, params.frac_bits)


def angle_format(params: CordicParams) -> QFormat:
    # same headroom policy as x/y: the i0=0 range (1.743 rad) needs the
    # guard bit just as the grown vector does
    return QFormat(1 + params.guard_int_bits, params.frac_bits)


def rom_format(params: CordicParams) -> QFormat:
    return QFormat(1, params.frac_bits)


def output_format(params: CordicParams) -> QFormat:
    return QFormat(1, params.frac_bits)


@dataclass(frozen=True)
class Rom:
    atan_entries: tuple[Fixed, ...]
    inv_gain: Fixed

    @property
    def fmt(self) -> QFormat:
        return self.inv_gain.fmt


@dataclass(frozen=True)
class StageState:
    x: Fixed
    y: Fixed
    z: Fixed


@dataclass(frozen=True)
class StageTrace:
    """states holds N+1 snapshots (input first); injected holds the N
    per-stage rounding-error pairs (e_rx, e_ry) measured against exact
    arithmetic; saturated flags whether the cos / sin output clamped."""

    states: tuple[StageState, ...]
    injected: tuple[tuple[float, float], ...]
    saturated: tuple[bool, bool] = (False, False)


def build_rom(params: CordicParams) -> Rom:
    fmt = rom_format(params)
    entries = tuple(quantize(a, fmt, params.rounding)
                    for a in atan_table(params))
    inv = quantize(gain(params).k_inv, fmt, params.rounding)
    return Rom(entries, inv)


def rotation_init(params: CordicParams) -> tuple[Fixed, Fixed]:
    """Initial vector for rotation mode: (1.0, 0) when the guarded format can
    hold 1.0, else the largest representable value (1 - ulp)."""
    fmt = xy_format(params)
    one = 1 << params.frac_bits
    x0 = Fixed(one, fmt) if one <= fmt.max_raw else Fixed(fmt.max_raw, fmt)
    return x0, Fixed(0, fmt)


def _sigma_for(state: StageState, params: CordicParams) -> int:
    if params.mode is Mode.VECTORING:
        return -1 if state.y.raw > 0 else 1
    return 1 if state.z.raw >= 0 else -1


def _stage_full(state, j, rom, params, sigma):
    sh = params.shift_exponent(j)
    mode = params.rounding
    dx = shift_right(state.y, sh, mode)
    dy = shift_right(state.x, sh, mode)
    alpha = Fixed(rom.atan_entries[j].raw, state.z.fmt)
    if sigma > 0:
        nxt = StageState(sub(state.x, dx), add(state.y, dy),
                         sub(state.z, alpha))
    else:
        nxt = StageState(add(state.x, dx), sub(state.y, dy),
                         add(state.z, alpha))
    # injected rounding error against the exact (unrounded) shift, as exact
    # dyadics: shifted truth = raw * 2^-(b+sh), kept value = dx.raw * 2^-b
    b = params.frac_bits
    e_rx = math.ldexp(-sigma * ((dx.raw << sh) - state.y.raw), -(b + sh))
    e_ry = math.ldexp(sigma * ((dy.raw << sh) - state.x.raw), -(b + sh))
    if mode is not RoundingMode.TRUNCATE:
        eps = math.ldexp(0.5, -b)
        # nearest rounding keeps each component within half an lsb
        assert e_rx * e_rx + e_ry * e_ry <= 2.0 * eps * eps
    return nxt, (e_rx, e_ry)


def stage(s: StageState, j: int, rom: Rom, params: CordicParams) -> StageState:
    """One micro-rotation; direction from z (rotation mode) or from y
    (vectoring mode), ties toward +1."""
    return _stage_full(s, j, rom, params, _sigma_for(s, params))[0]


def _scale_output(v: Fixed, rom: Rom, params: CordicParams):
    ofmt = output_format(params)
    shift = v.fmt.frac_bits + rom.inv_gain.fmt.frac_bits - ofmt.frac_bits
    raw = _round_shift(v.raw * rom.inv_gain.raw, shift, params.rounding)
    if raw > ofmt.max_raw:
        if raw <= ofmt.max_raw + OUTPUT_SATURATION_ULPS:
            return Fixed(ofmt.max_raw, ofmt), True
        raise FixedPointOverflowError(f"scaled output raw {raw} exceeds {ofmt}")
    if raw < ofmt.min_raw:
        if raw >= ofmt.min_raw - OUTPUT_SATURATION_ULPS:
            return Fixed(ofmt.min_raw, ofmt), True
        raise FixedPointOverflowError(f"scaled output raw {raw} exceeds {ofmt}")
    return Fixed(raw, ofmt), False


def _check_theta(theta: Fixed, params: CordicParams) -> Fixed:
    if theta.fmt.frac_bits != params.frac_bits:
        raise ValueError(
            f"theta format {theta.fmt} does not carry {params.frac_bits} "
            "fractional bits")
    afmt = angle_format(params)
    th = to_real(theta)
    # accept angles up to half an lsb past the boundary: quantizing an
    # in-range real can land there
    if abs(th) > convergence_range(params) + afmt.resolution / 2.0:
        raise ConvergenceRangeError(
            f"theta {th!r} outside convergence range "
            f"+-{convergence_range(params)!r}")
    return Fixed(theta.raw, afmt)


def pipeline_rotate(theta: Fixed, params: CordicParams, rom: Rom | None = None):
    """Run the full rotator: returns (cos_out, sin_out, trace)."""
    if params.mode is not Mode.ROTATION:
        raise ValueError("pipeline_rotate needs rotation-mode params")
    if rom is None:
        rom = build_rom(params)
    z0 = _check_theta(theta, params)
    x0, y0 = rotation_init(params)
    state = StageState(x0, y0, z0)
    states = [state]
    injected = []
    for j in range(params.stages):
        sigma = _sigma_for(state, params)
        try:
            state, err = _stage_full(state, j, rom, params, sigma)
        except FixedPointOverflowError as exc:
            raise FixedPointOverflowError(f"stage {j}: {exc}") from None
        states.append(state)
        injected.append(err)
    cos_out, csat = _scale_output(state.x, rom, params)
    sin_out, ssat = _scale_output(state.y, rom, params)
    return cos_out, sin_out, StageTrace(tuple(states), tuple(injected),
                                        (csat, ssat))


def pipeline_vector(v0x: Fixed, v0y: Fixed, params: CordicParams,
                    rom: Rom | None = None):
    """Fixed-point vectoring: drive y to 0; returns (angle, magnitude, trace).

    The angle comes back in the accumulator format, the magnitude in the
    output format after the one-time scaling.
    """
    vparams = replace(params, mode=Mode.VECTORING)
    if rom is None:
        rom = build_rom(vparams)
    xyf = xy_format(vparams)
    if v0x.fmt.frac_bits != vparams.frac_bits or \
            v0y.fmt.frac_bits != vparams.frac_bits:
        raise ValueError("input formats must carry params.frac_bits")
    x0 = Fixed(v0x.raw, xyf)
    y0 = Fixed(v0y.raw, xyf)
    if x0.raw <= 0:
        raise ConvergenceRangeError(f"vectoring needs x > 0, got {to_real(x0)}")
    target = math.atan2(to_real(y0), to_real(x0))
    bound = convergence_range(vparams)
    if abs(target) > bound:
        raise ConvergenceRangeError(
            f"input angle {target!r} outside convergence range +-{bound!r}")
    state = StageState(x0, y0, Fixed(0, angle_format(vparams)))
    states = [state]
    injected = []
    for j in range(vparams.stages):
        sigma = _sigma_for(state, vparams)
        try:
            state, err = _stage_full(state, j, rom, vparams, sigma)
        except FixedPointOverflowError as exc:
            raise FixedPointOverflowError(f"stage {j}: {exc}") from None
        states.append(state)
        injected.append(err)
    magnitude, msat = _scale_output(state.x, rom, vparams)
    return state.z, magnitude, StageTrace(tuple(states), tuple(injected),
                                          (msat, False))


def measured_error(theta: float, params: CordicParams,
                   rom: Rom | None = None) -> tuple[float, float]:
    """Pipeline output minus double-precision cos/sin at theta."""
    thq = quantize(theta, angle_format(params), params.rounding)
    cos_out, sin_out, _ = pipeline_rotate(thq, params, rom)
    return (to_real(cos_out) - math.cos(theta),
            to_real(sin_out) - math.sin(theta))


def kernel_config(params: CordicParams, rom: Rom) -> dict:
    """Static arguments for the backend kernels, derived once per run."""
    xyf = xy_format(params)
    zf = angle_format(params)
    of = output_format(params)
    return dict(
        n=params.stages,
        start_index=params.start_index,
        frac_bits=params.frac_bits,
        rounding=params.rounding.value,
        xy_min=xyf.min_raw, xy_max=xyf.max_raw,
        z_min=zf.min_raw, z_max=zf.max_raw,
        out_min=of.min_raw, out_max=of.max_raw,
        sat_window=OUTPUT_SATURATION_ULPS,
        atan_raws=np.array([e.raw for e in rom.atan_entries], dtype=np.int64),
        inv_gain_raw=rom.inv_gain.raw,
    )


def pipeline_rotate_fast(theta: Fixed, params: CordicParams,
                         rom: Rom | None = None):
    """Kernel-backed twin of pipeline_rotate without trace collection.
    Returns (cos_out, sin_out, sat_flags)."""
    if params.mode is not Mode.ROTATION:
        raise ValueError("pipeline_rotate_fast needs rotation-mode params")
    if rom is None:
        rom = build_rom(params)
    z0 = _check_theta(theta, params)
    x0, y0 = rotation_init(params)
    cfg = kernel_config(params, rom)
    kern = backend.kernels_for(params)
    c, s, flags = kern.pipeline_rotate_raw(z0.raw, x0.raw, y0.raw, **cfg)
    ofmt = output_format(params)
    return Fixed(int(c), ofmt), Fixed(int(s), ofmt), int(flags)


def write_rom_files(rom: Rom, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    atan_path = out / ATAN_ROM_FILENAME
    scale_path = out / SCALE_ROM_FILENAME
    atan_path.write_text(
        "".join(to_hex(e) + "\n" for e in rom.atan_entries))
    scale_path.write_text(to_hex(rom.inv_gain) + "\n")
    return [atan_path, scale_path]


def read_rom_files(params: CordicParams, in_dir) -> Rom:
    fmt = rom_format(params)
    src = Path(in_dir)
    atan_lines = (src / ATAN_ROM_FILENAME).read_text().splitlines()
    if len(atan_lines) != params.stages:
        raise ValueError(
            f"expected {params.stages} table words, got {len(atan_lines)}")
    entries = tuple(from_hex(line, fmt) for line in atan_lines)
    scale_lines = (src / SCALE_ROM_FILENAME).read_text().splitlines()
    if len(scale_lines) != 1:
        raise ValueError(f"expected 1 scale word, got {len(scale_lines)}")
    return Rom(entries, from_hex(scale_lines[0], fmt))


def format_trace(trace: StageTrace) -> str:
    """One line per snapshot: index, x, y, z as fixed-width hex words."""
    lines = [f"{i} {to_hex(s.x)} {to_hex(s.y)} {to_hex(s.z)}"
             for i, s in enumerate(trace.states)]
    return "\n".join(lines) + "\n"
