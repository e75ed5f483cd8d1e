"""Pure-Python kernels: the per-trial hot loops.

This module mirrors qcordic._kernels (the Cython extension) operation for
operation.  Both must produce bit-identical results -- tests enforce it --
so keep the arithmetic structure in sync when editing either file.
"""

from __future__ import annotations

import math

from .fixed import FixedPointOverflowError

# rounding codes, fixed to RoundingMode values
ROUND_AWAY = 0
ROUND_EVEN = 1
ROUND_TRUNC = 2


def _rshift(v: int, s: int, code: int) -> int:
    """Round v / 2**s to an integer under the given mode code."""
    if s <= 0:
        return v << -s
    if code == ROUND_TRUNC:
        return v >> s
    half = 1 << (s - 1)
    if code == ROUND_AWAY:
        if v >= 0:
            return (v + half) >> s
        return -((-v + half) >> s)
    q = v >> s
    r = v - (q << s)
    if r > half or (r == half and q & 1):
        q += 1
    return q


def rotate_ref(x0, y0, theta, n, start_index, atan_tbl, k_inv):
    """Double-precision micro-rotation recurrence, greedy directions, one
    final scaling by k_inv.  Returns (x, y, residual_angle)."""
    tbl = [float(v) for v in atan_tbl]
    x = float(x0)
    y = float(y0)
    z = float(theta)
    for j in range(n):
        if z >= 0.0:
            t = math.ldexp(1.0, -(start_index + j))
            a = tbl[j]
        else:
            t = -math.ldexp(1.0, -(start_index + j))
            a = -tbl[j]
        nx = x - t * y
        ny = y + t * x
        x = nx
        y = ny
        z = z - a
    return x * k_inv, y * k_inv, z


def pipeline_rotate_raw(theta_raw, x0_raw, y0_raw, n, start_index, frac_bits,
                        rounding, xy_min, xy_max, z_min, z_max,
                        out_min, out_max, sat_window,
                        atan_raws, inv_gain_raw):
    """Integer pipeline: n shift-add stages then one scaling multiply.

    Returns (cos_raw, sin_raw, sat_flags) with sat_flags bit0 set when the
    cos output clamped and bit1 when sin did.  Raises on stage overflow or
    when a scaled output lands beyond the saturation window.
    """
    araws = [int(v) for v in atan_raws]
    x = int(x0_raw)
    y = int(y0_raw)
    z = int(theta_raw)
    for j in range(n):
        samt = start_index + j
        dx = _rshift(y, samt, rounding)
        dy = _rshift(x, samt, rounding)
        aj = araws[j]
        if z >= 0:
            x = x - dx
            y = y + dy
            z = z - aj
        else:
            x = x + dx
            y = y - dy
            z = z + aj
        if x < xy_min or x > xy_max:
            raise FixedPointOverflowError(f"x overflow at stage {j}: raw {x}")
        if y < xy_min or y > xy_max:
            raise FixedPointOverflowError(f"y overflow at stage {j}: raw {y}")
        if z < z_min or z > z_max:
            raise FixedPointOverflowError(f"z overflow at stage {j}: raw {z}")
    flags = 0
    c = _rshift(x * inv_gain_raw, frac_bits, rounding)
    s = _rshift(y * inv_gain_raw, frac_bits, rounding)
    if c > out_max:
        if c > out_max + sat_window:
            raise FixedPointOverflowError(f"cos output overflow: raw {c}")
        c = out_max
        flags |= 1
    elif c < out_min:
        if c < out_min - sat_window:
            raise FixedPointOverflowError(f"cos output overflow: raw {c}")
        c = out_min
        flags |= 1
    if s > out_max:
        if s > out_max + sat_window:
            raise FixedPointOverflowError(f"sin output overflow: raw {s}")
        s = out_max
        flags |= 2
    elif s < out_min:
        if s < out_min - sat_window:
            raise FixedPointOverflowError(f"sin output overflow: raw {s}")
        s = out_min
        flags |= 2
    return c, s, flags


def mc_block(theta_raws, x0_raw, y0_raw, x0_real, y0_real,
             n, start_index, frac_bits, rounding,
             xy_min, xy_max, z_min, z_max, out_min, out_max, sat_window,
             atan_raws, inv_gain_raw, atan_tbl, k_inv,
             sq_err, residual):
    """Squared pipeline-vs-reference output error per angle.

    theta_raws holds quantized angles (raw words).  For each one, runs the
    integer pipeline and the double-precision reference at the same quantized
    angle, writes |pipeline - reference|^2 into sq_err and the reference
    residual angle into residual.  Returns the count of trials whose output
    saturated.
    """
    araws = [int(v) for v in atan_raws]
    tbl = [float(v) for v in atan_tbl]
    sat = 0
    for t in range(len(theta_raws)):
        th_raw = int(theta_raws[t])
        c, s, flags = pipeline_rotate_raw(
            th_raw, x0_raw, y0_raw, n, start_index, frac_bits, rounding,
            xy_min, xy_max, z_min, z_max, out_min, out_max, sat_window,
            araws, inv_gain_raw)
        theta = math.ldexp(th_raw, -frac_bits)
        rx, ry, res = rotate_ref(x0_real, y0_real, theta, n, start_index,
                                 tbl, k_inv)
        ex = math.ldexp(c, -frac_bits) - rx
        ey = math.ldexp(s, -frac_bits) - ry
        sq_err[t] = ex * ex + ey * ey
        residual[t] = res
        if flags:
            sat += 1
    return sat
