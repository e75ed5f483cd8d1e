# cython: boundscheck=False, wraparound=False, language_level=3
"""Compiled kernels.  Mirrors _kernels_py operation for operation; the two
must stay bit-identical (built with -ffp-contract=off so no FMA fusing)."""

from libc.math cimport ldexp

from qcordic.fixed import FixedPointOverflowError

ctypedef long long i64


cdef inline i64 _rshift(i64 v, int s, int code) noexcept:
    cdef i64 half, q, r
    if s <= 0:
        return v << (-s)
    if s > 62:
        # callers keep |v| < 2**61, where any shift beyond 62 gives the
        # same rounded result as 62 (0 or -1); also avoids UB in C
        s = 62
    if code == 2:
        return v >> s
    half = (<i64>1) << (s - 1)
    if code == 0:
        if v >= 0:
            return (v + half) >> s
        return -((-v + half) >> s)
    q = v >> s
    r = v - (q << s)
    if r > half or (r == half and (q & 1)):
        q = q + 1
    return q


def rotate_ref(double x0, double y0, double theta, int n, int start_index,
               double[::1] atan_tbl, double k_inv):
    cdef double x = x0
    cdef double y = y0
    cdef double z = theta
    cdef double t, a, nx, ny
    cdef int j
    for j in range(n):
        if z >= 0.0:
            t = ldexp(1.0, -(start_index + j))
            a = atan_tbl[j]
        else:
            t = -ldexp(1.0, -(start_index + j))
            a = -atan_tbl[j]
        nx = x - t * y
        ny = y + t * x
        x = nx
        y = ny
        z = z - a
    return x * k_inv, y * k_inv, z


cdef int _pipeline_raw(i64 theta_raw, i64 x0_raw, i64 y0_raw, int n,
                       int start_index, int frac_bits, int rounding,
                       i64 xy_min, i64 xy_max, i64 z_min, i64 z_max,
                       i64 out_min, i64 out_max, i64 sat_window,
                       i64[::1] atan_raws, i64 inv_gain_raw,
                       i64 *cos_raw, i64 *sin_raw) except -1:
    cdef i64 x = x0_raw
    cdef i64 y = y0_raw
    cdef i64 z = theta_raw
    cdef i64 dx, dy, aj, c, s
    cdef int j, flags = 0
    for j in range(n):
        dx = _rshift(y, start_index + j, rounding)
        dy = _rshift(x, start_index + j, rounding)
        aj = atan_raws[j]
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
    cos_raw[0] = c
    sin_raw[0] = s
    return flags


def pipeline_rotate_raw(i64 theta_raw, i64 x0_raw, i64 y0_raw, int n,
                        int start_index, int frac_bits, int rounding,
                        i64 xy_min, i64 xy_max, i64 z_min, i64 z_max,
                        i64 out_min, i64 out_max, i64 sat_window,
                        i64[::1] atan_raws, i64 inv_gain_raw):
    cdef i64 c = 0, s = 0
    cdef int flags = _pipeline_raw(
        theta_raw, x0_raw, y0_raw, n, start_index, frac_bits, rounding,
        xy_min, xy_max, z_min, z_max, out_min, out_max, sat_window,
        atan_raws, inv_gain_raw, &c, &s)
    return c, s, flags


def mc_block(i64[::1] theta_raws, i64 x0_raw, i64 y0_raw,
             double x0_real, double y0_real,
             int n, int start_index, int frac_bits, int rounding,
             i64 xy_min, i64 xy_max, i64 z_min, i64 z_max,
             i64 out_min, i64 out_max, i64 sat_window,
             i64[::1] atan_raws, i64 inv_gain_raw,
             double[::1] atan_tbl, double k_inv,
             double[::1] sq_err, double[::1] residual):
    cdef Py_ssize_t t, trials = theta_raws.shape[0]
    cdef i64 c = 0, s = 0
    cdef int flags
    cdef int sat = 0
    cdef double theta, rx, ry, rz, ex, ey, tv, av, nx, ny
    cdef int j
    for t in range(trials):
        flags = _pipeline_raw(
            theta_raws[t], x0_raw, y0_raw, n, start_index, frac_bits,
            rounding, xy_min, xy_max, z_min, z_max, out_min, out_max,
            sat_window, atan_raws, inv_gain_raw, &c, &s)
        theta = ldexp(<double>theta_raws[t], -frac_bits)
        rx = x0_real
        ry = y0_real
        rz = theta
        for j in range(n):
            if rz >= 0.0:
                tv = ldexp(1.0, -(start_index + j))
                av = atan_tbl[j]
            else:
                tv = -ldexp(1.0, -(start_index + j))
                av = -atan_tbl[j]
            nx = rx - tv * ry
            ny = ry + tv * rx
            rx = nx
            ry = ny
            rz = rz - av
        rx = rx * k_inv
        ry = ry * k_inv
        ex = ldexp(<double>c, -frac_bits) - rx
        ey = ldexp(<double>s, -frac_bits) - ry
        sq_err[t] = ex * ex + ey * ey
        residual[t] = rz
        if flags:
            sat += 1
    return sat
