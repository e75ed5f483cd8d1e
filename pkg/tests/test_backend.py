"""The compiled kernels must be bit-identical to the pure-Python ones on
every code path the package routes to them."""

import math
from dataclasses import replace

import numpy as np
import pytest

from qcordic import _kernels_py, backend
from qcordic.fixed import FixedPointOverflowError
from qcordic.harness import _quantize_angles
from qcordic.pipeline import build_rom, kernel_config, rotation_init
from qcordic.reference import (CordicParams, PROFILES, atan_table,
                               convergence_range, gain)

PAPER = PROFILES["paper"]
STD = PROFILES["standard"]

needs_compiled = pytest.mark.skipif(not backend.HAVE_COMPILED,
                                    reason="compiled kernels not built")


def theta_raws(params, count, seed):
    rng = np.random.default_rng(seed)
    bound = convergence_range(params)
    return _quantize_angles(rng.uniform(-bound, bound, count), params)


def run_mc(kern, params, raws):
    cfg = kernel_config(params, build_rom(params))
    x0, y0 = rotation_init(params)
    sq = np.empty(len(raws), dtype=np.float64)
    res = np.empty(len(raws), dtype=np.float64)
    tbl = np.asarray(atan_table(params), dtype=np.float64)
    sat = kern.mc_block(raws, x0.raw, y0.raw,
                        math.ldexp(x0.raw, -params.frac_bits),
                        math.ldexp(y0.raw, -params.frac_bits),
                        atan_tbl=tbl, k_inv=gain(params).k_inv,
                        sq_err=sq, residual=res, **cfg)
    return sq, res, sat


class TestSelection:
    def test_module_identity(self):
        if backend.HAVE_COMPILED:
            assert backend.backend_name() == "compiled"
            assert backend.kernels is not _kernels_py
        else:
            assert backend.backend_name() == "pure"
            assert backend.kernels is _kernels_py

    def test_narrow_formats_use_the_default(self):
        assert backend.kernels_for(PAPER) is backend.kernels

    def test_wide_formats_fall_back(self):
        wide = replace(STD, frac_bits=31)
        assert backend.kernels_for(wide) is _kernels_py

    def test_width_cutoff(self):
        # guard + 2b + 1 == 62 is the last compiled width
        edge = replace(STD, guard_int_bits=1, frac_bits=30)
        over = replace(STD, guard_int_bits=3, frac_bits=30)
        if backend.HAVE_COMPILED:
            assert backend.kernels_for(edge) is not _kernels_py
        assert backend.kernels_for(over) is _kernels_py


@needs_compiled
class TestRotateRef:
    @pytest.mark.parametrize("params", [PAPER, STD,
                                        CordicParams(stages=48)])
    def test_bit_identical(self, params):
        tbl = np.asarray(atan_table(params), dtype=np.float64)
        k_inv = gain(params).k_inv
        rng = np.random.default_rng(0)
        bound = convergence_range(params)
        for theta in rng.uniform(-bound, bound, 200):
            a = _kernels_py.rotate_ref(1.0, 0.0, float(theta), params.stages,
                                       params.start_index, tbl, k_inv)
            b = backend.kernels.rotate_ref(1.0, 0.0, float(theta),
                                           params.stages, params.start_index,
                                           tbl, k_inv)
            assert a == b  # floats compared exactly


@needs_compiled
class TestPipelineRaw:
    @pytest.mark.parametrize("params", [
        PAPER, STD,
        replace(PAPER, rounding=PAPER.rounding.__class__.TRUNCATE),
        replace(STD, rounding=STD.rounding.__class__.NEAREST_TIES_EVEN),
        replace(STD, frac_bits=8),
    ])
    def test_bit_identical(self, params):
        cfg = kernel_config(params, build_rom(params))
        x0, y0 = rotation_init(params)
        for raw in theta_raws(params, 300, seed=1):
            a = _kernels_py.pipeline_rotate_raw(int(raw), x0.raw, y0.raw,
                                                **cfg)
            b = backend.kernels.pipeline_rotate_raw(int(raw), x0.raw, y0.raw,
                                                    **cfg)
            assert a == b

    def test_overflow_parity(self):
        p = replace(STD, guard_int_bits=0)
        cfg = kernel_config(p, build_rom(p))
        x0, y0 = rotation_init(p)
        with pytest.raises(FixedPointOverflowError):
            _kernels_py.pipeline_rotate_raw(0, x0.raw, y0.raw, **cfg)
        with pytest.raises(FixedPointOverflowError):
            backend.kernels.pipeline_rotate_raw(0, x0.raw, y0.raw, **cfg)

    def test_deep_shift_clamp(self):
        # stage shifts past 62 must behave like plain sign extension
        p = CordicParams(stages=70, start_index=0, frac_bits=8)
        cfg = kernel_config(p, build_rom(p))
        x0, y0 = rotation_init(p)
        for raw in theta_raws(p, 100, seed=2):
            a = _kernels_py.pipeline_rotate_raw(int(raw), x0.raw, y0.raw,
                                                **cfg)
            b = backend.kernels.pipeline_rotate_raw(int(raw), x0.raw, y0.raw,
                                                    **cfg)
            assert a == b


@needs_compiled
class TestMcBlock:
    @pytest.mark.parametrize("params", [PAPER, STD,
                                        replace(STD, frac_bits=8)])
    def test_bit_identical(self, params):
        raws = theta_raws(params, 4000, seed=3)
        sq_a, res_a, sat_a = run_mc(_kernels_py, params, raws)
        sq_b, res_b, sat_b = run_mc(backend.kernels, params, raws)
        assert np.array_equal(sq_a, sq_b)
        assert np.array_equal(res_a, res_b)
        assert sat_a == sat_b

    def test_saturation_counts_seen(self):
        raws = theta_raws(PAPER, 20000, seed=4)
        _, _, sat = run_mc(backend.kernels, PAPER, raws)
        assert sat > 0
