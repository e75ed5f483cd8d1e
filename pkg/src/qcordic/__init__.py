"""Bit-exact fixed-point CORDIC rotator with an error-analysis toolkit."""

from .fixed import (DEFAULT_ROUNDING, Fixed, FixedPointOverflowError,
                    HexFormatError, QFormat, RoundingMode, add, from_hex, mul,
                    neg, quantize, shift_right, sub, to_hex, to_real)
from .reference import (ConvergenceRangeError, CordicParams, Gain, Mode,
                        PROFILES, SigmaSequence, Vec2, atan_table,
                        convergence_range, gain, propagation_matrix,
                        rotate_reference, rotation_matrix, sigma_sequence,
                        vector_reference)
from .pipeline import (Rom, StageState, StageTrace, build_rom, format_trace,
                       measured_error, pipeline_rotate, pipeline_rotate_fast,
                       pipeline_vector, read_rom_files, stage, write_rom_files)
from .error_model import (ErrorBreakdown, angle_error_bound, angle_mse,
                          epsilon, rounding_bound_per_stage, rounding_mse,
                          rounding_mse_empirical_reference,
                          rounding_mse_expected, scaling_mse, total_mse)
from .harness import (MseReport, TABLE1_ANGLES, Table1Row, export_rom,
                      monte_carlo_mse, overflow_scan, report_from_json,
                      report_to_json, run_table1, sweep_bits, table1_to_csv)
from .backend import HAVE_COMPILED, backend_name

__version__ = "0.1.0"
