"""hinflab: a desk-scale numerical lab for the holomorphic functional calculus
of sectorial and strip-type matrices and the generalized square functions
(gamma norms) over l_p^n spaces."""

__version__ = "0.1.0"

from .errors import (AngleConflict, BudgetTooSmall, ConfigInvalid, GridMismatch,
                     LabError, NotCommuting, NotSectorial, ReportMissing,
                     SignConventionCalibrationFailed, SpectrumHit,
                     TailNotConverged, ViolationFound)
from .grids import (GridSpec, interval_grid, line_grid, ray_grid,
                    sector_boundary_grid, strip_boundary_grid)
from .operators import (Operator, operator_from_json, resolvent,
                        resolvent_stack, sector_profile, strip_profile)
from .spaces import (BoundEstimate, SpaceSpec, bound_estimate,
                     contraction_principle_check, convex_average_check,
                     randomized_sum_norm)
from .squarefn import (Bracket, SampledFunction, embed_matrix, gamma_dual_norm,
                       gamma_norm, holder_pairing, pointwise_multiplier)
from .kernels import (KernelOperator, apply, averaging_kernel, fourier,
                      hilbert_pv, mellin_convolution, periodic_line_grid)
from .calculus import (ContourSpec, HFunction, dunford, extended_calculus,
                       group, log_generator, log_operator, log_resolvent_check,
                       operator_valued_calculus, joint_calculus, power,
                       semigroup)
from .suites import (SuiteReport, g_function_experiment, g_function_sweep,
                     hinfty_bound_estimate, log_bridge_suite,
                     sector_equivalence_suite, square_function_comparison,
                     strip_group_suite, torus_laplacian, xa_norm)
