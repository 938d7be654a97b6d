"""Fuchsian systems, monodromy by analytic continuation and Schlesinger deformations."""

__version__ = "0.1.0"

from .core import (DEFAULT_TOLERANCES, FuchsianSystem, SpectralData, Tolerances,  # noqa: E402
                   ValidationReport, Violation, close_residues, spectral_data, validate_system)
from .errors import *  # noqa: E402,F401,F403
from .geometry import BranchAnchor, LoopWord, PolyPath, WindingRecord, group_product  # noqa: E402
from .continuation import (ContinuationResult, continue_solution, fuchsian_rhs,  # noqa: E402
                           infinity_chart_rhs, solve_from_infinity)
from .monodromy import (MonodromyRep, Realization, canonical_generators,  # noqa: E402
                        default_realization, homomorphism_defect, local_spectrum_check,
                        matrix_log, monodromy, monodromy_matrix, monodromy_representation,
                        regular_factor_check)
from .schlesinger import (FlowPath, FlowTrace, ParameterizedFamily,  # noqa: E402
                          SchlesingerState, auxiliary_system_residual, family_trace,
                          first_integral_drift, isomonodromy_check, isospectrality_drift,
                          jacobi_compatibility_defect, schlesinger_flow, schlesinger_partials,
                          schlesinger_residual)
from .reference import (ExampleFamily, example_family, example_residues,  # noqa: E402
                        example_solution, example_system, scalar_system, scalar_two_pole)
from .sysfile import parse_system_file, serialize_system  # noqa: E402
