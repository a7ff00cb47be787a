"""Two-point block finite differences for the heat equation."""
from .errors import (
    BFDError, ConfigurationError, InstabilityError, InvalidGridError, NoSolutionError,
    SingularSystemError, UnsupportedError,
)
from .experiments import (
    ConvergenceTable, ExperimentSpec, emit_artifacts, fit_rate, run_experiment, run_single,
)
from .grid import BlockGrid1D, BlockGrid2D, GridFunction, build_grid_1d, build_grid_2d, norm, project
from .integrators import IntegratorConfig, integrate, rk4_default_dt, rk4_stable_dt, step_gl6, step_rk4
from .manufactured import PROBLEMS, ManufacturedProblem, get_problem
from .operator import (
    OPTIMAL_C, BlockOperator, BoundaryData, SchemeParams, assemble_1d, assemble_2d,
    assemble_dirichlet, assemble_periodic, interior_blocks, truncation_error, write_matrix_market,
)
from .postprocess import POLY, SPECTRAL, FilterSpec, apply_filter, filter_periodic, filter_poly_batches
from .stability import (
    certify, certify_c, solve_penalty_coefficients, reconstruct_blocks, build_interior_theta,
    boundary_theta_half, boundary_theta_three_halves,
)
from .symbols import (
    SymbolSet, exact_error_evolution, frequency_pair, order_prediction, predict_error_evolution,
    spectrum_from_symbols, symbols, verify_against_operator,
)

__all__ = [name for name in dir() if not name.startswith("_")]
