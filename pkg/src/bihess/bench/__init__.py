from .adaptive import adaptive_study
from .solutions import ExactSolution, fd_biharmonic, lshape_solution, quadratic_solution, square_solution
from .study import (
    CSV_FIELDS,
    DEFAULT_L,
    ConvergenceRow,
    InteriorSplit,
    boundary_distance,
    convergence_study,
    error_norms,
    interior_split,
    solve_square,
    write_convergence_csv,
)

__all__ = [
    "adaptive_study",
    "CSV_FIELDS",
    "DEFAULT_L",
    "ConvergenceRow",
    "ExactSolution",
    "InteriorSplit",
    "boundary_distance",
    "convergence_study",
    "error_norms",
    "fd_biharmonic",
    "interior_split",
    "lshape_solution",
    "quadratic_solution",
    "solve_square",
    "square_solution",
    "write_convergence_csv",
]
