"""C0 interior penalty biharmonic solver with recovered Hessians and adaptivity."""
from .adapt import (
    AdaptiveProblem,
    AdaptRecord,
    EstimatorField,
    adaptive_loop,
    broken_h2_error,
    dorfler_mark,
    effectivity,
    estimate,
)
from .c0ip import (
    AssembledSystem,
    apply_clamped_bc,
    assemble_bilinear,
    assemble_load,
    assemble_system,
    default_gamma,
    energy_norm,
    solve,
    solve_biharmonic,
)
from .fem import FeFunction, FeSpace, build_space, interpolate
from .linalg import SparseSymMatrix, spd_solve
from .mesh import Triangulation, generate_lshape, generate_uniform, make_mesh
from .recovery import HessianField, recover_gradient, recover_hessian

__version__ = "0.1.0"

__all__ = [
    "AdaptRecord",
    "AdaptiveProblem",
    "AssembledSystem",
    "EstimatorField",
    "FeFunction",
    "FeSpace",
    "HessianField",
    "SparseSymMatrix",
    "Triangulation",
    "adaptive_loop",
    "apply_clamped_bc",
    "assemble_bilinear",
    "assemble_load",
    "assemble_system",
    "broken_h2_error",
    "build_space",
    "default_gamma",
    "dorfler_mark",
    "effectivity",
    "energy_norm",
    "estimate",
    "generate_lshape",
    "generate_uniform",
    "interpolate",
    "make_mesh",
    "recover_gradient",
    "recover_hessian",
    "solve",
    "solve_biharmonic",
    "spd_solve",
]
