"""Nearest directed graph Laplacian projection toolkit."""

from .core import (
    DimensionTooLarge,
    GraphStructure,
    LaplacianCertificate,
    PatternMismatchError,
    RowSolution,
    RowSubproblem,
    SparseRowMatrix,
    apply_q,
    apply_q_inverse,
    build_row_subproblem,
    kkt_residual,
    objective,
    validate_laplacian,
)
from .instances import (
    NoiseParams,
    WSParams,
    WorstCaseSequence,
    generate_noisy_instance,
    generate_ws_graph,
    worst_case_matrix,
    worst_case_sequence,
)
from .loopy import ClippedRow, clip_row, nearest_loopy_laplacian, solve_loopy_row
from .solvers import (
    METHODS,
    IterateTrace,
    RowSolveError,
    SolverConfig,
    enumerate_active_sets,
    nearest_laplacian,
    solve_active_set,
    solve_interior_point,
    solve_row,
    solve_sort_kkt,
    solve_vfista,
)
from .sysid import (
    SysidConfig,
    TrajectoryData,
    identify_laplacian,
    lipschitz_step,
    sysid_gradient,
    sysid_objective,
)

__version__ = "0.1.0"
