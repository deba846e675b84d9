"""Graph partitioning by minimizing the sum of Dirichlet eigenvalues of the parts."""

__version__ = "0.1.0"

from .errors import ConvergenceError, DegenerateInputError, InputError
from .graph import (
    PointCloud,
    SimilarityGraph,
    connected_components,
    gaussian_similarity,
    knn_graph,
    lattice_graph,
    symmetrize,
)
from .laplacian import LaplacianOperator, SchrodingerOperator, second_eigenvalue
from .eigensolver import GroundState, ground_state, ground_state_dense
from .dirichlet import (
    brute_force_partition,
    dirichlet_eigenvalue,
    partition_objective,
    perimeter_volume_bound,
)
from .rearrangement import RunConfig, RunReport, init_random, init_voronoi, relaxed_energy, resolve_alpha, run
from .metrics import confusion, nmf_identity_check, purity

__all__ = [
    "ConvergenceError", "DegenerateInputError", "InputError",
    "PointCloud", "SimilarityGraph", "connected_components", "gaussian_similarity",
    "knn_graph", "lattice_graph", "symmetrize",
    "LaplacianOperator", "SchrodingerOperator", "second_eigenvalue",
    "GroundState", "ground_state", "ground_state_dense",
    "brute_force_partition", "dirichlet_eigenvalue", "partition_objective", "perimeter_volume_bound",
    "RunConfig", "RunReport", "init_random", "init_voronoi", "relaxed_energy", "resolve_alpha", "run",
    "confusion", "nmf_identity_check", "purity",
]
