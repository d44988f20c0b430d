"""Cascade decomposition and boundedness checks for networks of semi-passive systems."""
from .decomposition import (
    BlockDecomposition,
    DecompositionReport,
    apply_permutation,
    block_triangularize,
    verify_decomposition,
)
from .dynamics import NodeModel, builtin_model, certify_semipassivity, polynomial_model
from .errors import *  # noqa: F401,F403
from .graph import (
    DirectedGraph,
    SccPartition,
    build_graph,
    has_spanning_tree,
    laplacian,
    strongly_connected_components,
)
from .simulator import (
    NetworkSystem,
    Trajectory,
    boundedness_verdict,
    lyapunov_monitor,
    simulate,
    simulate_cascade,
)
from .spectral import SpectralCertificate, check_sym_psd, left_null_vector

__version__ = "0.1.0"
