"""Quantum noiseless coding toolkit: entropy splitting, typical subspaces, resource search."""

__version__ = "0.1.0"

from .codec import (
    BlockDistribution,
    HuffmanCodebook,
    decode,
    encode,
    huffman_build,
    measured_rate,
    shannon_entropy_bits,
)
from .entropy_split import (
    EntropyReport,
    entropy_decomposition,
    membership_string,
    orthogonality_trace_check,
    projector_pi1,
    subadditivity_gap,
)
from .errors import OracleMismatch, ValidationError
from .linalg import (
    DensityOperator,
    Projector,
    PureState,
    Spectrum,
    density_from_ensemble,
    hermitian_eigensystem,
    projector_from_basis,
    tensor_product,
    von_neumann_entropy,
)
from .pipeline import PipelineReport, RunConfig, run_pipeline
from .search import SearchRanges, SolutionRow, exact_solutions, minimal_block_length, verify_table1, waste
from .sources import (
    DecomposableSource,
    SignalEnsemble,
    SignalSequence,
    bell_basis,
    bell_source,
    compose_source,
    load_source,
    sample_sequence,
    save_source,
    total_density,
)
from .typical import (
    SiteWeights,
    TypicalSubspaceSpec,
    best_equal_dim_fidelity,
    d_lambda,
    d_lambda_bruteforce,
    fidelity_bruteforce,
    fidelity_majority,
    fidelity_subspace,
    lambda_membership,
    site_weights,
)
