"""Locally linear embedding with a choice of classical ambient-space weights
or rank-d neighborhood-representation weights, plus the verification
experiments built around the method: weight-stability bounds under
perturbation, preimage objective-value scaling, and embedding-quality
statistics against ground truth."""

from .datasets import (
    GENERATORS,
    GeneratedSample,
    gen_open_ring,
    gen_scurve,
    gen_swissroll,
    generate,
    load_csv,
    preimage_path,
    save_csv,
    save_sample,
    scurve_map,
    swissroll_map,
    validate_cloud,
)
from .diagnostics import (
    DEFAULT_EPSILONS,
    DEFAULT_TRIALS,
    EmbeddingDiagnostics,
    PerturbationReport,
    Theorem2Result,
    grid_cross_neighborhood,
    linear_projection_diagnostic,
    linear_r2,
    monotonicity_1d,
    permuted_preimage_null,
    perturbation_experiment,
    perturbation_report_dict,
    procrustes_residual,
    reconstruction_error,
    theorem1_bound,
    theorem2_check,
    theorem2_check_from_parts,
)
from .embedding import Embedding, build_m, embed, phi, save_embedding
from .errors import (
    CsvFormatError,
    DegenerateWeightsError,
    DisconnectedGraphError,
    EigenSolverError,
    GeneralPositionError,
    LdrLleError,
    SingularNeighborhoodError,
    UndefinedCorrelationError,
)
from .neighbors import (
    NeighborGraph,
    NeighborhoodMatrix,
    knn,
    neighborhood_matrix,
    save_neighbor_graph,
)
from .weights import (
    DEFAULT_DELTA,
    NeighborhoodSpectrum,
    assemble_weight_matrix,
    ldr_weights,
    ldr_weights_from_spectrum,
    lle_weights,
    lle_weights_pinv,
    neighborhood_spectrum,
    save_spectra,
    save_weight_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "GENERATORS",
    "GeneratedSample",
    "gen_open_ring",
    "gen_scurve",
    "gen_swissroll",
    "generate",
    "load_csv",
    "preimage_path",
    "save_csv",
    "save_sample",
    "scurve_map",
    "swissroll_map",
    "validate_cloud",
    "DEFAULT_EPSILONS",
    "DEFAULT_TRIALS",
    "EmbeddingDiagnostics",
    "PerturbationReport",
    "Theorem2Result",
    "grid_cross_neighborhood",
    "linear_projection_diagnostic",
    "linear_r2",
    "monotonicity_1d",
    "permuted_preimage_null",
    "perturbation_experiment",
    "perturbation_report_dict",
    "procrustes_residual",
    "reconstruction_error",
    "theorem1_bound",
    "theorem2_check",
    "theorem2_check_from_parts",
    "Embedding",
    "build_m",
    "embed",
    "phi",
    "save_embedding",
    "CsvFormatError",
    "DegenerateWeightsError",
    "DisconnectedGraphError",
    "EigenSolverError",
    "GeneralPositionError",
    "LdrLleError",
    "SingularNeighborhoodError",
    "UndefinedCorrelationError",
    "NeighborGraph",
    "NeighborhoodMatrix",
    "knn",
    "neighborhood_matrix",
    "save_neighbor_graph",
    "DEFAULT_DELTA",
    "NeighborhoodSpectrum",
    "assemble_weight_matrix",
    "ldr_weights",
    "ldr_weights_from_spectrum",
    "lle_weights",
    "lle_weights_pinv",
    "neighborhood_spectrum",
    "save_spectra",
    "save_weight_matrix",
    "__version__",
]
