"""Minimum-similarity corpus ordering and dataset diversity scoring.

The core object is an ordering of a training corpus that minimizes the sum
of cosine similarities between consecutive samples, so each sample is
followed by something semantically far from it. Exact solvers handle small
instances; a seeded multi-restart greedy heuristic handles the rest. The
diversity side scores datasets by the softmax-trace of their similarity
matrix or by distinct m-gram ratio, with prefix curves for judging how
front-loaded an ordering's diversity is.
"""

from .corpus_io import (
    Corpus,
    EmbeddingMatrix,
    OrderFile,
    Sample,
    apply_order,
    load_corpus,
    load_order,
    read_embeddings,
    read_similarity,
    save_corpus,
    save_order,
    write_embeddings,
    write_similarity,
)
from .diversity import (
    BoundParams,
    DiversityParams,
    DiversityReport,
    bound_summary,
    dcscore,
    generalization_bound,
    ngram_diversity,
    prefix_curve,
    row_softmax,
)
from .errors import FormatError
from .ordering import (
    CuriosityOrder,
    StagePartition,
    default_restarts,
    eta_ghs,
    exact_min_path,
    partition_stages,
    path_weight,
    random_order,
    select_diverse_subset,
)
from .similarity import (
    GramBag,
    SimilarityMatrix,
    build_similarity_matrix,
    cosine,
    extract_grams,
    tokenize,
)
from .validation import (
    ValidationReport,
    check_edge_monotonicity,
    check_objective_agreement,
    check_reference_instance,
    gap_study,
    run_all,
)

__version__ = "0.1.0"

__all__ = [
    "BoundParams",
    "Corpus",
    "CuriosityOrder",
    "DiversityParams",
    "DiversityReport",
    "EmbeddingMatrix",
    "FormatError",
    "GramBag",
    "OrderFile",
    "Sample",
    "SimilarityMatrix",
    "StagePartition",
    "ValidationReport",
    "apply_order",
    "bound_summary",
    "build_similarity_matrix",
    "check_edge_monotonicity",
    "check_objective_agreement",
    "check_reference_instance",
    "cosine",
    "dcscore",
    "default_restarts",
    "eta_ghs",
    "exact_min_path",
    "extract_grams",
    "gap_study",
    "generalization_bound",
    "load_corpus",
    "load_order",
    "ngram_diversity",
    "partition_stages",
    "path_weight",
    "prefix_curve",
    "random_order",
    "read_embeddings",
    "read_similarity",
    "run_all",
    "save_corpus",
    "save_order",
    "select_diverse_subset",
    "tokenize",
    "write_embeddings",
    "write_similarity",
    "__version__",
]
