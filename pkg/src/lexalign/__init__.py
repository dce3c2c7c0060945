"""Cross-lingual lexical alignment toolkit.

Quantifies how similarly translation-equivalent words are embedded across
languages, with neighborhood-comparison metrics over static vectors and
contextual point clouds, synthetic and lexical-gap validations, and batch
analysis utilities.
"""

__version__ = "0.1.0"

from .embeddings import (
    NeighborList,
    PointCloud,
    PointCloudStore,
    VectorSpace,
    cosine,
    knn,
    knn_cloud,
    load_clouds,
    load_vectors,
    pointcloud_distance,
)
from .lexicon import (
    Concept,
    ConceptLexicon,
    SemanticDomain,
    back_translate_to_concepts,
    load_lexicon,
    translate,
)
from .metrics import (
    AlignmentScore,
    AlignmentTable,
    MetricConfig,
    compute_table,
    neighbors_overlap,
    snc_bidirectional,
    snc_unidirectional,
)
from .stats import (
    adjusted_r_squared,
    kendall_tau,
    partial_correlation,
    pearson,
    pearson_test,
    spearman,
)
from .validation import (
    GapInventory,
    ValidationReport,
    gap_alignment,
    load_gaps,
    sensitivity,
    shuffle_baseline,
    validate_against_gaps,
)
from .analysis import (
    AggregatedVector,
    aggregate,
    cultural_distance,
    external_norm_correlation,
    feature_correlation,
    metric_correlation_matrix,
)
from .geodesic import geodesic_distance
from .polysemy import gmm_sense_count, polysemy_pair_score, self_similarity
