"""Attributed network embedding, clustering and archetype analysis for
spatio-temporal mobility networks."""

__version__ = "0.1.0"

from .archetype import align_labels, fuse_similar, merge_archetypes, trajectories
from .cluster import gmm_fit, kmeans
from .embed import EmbeddingMatrix, SolverConfig, embed, project_2d
from .features import (
    ActivityGrid,
    AttributeTable,
    CaseSeries,
    PairwiseIndexMatrix,
    percent_change_from_baseline,
    reproduction_number,
    standardize,
    venables_distance,
    weighted_degree_centrality,
)
from .graph import AttributedNetwork, build_network, cosine_similarity
from .stats import dunn_posthoc, feature_difference_scan, kruskal_wallis
from .validate import dunn_index, select_k, silhouette, stability, stability_measures

__all__ = [
    "ActivityGrid",
    "AttributeTable",
    "AttributedNetwork",
    "CaseSeries",
    "EmbeddingMatrix",
    "PairwiseIndexMatrix",
    "SolverConfig",
    "align_labels",
    "build_network",
    "cosine_similarity",
    "dunn_index",
    "dunn_posthoc",
    "embed",
    "feature_difference_scan",
    "fuse_similar",
    "gmm_fit",
    "kmeans",
    "kruskal_wallis",
    "merge_archetypes",
    "percent_change_from_baseline",
    "project_2d",
    "reproduction_number",
    "select_k",
    "silhouette",
    "stability",
    "stability_measures",
    "standardize",
    "trajectories",
    "venables_distance",
    "weighted_degree_centrality",
]
