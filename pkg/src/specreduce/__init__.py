"""Spectral reduction of large undirected graphs, with multilevel
partitioning and t-SNE built on top of the reduced hierarchy."""

from .aggregate import (MappingOperator, TestVectors, aggregate_nodes,
                        gs_test_vectors, node_affinity, reduce_graph)
from .graph import Graph, GraphError, load_graph, save_graph
from .linsolve import LaplacianSolver, SolveError, solve_laplacian
from .partition import (CutReport, Hierarchy, Partition, cut_metrics,
                        direct_spectral_partition, kmeans,
                        multilevel_eigensolver, multilevel_spectral_partition)
from .pipeline import (ReduceOptions, ReduceTrace, load_hierarchy,
                       reduction_report, save_hierarchy, spectral_reduce,
                       spectral_reduce_with_trace)
from .refine import eigen_smooth, jacobi_smooth
from .scale import (ScalingTrace, SgdParams, estimate_lambda_max,
                    estimate_lambda_min, sgd_edge_scaling)
from .sparsify import (EdgeCriticality, Sparsifier, densify_to_similarity,
                       offtree_embedding, recover_edges, spanning_tree)
from .tsne import (AffinityMatrix, Dataset, Embedding, TsneParams,
                   correlation_factor, knn_graph, multilevel_tsne,
                   perplexity_calibrate, reduce_features, tsne_embed)

__version__ = "0.1.0"

__all__ = [
    "AffinityMatrix", "CutReport", "Dataset", "EdgeCriticality", "Embedding",
    "Graph", "GraphError", "Hierarchy", "LaplacianSolver", "MappingOperator",
    "Partition", "ReduceOptions", "ReduceTrace", "ScalingTrace", "SgdParams",
    "SolveError", "Sparsifier", "TestVectors", "TsneParams",
    "aggregate_nodes", "correlation_factor", "cut_metrics",
    "densify_to_similarity", "direct_spectral_partition",
    "estimate_lambda_max", "estimate_lambda_min", "eigen_smooth",
    "gs_test_vectors", "jacobi_smooth", "kmeans", "knn_graph",
    "load_graph", "load_hierarchy", "multilevel_eigensolver",
    "multilevel_spectral_partition", "multilevel_tsne", "node_affinity",
    "offtree_embedding", "perplexity_calibrate", "recover_edges",
    "reduce_features", "reduce_graph", "reduction_report", "save_graph",
    "save_hierarchy", "sgd_edge_scaling", "solve_laplacian",
    "spanning_tree", "spectral_reduce", "spectral_reduce_with_trace",
    "tsne_embed",
]
