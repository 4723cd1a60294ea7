from .centrality import ConvergenceError, eigenvector_centrality
from .community import louvain, modularity
from .components import connected_components
from .export import edge_list_csv, gexf_document, write_edge_csv, write_gexf, write_newick
from .graphs import WeightedDigraph, WeightedGraph
from .hierarchy import Dendrogram, Merge, hierarchical_cluster, pairwise_distances

__all__ = [
    "ConvergenceError",
    "Dendrogram",
    "Merge",
    "WeightedDigraph",
    "WeightedGraph",
    "connected_components",
    "edge_list_csv",
    "eigenvector_centrality",
    "gexf_document",
    "hierarchical_cluster",
    "louvain",
    "modularity",
    "pairwise_distances",
    "write_edge_csv",
    "write_gexf",
    "write_newick",
]
