"""Statistically significant attribute associations in node-attributed graphs."""

__version__ = "0.1.0"

from .association import (
    Association,
    AssociationGraph,
    Cluster,
    Mark,
    SignificantAssociation,
    init,
    mine,
    signature,
    significant_associations,
    split_cluster,
    transform,
)
from .graph import AttributedGraph, GraphFormatError, attribute_marginals, load_graph, write_graph
from .significance import SignificanceParams, association_pvalue, binom_tail, cluster_significance, prune_threshold

__all__ = [
    "Association",
    "AssociationGraph",
    "AttributedGraph",
    "Cluster",
    "GraphFormatError",
    "Mark",
    "SignificanceParams",
    "SignificantAssociation",
    "association_pvalue",
    "attribute_marginals",
    "binom_tail",
    "cluster_significance",
    "init",
    "load_graph",
    "mine",
    "prune_threshold",
    "signature",
    "significant_associations",
    "split_cluster",
    "transform",
    "write_graph",
]
