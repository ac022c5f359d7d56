"""Synthetic-homophily laboratory for a from-scratch two-layer GCN."""

__version__ = "0.1.0"

from .graph import CsrAdjacency, Graph, SplitMasks, build_graph, load_dataset, save_dataset
from .synthgen import (NeighborDistributionSpec, PartitionSpec, SplitCounts, cyclic_shift_mixing,
                       generate, partition_mixing, random_split)
from .metrics import (ConfusionMatrix, SimilarityReport, class_similarity_report, confusion,
                      distribution_distinguishability, neighbor_label_distribution, node_homophily)
from .model import GcnParams, TrainConfig, TrainLog, extract_embeddings, train
from .experiment import SweepConfig, SweepResults, run_heterophily_case, run_sweep
