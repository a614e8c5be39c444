"""Local causal discovery in linear non-Gaussian models, cyclic or acyclic."""

from .config import DiscoveryConfig
from .dataset import Dataset
from .errors import LingError
from .graph import WeightedDigraph, equivalence_class, markov_blanket
from .inv_direct_lingam import inverse_direct_lingam
from .local_isa_ling import LocalModel, LocalModelClass, local_isa_ling, oracle_local_isa_ling, stable_filter
from .mbest import nodewise_lasso_mb
from .sem import SemSpec, random_graph, simulate

__all__ = [
    "Dataset", "DiscoveryConfig", "LingError", "LocalModel", "LocalModelClass", "SemSpec",
    "WeightedDigraph", "equivalence_class", "inverse_direct_lingam", "local_isa_ling",
    "markov_blanket", "nodewise_lasso_mb", "oracle_local_isa_ling", "random_graph",
    "simulate", "stable_filter",
]
__version__ = "0.1.0"
