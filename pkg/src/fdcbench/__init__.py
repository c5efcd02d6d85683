"""Finite decomposition certificates: metric spaces, witnesses, chains and group windows."""
from .errors import FDCError
from .metric import (CoarseMapWitness, FiniteMetricSpace, MetricFamily, Modulus, Subspace,
                     build_space, check_coarse_map, graph_metric, grid_space, path_space,
                     r_components, set_distance)
from .witness import (Bounded, ClosureOf, DecompositionChain, DecompositionWitness, Explicit,
                      FamilyWitness, chain_from_kfold, string_chains, transfer_along_embedding,
                      union_assemble, verify_chain, verify_family, verify_witness)
from .search import asdim_profile, heuristic_decompose, oracle_min_k
from .groups import Cyclic, Free, FreeAbelian, FreeProduct, enumerate_ball, relative_ball
from .pipeline import ball_chain, extend_group_chain, pullback_chain

__version__ = "0.1.0"

__all__ = [
    "FDCError", "CoarseMapWitness", "FiniteMetricSpace", "MetricFamily", "Modulus", "Subspace",
    "build_space", "check_coarse_map", "graph_metric", "grid_space", "path_space", "r_components",
    "set_distance", "Bounded", "ClosureOf", "DecompositionChain", "DecompositionWitness", "Explicit",
    "FamilyWitness", "chain_from_kfold", "string_chains", "transfer_along_embedding", "union_assemble",
    "verify_chain", "verify_family", "verify_witness", "asdim_profile", "heuristic_decompose",
    "oracle_min_k", "Cyclic", "Free", "FreeAbelian", "FreeProduct", "enumerate_ball", "relative_ball",
    "ball_chain", "extend_group_chain", "pullback_chain",
]
