"""VCG payments on matroids and set systems: exact computation, identity
audits and Monte Carlo checks of expected overpayment."""

from .matroid import (GraphicMatroid, Matroid, NoFiniteBasisError, UniformMatroid, complete_graph,
                      cycle_graph, greedy_min_basis, path_graph)
from .sampling import BetaA1, CostModel, Exponential, SeedSpec, Uniform, conditional_mean_below, sample_costs
from .setsystem import StructureFamily, k3_path_family, min_structure
from .vcg import (AuctionOutcome, Instance, brute_force_outcome, extended_threshold, incentive_payment,
                  min_cost, run_auction, vcg_threshold)

__version__ = "0.1.0"

__all__ = [
    "AuctionOutcome", "BetaA1", "CostModel", "Exponential", "GraphicMatroid", "Instance", "Matroid",
    "NoFiniteBasisError", "SeedSpec", "StructureFamily", "Uniform", "UniformMatroid", "brute_force_outcome",
    "complete_graph", "conditional_mean_below", "cycle_graph", "extended_threshold", "greedy_min_basis",
    "incentive_payment", "k3_path_family", "min_cost", "min_structure", "path_graph", "run_auction",
    "sample_costs", "vcg_threshold",
]
