"""Frog model simulation, stochastic order checks and exact comparison machinery."""

from .engine import ExplicitModel, FrogModelSpec, SimOutcome, run, run_explicit
from .graph import DaryTree, ExplicitGraph, GraphKind, Lattice, RegularTree
from .init_config import IID, Deterministic, ExplicitCounts, Pmf, SiteDependentBernoulli
from .orders import OrderKind, OrderVerdict, check_empirical, check_exact

__version__ = "0.1.0"

__all__ = [
    "DaryTree", "Deterministic", "ExplicitCounts", "ExplicitGraph", "ExplicitModel", "FrogModelSpec",
    "GraphKind", "IID", "Lattice", "OrderKind", "OrderVerdict", "Pmf", "RegularTree",
    "SimOutcome", "SiteDependentBernoulli", "check_empirical", "check_exact", "run", "run_explicit",
]
