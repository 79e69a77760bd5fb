"""Exact set-valued superhedging risk measures on Bernoulli scenario trees."""

from setrisk.errors import ConfigError, DomainError, InvariantError, UnsupportedDimension
from setrisk.market import Market, MarketSpec
from setrisk.polytope import Cone, UpperPoly
from setrisk.riskmeasure import RiskEngine
from setrisk.tree import Tree, TreeSpec, build_tree

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "Cone",
    "DomainError",
    "InvariantError",
    "Market",
    "MarketSpec",
    "RiskEngine",
    "Tree",
    "TreeSpec",
    "UnsupportedDimension",
    "UpperPoly",
    "build_tree",
]
