"""Cox-Ross-Rubinstein bid/ask lattice and solvency cones.

Asset 0 is a bond with price 1 (zero interest). Asset i >= 1 has mid price
``S0_i * u_i ** n_i`` where ``n_i`` is the net number of up-moves of walk i,
so the rational up-factor ``u_i`` stands in for ``exp(sigma_i sqrt(dt))``.
All exchanges go through the bond.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from setrisk._rational import q
from setrisk.errors import ConfigError
from setrisk.polytope import Cone, UpperPoly
from setrisk.tree import Tree


@dataclass(frozen=True)
class MarketSpec:
    S0: tuple
    up: tuple
    lam: tuple

    def __post_init__(self):
        S0 = tuple(q(v) for v in self.S0)
        up = tuple(q(v) for v in self.up)
        lam = tuple(q(v) for v in self.lam)
        if not (len(S0) == len(up) == len(lam)) or not S0:
            raise ConfigError("S0, up and lambda must have the same positive length")
        if any(s <= 0 for s in S0):
            raise ConfigError("initial prices must be positive")
        if any(u <= 1 for u in up):
            raise ConfigError("up-factors must exceed 1")
        if any(not 0 <= l < 1 for l in lam):
            raise ConfigError("transaction cost rates must lie in [0, 1)")
        object.__setattr__(self, "S0", S0)
        object.__setattr__(self, "up", up)
        object.__setattr__(self, "lam", lam)

    @property
    def d(self) -> int:
        return len(self.S0) + 1


class Market:
    def __init__(self, tree: Tree, spec: MarketSpec):
        if spec.d - 1 != tree.m:
            raise ConfigError(f"market has {spec.d - 1} risky assets but the tree has m = {tree.m} walks")
        self.tree = tree
        self.spec = spec
        self.d = spec.d
        self._cone_poly = lru_cache(maxsize=None)(self._cone_poly_uncached)

    def mid(self, node) -> tuple:
        return self._mid(self.tree.net_moves(node))

    def _mid(self, moves) -> tuple:
        return tuple(s * u**e for s, u, e in zip(self.spec.S0, self.spec.up, moves))

    def prices(self, node) -> tuple[tuple, tuple, tuple]:
        """``(bid, ask, mid)`` of the risky assets at ``node``."""
        return self._prices(self.tree.net_moves(node))

    def _prices(self, moves):
        mid = self._mid(moves)
        bid = tuple(s * (1 - l) for s, l in zip(mid, self.spec.lam))
        ask = tuple(s * (1 + l) for s, l in zip(mid, self.spec.lam))
        return bid, ask, mid

    def exchange_generators(self, node) -> list[tuple]:
        """The 2(d-1) exchange columns: sell one unit of i at bid, buy one at ask."""
        return self._generators(self.tree.net_moves(node))

    def _generators(self, moves) -> list[tuple]:
        bid, ask, _ = self._prices(moves)
        d = self.d
        gens = []
        for i in range(1, d):
            g = [q(0)] * d
            g[0], g[i] = -bid[i - 1], q(1)
            gens.append(tuple(g))
        for i in range(1, d):
            g = [q(0)] * d
            g[0], g[i] = ask[i - 1], q(-1)
            gens.append(tuple(g))
        return gens

    def solvency_cone(self, node) -> Cone:
        """Exchange columns plus the unit vectors (free disposal)."""
        return self._cone(self.tree.net_moves(node))

    def _cone(self, moves) -> Cone:
        units = [tuple(q(1) if i == j else q(0) for i in range(self.d)) for j in range(self.d)]
        return Cone(self._generators(moves) + units)

    def cone_poly(self, node) -> UpperPoly:
        # the cone depends on the node only through the walk position
        return self._cone_poly(self.tree.net_moves(node))

    def _cone_poly_uncached(self, moves) -> UpperPoly:
        return self._cone(moves).as_upperpoly()


def cone_as_upperpoly(cone: Cone) -> UpperPoly:
    return cone.as_upperpoly()
