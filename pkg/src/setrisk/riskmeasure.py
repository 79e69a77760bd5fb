"""Backward set recursion for multiportfolio time consistent risk measures.

The engine is generic over a one-step model: a terminal acceptance set
(``R_T(0)`` node by node) and a map sending the sets of the children of a
node to the set at the node. Superhedging under proportional costs is the
model that ships: ``R_{k-1}(A) = K_{k-1}(A) + intersection of R_k(A')``
over the children ``A'`` of ``A``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, Sequence

from setrisk._rational import POS_INF, q
from setrisk.errors import DomainError
from setrisk.polytope import (
    UpperPoly,
    intersect,
    lower_support,
    minkowski_sum,
    translate,
)
from setrisk.predictable import AdaptedVector
from setrisk.tree import Node, Tree


@dataclass(frozen=True)
class SetProcess:
    """One upper set per node of a level (decomposable by construction)."""

    level: int
    sets: tuple

    def at(self, node) -> UpperPoly:
        return self.sets[node.pos]

    def __len__(self) -> int:
        return len(self.sets)


@dataclass
class RiskResult:
    payoff_id: str
    levels: list = field(default_factory=list)  # levels[k] is the SetProcess at level k

    def at(self, node) -> UpperPoly:
        return self.levels[node.level].at(node)

    @property
    def root(self) -> UpperPoly:
        return self.levels[0].sets[0]


class OneStepModel(Protocol):
    dim: int

    def terminal_set(self, node: Node) -> UpperPoly: ...

    def one_step(self, node: Node, child_sets: Sequence[UpperPoly]) -> UpperPoly: ...


class Superhedging:
    """Superhedging with proportional transaction costs on a conic market."""

    def __init__(self, market):
        self.market = market
        self.dim = market.d

    def terminal_set(self, node):
        return self.market.cone_poly(node)

    def one_step(self, node, child_sets):
        inter = intersect(child_sets)
        if inter.empty:
            return inter
        return minkowski_sum(self.market.cone_poly(node), inter)


class RiskEngine:
    def __init__(self, tree: Tree, model: OneStepModel):
        self.tree = tree
        self.model = model
        self.dim = model.dim
        self._zero: RiskResult | None = None

    @classmethod
    def superhedging(cls, tree: Tree, market) -> "RiskEngine":
        return cls(tree, Superhedging(market))

    def terminal(self, X: AdaptedVector) -> SetProcess:
        """``-X + R_T(0)`` node-wise on the leaves."""
        if X.level != self.tree.K:
            raise DomainError(f"payoff must live on level K = {self.tree.K}, got {X.level}")
        leaves = self.tree.nodes(self.tree.K)
        return SetProcess(self.tree.K, tuple(
            translate(self.model.terminal_set(n), tuple(-v for v in X.at(n))) for n in leaves
        ))

    def backstep(self, k: int, P: SetProcess) -> SetProcess:
        if k < 1 or P.level != k:
            raise DomainError(f"backstep needs a set process at level k >= 1, got level {P.level}")
        nb = self.tree.branching
        out = []
        for parent in self.tree.nodes(k - 1):
            kids = P.sets[parent.pos * nb:(parent.pos + 1) * nb]
            out.append(self.model.one_step(parent, kids))
        return SetProcess(k - 1, tuple(out))

    def full_risk(self, X: AdaptedVector, payoff_id: str = "X") -> RiskResult:
        levels = [None] * (self.tree.K + 1)
        levels[self.tree.K] = self.terminal(X)
        for k in range(self.tree.K, 0, -1):
            levels[k - 1] = self.backstep(k, levels[k])
        return RiskResult(payoff_id, levels)

    def zero_risk(self) -> RiskResult:
        """``R_k(0)`` for every level (cached)."""
        if self._zero is None:
            zero = AdaptedVector(self.tree.K, [(q(0),) * self.dim] * len(self.tree.nodes(self.tree.K)))
            self._zero = self.full_risk(zero, "zero")
        return self._zero

    def continuation(self, node) -> UpperPoly:
        """``R_k(0)`` at ``node``: the acceptance set from the node's time to T."""
        return self.zero_risk().at(node)

    def stepped(self, Z: AdaptedVector) -> SetProcess:
        """``R_{k-1,k}(Z)`` for ``Z`` measurable at level k >= 1."""
        k = Z.level
        if k < 1:
            raise DomainError("the stepped risk measure needs level k >= 1")
        sets = tuple(translate(self.continuation(n), tuple(-v for v in Z.at(n))) for n in self.tree.nodes(k))
        return self.backstep(k, SetProcess(k, sets))

    def stepped_at(self, parent, payoff: Sequence[Sequence]) -> UpperPoly:
        """``R_{k-1,k}(Z)`` at one parent; ``payoff`` lists ``Z`` on its children."""
        kids = self.tree.children(parent)
        sets = [translate(self.continuation(c), tuple(-v for v in z)) for c, z in zip(kids, payoff)]
        return self.model.one_step(parent, sets)

    def stepped_sets(self, parent, child_sets: Sequence[UpperPoly]) -> UpperPoly:
        """``R_{k-1,k}[-S]`` at ``parent`` for a set-valued payoff ``S`` on its children.

        The union over selectors ``Z`` of ``S`` of ``R_{k-1,k}(-Z)`` equals
        the one-step map applied to ``S(A') + R_k(0)(A')``.
        """
        kids = self.tree.children(parent)
        sets = [minkowski_sum(s, self.continuation(c)) for c, s in zip(kids, child_sets)]
        return self.model.one_step(parent, sets)

    def scalarize(self, P: SetProcess, w) -> list:
        """Lower support per node; ``w`` is one vector or one vector per node.

        Empty node sets report ``+inf``.
        """
        nodes = self.tree.nodes(P.level)
        if w and not isinstance(w[0], (list, tuple)):
            w = [w] * len(nodes)
        out = []
        for n, wn in zip(nodes, w):
            if any(q(v) < 0 for v in wn) or not any(q(v) != 0 for v in wn):
                raise DomainError(f"direction {wn} must be nonzero and nonnegative")
            s = P.at(n)
            out.append(POS_INF if s.empty else lower_support(s, wn))
        return out
