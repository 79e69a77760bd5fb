"""Independent scalar routes to quantities the set engine computes.

Neither function touches polyhedra: the LP works on trading variables over
the whole tree, and the replication recursion is the textbook risk-neutral
backward induction for a frictionless binomial market.
"""

from __future__ import annotations

from typing import Sequence

from setrisk._rational import NEG_INF, q
from setrisk.errors import DomainError
from setrisk.lp import UNBOUNDED, StandardFormLP
from setrisk.predictable import AdaptedVector


class SuperhedgingLP:
    """``min w.y`` over initial capital ``y`` that superhedges ``-X``.

    Variables: free ``y`` in R^d, and at every node one nonnegative amount
    per exchange column (sell asset i at bid, buy asset i at ask). For each
    leaf, ``y + X(leaf) - sum of trades along the path`` must be
    componentwise nonnegative.
    """

    def __init__(self, tree, market, X: AdaptedVector):
        self.tree = tree
        self.d = d = market.d
        nodes = [n for level in tree.levels for n in level]
        gens = [(n.id, g) for n in nodes for g in market.exchange_generators(n)]
        leaves = tree.nodes(tree.K)
        n_trade = len(gens)
        n_rows = len(leaves) * d
        width = 2 * d + n_trade + n_rows
        A, b = [], []
        for li, leaf in enumerate(leaves):
            on_path = {a.id for a in tree.ancestors(leaf)}
            for j in range(d):
                row = [q(0)] * width
                row[j] = q(1)
                row[d + j] = q(-1)
                for t, (nid, g) in enumerate(gens):
                    if nid in on_path and g[j] != 0:
                        row[2 * d + t] = -g[j]
                row[2 * d + n_trade + li * d + j] = q(-1)
                A.append(row)
                b.append(-X.at(leaf)[j])
        self._width = width
        self._lp = StandardFormLP(A, b)

    def value(self, w: Sequence):
        w = [q(v) for v in w]
        if len(w) != self.d:
            raise DomainError(f"direction must have {self.d} components")
        c = w + [-v for v in w] + [q(0)] * (self._width - 2 * self.d)
        res = self._lp.minimize(c)
        if res.status == UNBOUNDED:
            return NEG_INF
        if not res.optimal:
            raise DomainError("superhedging LP is infeasible")
        return res.value


def replication_cost(tree, market, X: AdaptedVector):
    """Frictionless d = 2 price of the liquidation value ``X_0 + S_T X_1``.

    The risk-neutral up-probability of the lattice ``S0 u^n`` is
    ``(1 - 1/u) / (u - 1/u) = 1 / (u + 1)``.
    """
    if market.d != 2 or any(l != 0 for l in market.spec.lam):
        raise DomainError("replication oracle covers the frictionless two-asset market only")
    u = market.spec.up[0]
    p_up = 1 / (u + 1)
    values = [X.at(n)[0] + market.mid(n)[0] * X.at(n)[1] for n in tree.nodes(tree.K)]
    for _ in range(tree.K):
        # children of each parent are ordered (-1,), (+1,)
        values = [p_up * values[2 * i + 1] + (1 - p_up) * values[2 * i] for i in range(len(values) // 2)]
    return values[0]
