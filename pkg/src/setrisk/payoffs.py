"""Payoff generators evaluated on rational lattice mid prices.

Generators return the *claim* delivered at maturity as a d-vector per leaf;
the position held by its seller is the negated claim.
"""

from __future__ import annotations

from typing import Sequence

from setrisk._rational import q
from setrisk.errors import ConfigError
from setrisk.predictable import AdaptedVector


def basket_put(tree, market, strike, weights: Sequence | None = None) -> AdaptedVector:
    """Cash-settled put on ``sum_i weights_i * S_i``, paid in the bond."""
    strike = q(strike)
    weights = [q(v) for v in weights] if weights is not None else [q(1)] * (market.d - 1)
    if len(weights) != market.d - 1:
        raise ConfigError("basket weights must match the number of risky assets")
    rows = []
    for leaf in tree.nodes(tree.K):
        basket = sum((w * s for w, s in zip(weights, market.mid(leaf))), q(0))
        rows.append((max(strike - basket, q(0)),) + (q(0),) * (market.d - 1))
    return AdaptedVector(tree.K, rows)


def basket_call(tree, market, strike, weights: Sequence | None = None) -> AdaptedVector:
    strike = q(strike)
    weights = [q(v) for v in weights] if weights is not None else [q(1)] * (market.d - 1)
    if len(weights) != market.d - 1:
        raise ConfigError("basket weights must match the number of risky assets")
    rows = []
    for leaf in tree.nodes(tree.K):
        basket = sum((w * s for w, s in zip(weights, market.mid(leaf))), q(0))
        rows.append((max(basket - strike, q(0)),) + (q(0),) * (market.d - 1))
    return AdaptedVector(tree.K, rows)


def exchange(tree, market, receive: int = 1, deliver: int = 0, ratio=1) -> AdaptedVector:
    """Physically settled exchange: receive one unit of ``receive`` against
    ``ratio`` units of ``deliver``, exercised when that is worth more than 0
    at mid prices. With ``deliver = 0`` this is a physically settled call.
    """
    d = market.d
    if not (0 <= receive < d and 0 <= deliver < d) or receive == deliver:
        raise ConfigError("exchange needs two distinct asset indices")
    ratio = q(ratio)
    rows = []
    for leaf in tree.nodes(tree.K):
        mid = (q(1),) + market.mid(leaf)
        row = [q(0)] * d
        if mid[receive] - ratio * mid[deliver] > 0:
            row[receive] += 1
            row[deliver] -= ratio
        rows.append(tuple(row))
    return AdaptedVector(tree.K, rows)


def table(tree, values: Sequence[Sequence], d: int) -> AdaptedVector:
    leaves = tree.nodes(tree.K)
    if len(values) != len(leaves):
        raise ConfigError(f"payoff table needs {len(leaves)} rows, got {len(values)}")
    rows = [tuple(q(v) for v in row) for row in values]
    if any(len(r) != d for r in rows):
        raise ConfigError(f"every payoff row needs {d} components")
    return AdaptedVector(tree.K, rows)
