"""Predictable representation over the 2^m - 1 increment processes.

Any vector ``Y`` measurable at level k splits uniquely as
``Y = xi + sum_I psi_I * Delta M_I(t_k)`` with ``xi`` and every ``psi_I``
measurable at level k - 1. Per parent the coefficients are averages of the
child values against sign products, so no linear system is solved.

The representation is an identity of functions on {-1, +1}^m; branch
probabilities play no part in it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from setrisk._rational import q
from setrisk.errors import DomainError
from setrisk.tree import IncrementIndex, Tree, sign_product


@dataclass(frozen=True)
class AdaptedVector:
    """One d-vector per node of a level, indexed by node position."""

    level: int
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(tuple(q(v) for v in row) for row in self.values))

    @property
    def dim(self) -> int:
        return len(self.values[0])

    def at(self, node) -> tuple:
        return self.values[node.pos]

    def __add__(self, other: "AdaptedVector") -> "AdaptedVector":
        return AdaptedVector(self.level, [tuple(a + b for a, b in zip(x, y)) for x, y in zip(self.values, other.values)])

    def __neg__(self) -> "AdaptedVector":
        return AdaptedVector(self.level, [tuple(-a for a in x) for x in self.values])

    def scaled(self, lam) -> "AdaptedVector":
        lam = q(lam)
        return AdaptedVector(self.level, [tuple(lam * a for a in x) for x in self.values])


def adapted(tree: Tree, level: int, fn) -> AdaptedVector:
    """Build an adapted vector from ``fn(node) -> vector``."""
    return AdaptedVector(level, [fn(node) for node in tree.nodes(level)])


def constant(tree: Tree, level: int, value: Sequence) -> AdaptedVector:
    return AdaptedVector(level, [tuple(value)] * len(tree.nodes(level)))


@dataclass(frozen=True)
class PredictableRep:
    level: int
    xi: AdaptedVector
    psi: Mapping[IncrementIndex, AdaptedVector]

    def coefficients(self, parent) -> tuple[tuple, dict]:
        """``(xi^A, {I: psi_I^A})`` at one parent node."""
        return self.xi.at(parent), {I: v.at(parent) for I, v in self.psi.items()}


def decompose(tree: Tree, Y: AdaptedVector) -> PredictableRep:
    k = Y.level
    if k < 1:
        raise DomainError("the predictable representation needs level k >= 1")
    d = Y.dim
    nb = tree.branching
    inv = q(1) / nb
    root_dt = tree.spec.sqrt_dt[k - 1]
    xi_vals = []
    psi_vals = {I: [] for I in tree.indices}
    for parent in tree.nodes(k - 1):
        block = Y.values[parent.pos * nb:(parent.pos + 1) * nb]
        xi_vals.append(tuple(inv * sum((c[j] for c in block), q(0)) for j in range(d)))
        for I in tree.indices:
            signs = [sign_product(b, I) for b in tree.outcomes]
            psi_vals[I].append(tuple(
                inv * sum((s * c[j] for s, c in zip(signs, block)), q(0)) / root_dt for j in range(d)
            ))
    return PredictableRep(
        k,
        AdaptedVector(k - 1, xi_vals),
        {I: AdaptedVector(k - 1, vals) for I, vals in psi_vals.items()},
    )


def reconstruct(tree: Tree, rep: PredictableRep) -> AdaptedVector:
    k = rep.level
    values = []
    for child in tree.nodes(k):
        parent_pos = child.pos // tree.branching
        row = list(rep.xi.values[parent_pos])
        for I, psi in rep.psi.items():
            inc = tree.increment_value(child, I)
            row = [r + p * inc for r, p in zip(row, psi.values[parent_pos])]
        values.append(tuple(row))
    return AdaptedVector(k, values)


def decompose_scalar(tree: Tree, level: int, s: Sequence) -> PredictableRep:
    """Scalar version: ``s`` holds one rational per level-k node."""
    return decompose(tree, AdaptedVector(level, [(v,) for v in s]))


def increment_sum(tree: Tree, child, psi: Mapping[IncrementIndex, Sequence]) -> tuple:
    """``sum_I psi_I * Delta M_I(child)`` for deterministic coefficients ``psi``."""
    out = None
    for I, coef in psi.items():
        inc = tree.increment_value(child, I)
        term = [inc * q(c) for c in coef]
        out = term if out is None else [a + b for a, b in zip(out, term)]
    return tuple(out)
