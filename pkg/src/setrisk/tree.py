"""Filtration tree of the m-dimensional Bernoulli random walk.

Nodes at level k are the 2^(k m) outcome paths ``b(1), ..., b(k)`` with
``b(l) in {-1, +1}^m``. Within a level, nodes are ordered lexicographically
by path (with -1 before +1), so the children of the node at position ``p``
occupy positions ``p * 2^m`` through ``p * 2^m + 2^m - 1`` of the next level.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping

from setrisk._rational import q, rational_sqrt
from setrisk.errors import ConfigError, DomainError

Outcome = tuple  # tuple of +-1 of length m
IncrementIndex = tuple  # sorted tuple of 1-based walk indices


def outcomes(m: int) -> list[Outcome]:
    """All of {-1, +1}^m in lexicographic order."""
    return [tuple(b) for b in itertools.product((-1, 1), repeat=m)]


def increment_indices(m: int) -> list[IncrementIndex]:
    """The 2^m - 1 nonempty subsets of {1..m}, ordered by bitmask."""
    return [tuple(i + 1 for i in range(m) if mask >> i & 1) for mask in range(1, 2**m)]


def sign_product(b: Outcome, index: IncrementIndex) -> int:
    s = 1
    for i in index:
        s *= b[i - 1]
    return s


@dataclass(frozen=True)
class TreeSpec:
    m: int
    K: int
    dt: tuple = ()
    probs: tuple = ()  # one {outcome: probability} map per step
    sqrt_dt: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 1:
            raise ConfigError(f"m must be a positive integer, got {self.m!r}")
        if not isinstance(self.K, int) or self.K < 1:
            raise ConfigError(f"K must be a positive integer, got {self.K!r}")
        dt = tuple(q(v) for v in self.dt) if self.dt else tuple(q(1) for _ in range(self.K))
        if len(dt) != self.K:
            raise ConfigError(f"expected {self.K} time steps, got {len(dt)}")
        roots = []
        for k, h in enumerate(dt, start=1):
            if h <= 0:
                raise ConfigError(f"dt[{k}] = {h} is not positive")
            r = rational_sqrt(h)
            if r is None:
                raise ConfigError(f"sqrt(dt[{k}]) = sqrt({h}) is not rational")
            roots.append(r)
        probs = self.probs or tuple(None for _ in range(self.K))
        if len(probs) != self.K:
            raise ConfigError(f"expected {self.K} probability tables, got {len(probs)}")
        tables = tuple(_check_table(self.m, table, k) for k, table in enumerate(probs, start=1))
        object.__setattr__(self, "dt", dt)
        object.__setattr__(self, "probs", tables)
        object.__setattr__(self, "sqrt_dt", tuple(roots))


def _check_table(m: int, table: Mapping | None, step: int) -> dict:
    outs = outcomes(m)
    if table is None:
        return {b: q(1) / len(outs) for b in outs}
    table = {tuple(int(s) for s in b): q(p) for b, p in table.items()}
    if set(table) != set(outs):
        raise ConfigError(f"step {step}: probability table must cover exactly {{-1,+1}}^{m}")
    for b, p in table.items():
        if p <= 0:
            raise ConfigError(f"step {step}: outcome {b} has non-positive probability {p}")
    total = sum(table.values(), q(0))
    if total != 1:
        raise ConfigError(f"step {step}: probabilities sum to {total}, not 1")
    return table


@dataclass(frozen=True)
class Node:
    level: int
    pos: int
    path: tuple  # tuple of outcomes
    id: int

    @property
    def last(self) -> Outcome:
        if self.level == 0:
            raise DomainError("the root has no last outcome")
        return self.path[-1]


class Tree:
    """Immutable node store with parent/child links and path probabilities."""

    def __init__(self, spec: TreeSpec):
        self.spec = spec
        self.m = spec.m
        self.K = spec.K
        self.branching = 2**spec.m
        self.outcomes = outcomes(spec.m)
        self.indices = increment_indices(spec.m)
        levels = [[Node(0, 0, (), 0)]]
        next_id = 1
        for k in range(1, spec.K + 1):
            level = []
            for parent in levels[-1]:
                for b in self.outcomes:
                    level.append(Node(k, len(level), parent.path + (b,), next_id))
                    next_id += 1
            levels.append(level)
        self.levels = levels
        self._prob = [[q(1)]]
        for k in range(1, spec.K + 1):
            table = spec.probs[k - 1]
            self._prob.append([self._prob[k - 1][n.pos // self.branching] * table[n.last] for n in levels[k]])

    def __repr__(self) -> str:
        return f"Tree(m={self.m}, K={self.K}, nodes={self.size})"

    @property
    def size(self) -> int:
        return sum(len(level) for level in self.levels)

    @property
    def root(self) -> Node:
        return self.levels[0][0]

    def nodes(self, level: int) -> list[Node]:
        return self.levels[level]

    def children(self, node: Node) -> list[Node]:
        if node.level >= self.K:
            return []
        start = node.pos * self.branching
        return self.levels[node.level + 1][start:start + self.branching]

    def parent(self, node: Node) -> Node:
        if node.level == 0:
            raise DomainError("the root has no parent")
        return self.levels[node.level - 1][node.pos // self.branching]

    def ancestors(self, node: Node) -> list[Node]:
        """Path from the root down to ``node`` (inclusive)."""
        out = [node]
        while out[-1].level > 0:
            out.append(self.parent(out[-1]))
        return out[::-1]

    def descendants(self, node: Node, level: int) -> list[Node]:
        span = self.branching ** (level - node.level)
        return self.levels[level][node.pos * span:(node.pos + 1) * span]

    def prob(self, node: Node):
        return self._prob[node.level][node.pos]

    def cond_prob(self, child: Node):
        return self.spec.probs[child.level - 1][child.last]

    def increment_value(self, child: Node, index: IncrementIndex):
        """``Delta M_I`` on the step into ``child``: sqrt(dt_k) * prod_{i in I} b_i(k)."""
        if child.level == 0:
            raise DomainError("increments are defined for levels k >= 1")
        return self.spec.sqrt_dt[child.level - 1] * sign_product(child.last, index)

    def walk_value(self, node: Node, i: int):
        """``M_i`` at ``node``: sum over the path of sqrt(dt_l) * b_i(l)."""
        if not 1 <= i <= self.m:
            raise DomainError(f"walk index {i} outside 1..{self.m}")
        return sum((self.spec.sqrt_dt[l] * b[i - 1] for l, b in enumerate(node.path)), q(0))

    def net_moves(self, node: Node) -> tuple[int, ...]:
        """Integer net up-moves of each principal walk along the path."""
        return tuple(sum(b[i] for b in node.path) for i in range(self.m))


def build_tree(spec: TreeSpec) -> Tree:
    return Tree(spec)


def reachable_sums(u: int) -> list[int]:
    """Possible values of b(1) + ... + b(u) for signs b(s) in {-1, +1}."""
    return sorted({sum(bs) for bs in itertools.product((-1, 1), repeat=u)}) if u else [0]
