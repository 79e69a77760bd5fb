"""Halfspace hulls, constructors and the set-valued backward difference equation.

Everything here is organised per parent node: a direction process on level
k restricted to the children of one parent is a tuple with one nonzero
nonnegative vector per child. Decomposability of the engine makes the
other nodes of the level irrelevant for that parent.

The intersection over all directions is replaced by a finite family per
parent (see ``direction_family``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from setrisk import lp
from setrisk._rational import NEG_INF, POS_INF, q, to_str
from setrisk.errors import DomainError
from setrisk.polytope import (
    UpperPoly,
    geometric_difference,
    intersect,
    lower_support,
    minkowski_sum,
    scale,
    set_eq,
    translate,
)
from setrisk.predictable import AdaptedVector, decompose_scalar, increment_sum
from setrisk.riskmeasure import RiskEngine, SetProcess


def _check_direction(w) -> tuple:
    w = tuple(q(v) for v in w)
    if any(v < 0 for v in w) or not any(v != 0 for v in w):
        raise DomainError(f"direction {[to_str(v) for v in w]} must be nonzero and nonnegative")
    return w


@dataclass(frozen=True)
class DirectionProcess:
    level: int
    w: tuple  # one vector per node of the level, by position

    def __post_init__(self):
        object.__setattr__(self, "w", tuple(_check_direction(v) for v in self.w))

    def at(self, node) -> tuple:
        return self.w[node.pos]


def gamma_set(w) -> UpperPoly:
    """``{u : w.u >= 0}``."""
    return UpperPoly.halfspace(_check_direction(w), 0)


def gamma(w: DirectionProcess) -> tuple:
    return tuple(gamma_set(v) for v in w.w)


@dataclass(frozen=True)
class HalfspaceHull:
    """Per node ``{u : w.u >= rho}``; ``rho = -inf`` means the whole space
    and ``rho = +inf`` an empty node."""

    level: int
    w: tuple
    rho: tuple

    def whole(self, i: int) -> bool:
        return self.rho[i] == NEG_INF

    def set_at(self, i: int) -> UpperPoly:
        d = len(self.w[i])
        if self.rho[i] == NEG_INF:
            return UpperPoly.whole(d)
        if self.rho[i] == POS_INF:
            return UpperPoly.empty_set(d)
        return UpperPoly.halfspace(self.w[i], self.rho[i])


def hull_of(sets: Sequence[UpperPoly], w: Sequence) -> HalfspaceHull:
    """Tightest halfspaces with normals ``w`` containing each set."""
    w = tuple(_check_direction(v) for v in w)
    rho = tuple(POS_INF if s.empty else lower_support(s, v) for s, v in zip(sets, w))
    return HalfspaceHull(-1, w, rho)


def hull_H(P: SetProcess, w: DirectionProcess) -> HalfspaceHull:
    if P.level != w.level or len(P.sets) != len(w.w):
        raise DomainError("set process and direction process must live on the same level")
    h = hull_of(P.sets, w.w)
    return HalfspaceHull(P.level, h.w, h.rho)


# -- constructors -------------------------------------------------------------------


@dataclass(frozen=True)
class ConstructorPair:
    """Scalars with ``(xi_hat + sum_I psi_hat_I Delta M_I(A')) r`` on the boundary
    of the hull at each child ``A'`` of one parent."""

    xi_hat: object
    psi_hat: dict
    r: tuple

    def psi_vectors(self) -> dict:
        return {I: tuple(p * c for c in self.r) for I, p in self.psi_hat.items()}


def constructors(engine: RiskEngine, parent, hull: HalfspaceHull, r: Sequence) -> ConstructorPair | None:
    """Constructor pair at ``parent`` from the hull on its children.

    ``hull`` holds one entry per child of ``parent``. Returns ``None`` when a
    child hull is the whole space: no constructor exists and the direction
    drops out of the intersection.
    """
    tree = engine.tree
    r = tuple(q(v) for v in r)
    if any(v <= 0 for v in r):
        raise DomainError("r must be strictly positive")
    if any(hull.whole(i) for i in range(len(hull.rho))) or POS_INF in hull.rho:
        return None
    s = []
    for wv, rho in zip(hull.w, hull.rho):
        wr = sum((a * b for a, b in zip(wv, r)), q(0))
        s.append(rho / wr)
    # decompose on a one-parent slice: the coefficients only see this block
    k = parent.level + 1
    padded = [q(0)] * len(tree.nodes(k))
    kids = tree.children(parent)
    for c, v in zip(kids, s):
        padded[c.pos] = v
    rep = decompose_scalar(tree, k, padded)
    xi, psi = rep.coefficients(parent)
    pair = ConstructorPair(xi[0], {I: v[0] for I, v in psi.items()}, r)
    for i, c in enumerate(kids):
        u0 = _constructed_point(tree, c, pair)
        if not set_eq(translate(gamma_set(hull.w[i]), u0), hull.set_at(i)):
            raise AssertionError(f"constructor does not reproduce the hull at node {c.id}")
    return pair


def _constructed_point(tree, child, pair: ConstructorPair) -> tuple:
    level = pair.xi_hat + sum((p * tree.increment_value(child, I) for I, p in pair.psi_hat.items()), q(0))
    return tuple(level * c for c in pair.r)


# -- driver --------------------------------------------------------------------------


def driver_E_times_dt(engine: RiskEngine, parent, psi_at: dict, w_children: Sequence) -> UpperPoly:
    """``R_{k-1,k}[-sum psi_I Delta M_I - Gamma(w)]`` at ``parent``."""
    tree = engine.tree
    kids = tree.children(parent)
    sets = [translate(gamma_set(w), increment_sum(tree, c, psi_at)) for c, w in zip(kids, w_children)]
    return engine.stepped_sets(parent, sets)


def driver_E(engine: RiskEngine, level: int, psi: dict, w: DirectionProcess) -> SetProcess:
    """``G_E(t_{level}, psi, w)`` node-wise; ``psi`` maps I to adapted vectors at ``level``."""
    tree = engine.tree
    inv = 1 / tree.spec.dt[level]
    out = []
    for parent in tree.nodes(level):
        kids = tree.children(parent)
        g = driver_E_times_dt(engine, parent, {I: v.at(parent) for I, v in psi.items()}, [w.at(c) for c in kids])
        out.append(scale(g, inv))
    return SetProcess(level, tuple(out))


# -- direction families -------------------------------------------------------------

FAMILIES = ("constant", "facet", "split", "all")


def _split_directions(child_sets, normal):
    """Split ``normal`` over the stacked facets of the children.

    Solves ``max sum mu_j b_j`` over ``mu >= 0`` with ``sum mu_j a_j = normal``;
    the part of ``sum mu_j a_j`` belonging to each child becomes that child's
    direction. Returns ``None`` if the LP has no optimum.
    """
    rows = [(i, a, b) for i, s in enumerate(child_sets) for a, b in s.hrep]
    if not rows:
        return None
    d = len(normal)
    c = [-b for _, _, b in rows]
    A_eq = [[a[j] for _, a, _ in rows] for j in range(d)]
    res = lp.solve(c, A_eq=A_eq, b_eq=list(normal))
    if not res.optimal:
        return None
    out = []
    for i, s in enumerate(child_sets):
        v = [q(0)] * d
        for (ci, a, _), mu in zip(rows, res.x):
            if ci == i and mu:
                v = [x + mu * y for x, y in zip(v, a)]
        if not any(v):
            if not s.hrep:
                return None
            v = list(s.hrep[0][0])
        out.append(tuple(q(x) for x in v))
    return tuple(out)


def direction_family(engine: RiskEngine, parent, child_sets: Sequence[UpperPoly], parent_set: UpperPoly,
                     kind: str = "split") -> list:
    """Finite family of direction tuples (one vector per child of ``parent``).

    ``constant``: one facet normal of one child, used at every child.
    ``facet``: every choice of one own facet normal per child.
    ``split``: for every facet normal of the parent set, its optimal split
    over the children's facets; this family alone recovers the parent set.
    ``all``: union of ``split`` and ``facet``. Results are deduplicated and sorted.
    """
    if kind not in FAMILIES:
        raise DomainError(f"unknown direction family {kind!r}")
    n = len(child_sets)
    fam = set()
    if kind == "constant":
        for s in child_sets:
            for a, _ in s.hrep:
                fam.add(tuple(tuple(q(v) for v in a) for _ in range(n)))
    if kind in ("facet", "all") and all(s.hrep for s in child_sets):
        normals = [[tuple(q(v) for v in a) for a, _ in s.hrep] for s in child_sets]
        fam.update(itertools.product(*normals))
    if kind in ("split", "all") and not parent_set.empty:
        for a, _ in parent_set.hrep:
            split = _split_directions(child_sets, a)
            if split is not None:
                fam.add(split)
    return sorted(fam)


def _w_json(w_children) -> list:
    return [[to_str(v) for v in w] for w in w_children]


# -- identity and backstep -------------------------------------------------------------


def intersection_identity(engine: RiskEngine, X: AdaptedVector, k: int, family: str = "split", risk=None) -> dict:
    """Rebuild level k-1 as an intersection of stepped halfspace hulls and compare.

    Per parent and direction tuple ``w`` the term is ``R_{k-1,k}[-H]`` with
    ``H`` the halfspace hulls of ``R_k(X)`` at the children; directions with a
    whole-space hull at some child are skipped.
    """
    tree = engine.tree
    if k < 1:
        raise DomainError("the intersection identity needs k >= 1")
    risk = risk or engine.full_risk(X)
    report = {"level": k - 1, "family": family, "nodes": [], "ok": True}
    for parent in tree.nodes(k - 1):
        kids = tree.children(parent)
        child_sets = [risk.at(c) for c in kids]
        target = risk.at(parent)
        fam = direction_family(engine, parent, child_sets, target, family)
        terms, skipped = [], 0
        for w in fam:
            hull = hull_of(child_sets, w)
            if any(hull.whole(i) for i in range(len(kids))):
                skipped += 1
                continue
            terms.append(engine.stepped_sets(parent, [hull.set_at(i) for i in range(len(kids))]))
        rebuilt = intersect(terms) if terms else UpperPoly.whole(engine.dim)
        ok = set_eq(rebuilt, target)
        entry = {"node": parent.id, "member": ok, "directions": len(fam), "skipped": skipped}
        if not ok:
            entry["witness"] = {"engine": target.to_json(), "rebuilt": rebuilt.to_json()}
            report["ok"] = False
        report["nodes"].append(entry)
    return report


def svbsde_term(engine: RiskEngine, parent, hull: HalfspaceHull, pair: ConstructorPair) -> UpperPoly:
    """``G_E(A, psi_hat r, w) dt`` plus the intersection over children of the
    geometric difference of the hull by the translated orthant."""
    tree = engine.tree
    kids = tree.children(parent)
    psi_vec = pair.psi_vectors()
    g_dt = driver_E_times_dt(engine, parent, psi_vec, hull.w)
    diffs = []
    for i, c in enumerate(kids):
        D = UpperPoly.orthant(engine.dim, increment_sum(tree, c, psi_vec))
        diffs.append(geometric_difference(hull.set_at(i), D))
    inner = intersect(diffs)
    if g_dt.empty or inner.empty:
        return UpperPoly.empty_set(engine.dim)
    return minkowski_sum(g_dt, inner)


def svbsde_backstep(engine: RiskEngine, X: AdaptedVector, k: int, r: Sequence | None = None,
                    family: str = "split", risk=None) -> tuple[SetProcess, dict]:
    """Level k-1 from level k through constructors and geometric differences."""
    tree = engine.tree
    if k < 1:
        raise DomainError("the backstep needs k >= 1")
    r = tuple(q(v) for v in (r or [1] * engine.dim))
    risk = risk or engine.full_risk(X)
    report = {"level": k - 1, "r": [to_str(v) for v in r], "nodes": [], "ok": True}
    out = []
    for parent in tree.nodes(k - 1):
        kids = tree.children(parent)
        child_sets = [risk.at(c) for c in kids]
        target = risk.at(parent)
        terms, entries = [], []
        for w in direction_family(engine, parent, child_sets, target, family):
            hull = hull_of(child_sets, w)
            pair = constructors(engine, parent, hull, r)
            if pair is None:
                entries.append({"w": _w_json(w), "constructor": None})
                continue
            terms.append(svbsde_term(engine, parent, hull, pair))
            entries.append({"w": _w_json(w), "constructor": {
                "xi_hat": to_str(pair.xi_hat),
                "psi_hat": {"".join(map(str, I)): to_str(v) for I, v in sorted(pair.psi_hat.items())},
            }})
        rebuilt = intersect(terms) if terms else UpperPoly.whole(engine.dim)
        out.append(rebuilt)
        ok = set_eq(rebuilt, target)
        entry = {"node": parent.id, "member": ok, "directions": entries}
        if not ok:
            entry["witness"] = {"engine": target.to_json(), "rebuilt": rebuilt.to_json()}
            report["ok"] = False
        report["nodes"].append(entry)
    return SetProcess(k - 1, tuple(out)), report
