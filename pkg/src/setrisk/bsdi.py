"""Drivers and backward stochastic difference inclusions.

The local driver at a node ``A`` of level k-1 with deterministic argument
``z = (z_I)`` is the stepped risk of the payoff ``-sum_I z_I Delta M_I``
evaluated at ``A``, scaled by ``1/dt_k``. The semi-local and nonlocal
drivers are assembled from it node by node.

Verification is constructive. For the inclusion side, the coefficients
``psi`` come from the predictable representation of ``Y(t_k)``. For the
converse side, random coefficients and random selectors of the driver are
pushed through the inclusion and the result is tested for membership in
the engine's set.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from setrisk import dd
from setrisk._rational import q, to_str
from setrisk.polytope import (
    UpperPoly,
    contains,
    intersect,
    minkowski_sum,
    scale,
    set_eq,
    translate,
    violated_row,
)
from setrisk.predictable import AdaptedVector, decompose, increment_sum
from setrisk.riskmeasure import RiskEngine, SetProcess
from setrisk.tree import IncrementIndex


def _neg(v):
    return tuple(-x for x in v)


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def driver_local(engine: RiskEngine, node, z: Mapping[IncrementIndex, Sequence]) -> UpperPoly:
    """Local driver at ``node`` (level k-1) for deterministic ``z``."""
    return scale(driver_times_dt(engine, node, z), 1 / engine.tree.spec.dt[node.level])


def driver_times_dt(engine: RiskEngine, node, z) -> UpperPoly:
    """``dt_k`` times the local driver: the stepped risk of ``-sum z_I Delta M_I``."""
    tree = engine.tree
    payoff = [_neg(increment_sum(tree, c, z)) for c in tree.children(node)]
    return engine.stepped_at(node, payoff)


def driver_semilocal(engine: RiskEngine, level: int, z) -> SetProcess:
    return SetProcess(level, tuple(driver_local(engine, n, z) for n in engine.tree.nodes(level)))


def driver_nonlocal(engine: RiskEngine, level: int, psi: Mapping[IncrementIndex, AdaptedVector]) -> SetProcess:
    """Node ``A`` maps to the local driver at ``A`` with argument ``psi(A)``."""
    return SetProcess(level, tuple(
        driver_local(engine, n, {I: v.at(n) for I, v in psi.items()}) for n in engine.tree.nodes(level)
    ))


def driver_direct(engine: RiskEngine, level: int, psi: Mapping[IncrementIndex, AdaptedVector]) -> SetProcess:
    """``(1/dt) R_{k-1,k}(-sum psi_I Delta M_I)`` from one stepped call on the whole level."""
    tree = engine.tree
    rows = []
    for child in tree.nodes(level + 1):
        parent = tree.parent(child)
        rows.append(_neg(increment_sum(tree, child, {I: v.at(parent) for I, v in psi.items()})))
    stepped = engine.stepped(AdaptedVector(level + 1, rows))
    inv = 1 / tree.spec.dt[level]
    return SetProcess(level, tuple(scale(s, inv) for s in stepped.sets))


# -- certificates ---------------------------------------------------------------


@dataclass
class Certificate:
    step: int
    ok: bool
    entries: list = field(default_factory=list)
    psi: dict | None = None
    first_failure: dict | None = None

    def to_json(self) -> dict:
        return {
            "step": self.step,
            "ok": self.ok,
            "entries": self.entries,
            "first_failure": self.first_failure,
        }


def _witness(member, point, poly):
    if member:
        return [to_str(v) for v in point]
    row = violated_row(poly, point)
    if row is None:  # empty driver set
        return None
    a, b = row
    return {"a": [to_str(v) for v in a], "b": to_str(b)}


def one_step_member(engine: RiskEngine, parent, y, Y_next: AdaptedVector, psi_at: Mapping, g_dt: UpperPoly | None = None):
    """Check ``y in Y_next(A') + g(A, psi) dt - sum psi_I Delta M_I(A')`` for every child ``A'``.

    Returns ``(member, entries)`` with one entry per child.
    """
    tree = engine.tree
    if g_dt is None:
        g_dt = driver_times_dt(engine, parent, psi_at)
    entries = []
    ok = True
    for child in tree.children(parent):
        point = _add(_sub(y, Y_next.at(child)), increment_sum(tree, child, psi_at))
        member = contains(g_dt, point)
        ok = ok and member
        entries.append({"node": child.id, "parent": parent.id, "member": member, "witness": _witness(member, point, g_dt)})
    return ok, entries


def verify_one_step(engine: RiskEngine, Y_prev: AdaptedVector, Y_next: AdaptedVector) -> Certificate:
    """Certify the random inclusion between two consecutive selectors.

    ``psi`` is the predictable representation of ``Y_next``.
    """
    tree = engine.tree
    k = Y_next.level
    rep = decompose(tree, Y_next)
    cert = Certificate(step=k, ok=True, psi=rep.psi)
    for parent in tree.nodes(k - 1):
        psi_at = {I: v.at(parent) for I, v in rep.psi.items()}
        ok, entries = one_step_member(engine, parent, Y_prev.at(parent), Y_next, psi_at)
        cert.entries.extend(entries)
        if not ok and cert.ok:
            cert.ok = False
            cert.first_failure = next(e for e in entries if not e["member"])
    return cert


# -- random selectors -------------------------------------------------------------


def random_selector(poly: UpperPoly, rng: random.Random, ray_scale: int = 3) -> tuple:
    """Random point of ``poly``: a rational convex combination of its vertices
    plus a bounded nonnegative combination of its rays."""
    pts, rays = poly.vrep
    weights = [rng.randint(1, 9) for _ in pts]
    total = sum(weights)
    point = [q(0)] * poly.dim
    for wgt, p in zip(weights, pts):
        point = [x + q(wgt) / total * v for x, v in zip(point, p)]
    for r in rays:
        c = q(rng.randint(0, 4 * ray_scale)) / 4
        point = [x + c * v for x, v in zip(point, r)]
    return tuple(point)


def random_psi(engine: RiskEngine, rng: random.Random, bound: int = 3) -> dict:
    return {I: tuple(q(rng.randint(-4 * bound, 4 * bound)) / rng.randint(1, 4) for _ in range(engine.dim))
            for I in engine.tree.indices}


# -- reachable sets -------------------------------------------------------------


def _measurable_prev(engine, parent, Y_next, psi_at, V):
    """``Y_next(A') + V - sum psi_I Delta M_I(A')`` if it is the same at every
    child ``A'`` of ``parent``, else ``None``."""
    tree = engine.tree
    vals = {_add(_sub(Y_next.at(c), increment_sum(tree, c, psi_at)), V) for c in tree.children(parent)}
    return vals.pop() if len(vals) == 1 else None


def reachable_equivalence(engine: RiskEngine, Y_next: AdaptedVector, samples: int = 200, seed: int = 0) -> dict:
    """Compare ``R_{k-1,k}(-Y_next)`` with the reachable set of the one-step inclusion.

    Inclusion side: every vertex of the engine set passes the inclusion
    with ``psi`` from the predictable representation.

    Converse side: ``samples`` random pairs ``(psi, V)`` with ``V`` a random
    selector of ``g(A, psi) dt``. The pair is admissible when
    ``Y_prev = Y_next + V - sum psi_I Delta M_I`` is measurable one step
    earlier; admissible pairs must land in the engine set. Even samples use
    the representation coefficients (always admissible), odd samples use
    random coefficients, which are admissible only if they happen to equal
    the representation.

    Odd samples also record a diagnostic for the pointwise reading in which
    the selector may differ between children: a point of the intersection
    over children of ``Y_next(A') + g dt - sum psi_I Delta M_I(A')``. Such
    points need not lie in the engine set; they are counted, not failed.
    """
    rng = random.Random(seed)
    tree = engine.tree
    k = Y_next.level
    engine_sets = engine.stepped(-Y_next)
    rep = decompose(tree, Y_next)
    report = {"step": k, "vertices_checked": 0, "vertex_failures": [], "samples": 0, "admissible": 0,
              "inadmissible": 0, "sample_failures": [], "vacuous_samples": 0,
              "pointwise_points": 0, "pointwise_outside": 0}
    parents = tree.nodes(k - 1)
    for parent in parents:
        E = engine_sets.at(parent)
        if E.empty:
            continue
        psi_at = {I: v.at(parent) for I, v in rep.psi.items()}
        g_dt = driver_times_dt(engine, parent, psi_at)
        for vtx in E.vertices:
            report["vertices_checked"] += 1
            ok, entries = one_step_member(engine, parent, vtx, Y_next, psi_at, g_dt)
            if not ok:
                report["vertex_failures"].append({"node": parent.id, "vertex": [to_str(v) for v in vtx],
                                                  "entries": [e for e in entries if not e["member"]]})
    for s in range(samples):
        parent = parents[s % len(parents)]
        E = engine_sets.at(parent)
        report["samples"] += 1
        if s % 2 == 0:
            psi_at = {I: v.at(parent) for I, v in rep.psi.items()}
        else:
            psi_at = random_psi(engine, rng)
        g_dt = driver_times_dt(engine, parent, psi_at)
        if g_dt.empty:
            report["vacuous_samples"] += 1
            continue
        V = random_selector(g_dt, rng)
        y = _measurable_prev(engine, parent, Y_next, psi_at, V)
        if y is None:
            report["inadmissible"] += 1
        else:
            report["admissible"] += 1
            if not contains(E, y):
                report["sample_failures"].append({"node": parent.id, "point": [to_str(v) for v in y]})
        if s % 2 == 1:
            S = intersect([translate(g_dt, _sub(Y_next.at(c), increment_sum(tree, c, psi_at)))
                           for c in tree.children(parent)])
            if not S.empty:
                report["pointwise_points"] += 1
                if not contains(E, random_selector(S, rng)):
                    report["pointwise_outside"] += 1
    report["ok"] = not report["vertex_failures"] and not report["sample_failures"]
    return report


@dataclass
class SelectorPath:
    Y: list  # AdaptedVector per level 0..K
    psi: list = field(default_factory=list)  # psi[k-1] = coefficient map for the step into level k
    certified: bool = False
    certificates: list = field(default_factory=list)


def sample_paths(engine: RiskEngine, X: AdaptedVector, n: int, seed: int = 0, vertex_minimal: bool = False) -> list:
    """Draw ``n`` adapted paths backwards and certify each step.

    ``Y(t_K)`` is a selector of ``-X + R_T(0)`` and ``Y(t_{k-1})`` a selector of
    ``R_{k-1,k}(-Y(t_k))``. With ``vertex_minimal`` the first vertex of each
    set is taken instead of a random point. Returns ``[]`` if any set on
    the way is empty.
    """
    rng = random.Random(seed)
    tree = engine.tree
    paths = []
    for _ in range(n):
        Y = [None] * (tree.K + 1)
        sets = engine.terminal(X)
        for k in range(tree.K, -1, -1):
            if any(s.empty for s in sets.sets):
                return []
            Y[k] = AdaptedVector(k, [
                s.vertices[0] if vertex_minimal else random_selector(s, rng) for s in sets.sets
            ])
            if k:
                sets = engine.stepped(-Y[k])
        paths.append(certify_path(engine, SelectorPath(Y)))
    return paths


def certify_path(engine: RiskEngine, path: SelectorPath) -> SelectorPath:
    path.certificates = []
    path.psi = []
    ok = True
    for k in range(1, engine.tree.K + 1):
        cert = verify_one_step(engine, path.Y[k - 1], path.Y[k])
        path.certificates.append(cert)
        path.psi.append(cert.psi)
        ok = ok and cert.ok
    path.certified = ok
    return path


def terminal_ok(engine: RiskEngine, X: AdaptedVector, path: SelectorPath) -> bool:
    term = engine.terminal(X)
    return all(contains(term.at(n), path.Y[-1].at(n)) for n in engine.tree.nodes(engine.tree.K))


def multistep_inclusion(engine: RiskEngine, path: SelectorPath) -> list:
    """Check the multi-step random inclusion at every node of every level.

    For a node ``A_k`` and every leaf below it, ``Y(A_k) - Y(leaf) + sum of
    psi Delta M`` along the path must lie in the sum of ``g dt`` along the
    path. Returns the list of failures (empty when all hold).
    """
    tree = engine.tree
    K = tree.K
    drivers = {}
    for k in range(1, K + 1):
        psi = path.psi[k - 1]
        for parent in tree.nodes(k - 1):
            drivers[parent.id] = driver_times_dt(engine, parent, {I: v.at(parent) for I, v in psi.items()})
    failures = []
    for leaf in tree.nodes(K):
        chain = tree.ancestors(leaf)
        acc_set = None
        acc_inc = tuple(q(0) for _ in range(engine.dim))
        for k in range(K - 1, -1, -1):
            node, child = chain[k], chain[k + 1]
            psi = path.psi[k]
            acc_inc = _add(acc_inc, increment_sum(tree, child, {I: v.at(node) for I, v in psi.items()}))
            g = drivers[node.id]
            acc_set = g if acc_set is None else minkowski_sum(g, acc_set)
            point = _add(_sub(path.Y[k].at(node), path.Y[K].at(leaf)), acc_inc)
            if not contains(acc_set, point):
                failures.append({"level": k, "node": node.id, "leaf": leaf.id})
    return failures


def forward_path(engine: RiskEngine, risk, y) -> SelectorPath:
    """Path starting at root point ``y`` of ``R_0(X)``, built forwards.

    At each node the current point is split as ``c + u`` with ``c`` in the
    node's solvency cone and ``u`` in every child set; ``u`` becomes the
    value at all children.
    """
    tree = engine.tree
    K = tree.K
    values = {tree.root.id: tuple(q(v) for v in y)}
    Y = [AdaptedVector(0, [values[tree.root.id]])]
    market = engine.model.market
    for k in range(K):
        rows = []
        for node in tree.nodes(k):
            cur = values[node.id]
            hrep = []
            for child in tree.children(node):
                hrep.extend(risk.at(child).hrep)
            for a, _ in market.cone_poly(node).hrep:
                hrep.append((tuple(-v for v in a), -sum((v * c for v, c in zip(a, cur)), q(0))))
            found = dd.hrep_to_vrep(hrep, engine.dim)
            if found is None:
                raise ValueError(f"point {cur} is not in the risk set at node {node.id}")
            u = found[0][0]
            for child in tree.children(node):
                values[child.id] = u
                rows.append(u)
        Y.append(AdaptedVector(k + 1, rows))
    return certify_path(engine, SelectorPath(Y))


def multistep_equivalence(engine: RiskEngine, X: AdaptedVector, samples: int = 20, seed: int = 0) -> dict:
    """Reachable set of the multi-step inclusion versus ``R_0(X)``.

    * every vertex of ``R_0(X)`` starts a certified forward path;
    * ``samples`` backward-sampled certified paths start inside ``R_0(X)``;
    * chaining the one-step reachable sets from ``-X + R_T(0)`` reproduces
      every level of ``full_risk(X)``.
    """
    risk = engine.full_risk(X)
    report = {"forward_paths": 0, "forward_failures": [], "backward_paths": 0, "backward_failures": [],
              "chain_mismatch": []}
    root = risk.root
    if not root.empty:
        for vtx in root.vertices:
            path = forward_path(engine, risk, vtx)
            report["forward_paths"] += 1
            if not path.certified or not terminal_ok(engine, X, path) or multistep_inclusion(engine, path):
                report["forward_failures"].append([to_str(v) for v in vtx])
    for i, path in enumerate(sample_paths(engine, X, samples, seed=seed)):
        report["backward_paths"] += 1
        inside = contains(root, path.Y[0].values[0])
        if not (path.certified and inside and terminal_ok(engine, X, path)) or multistep_inclusion(engine, path):
            report["backward_failures"].append(i)
    tree = engine.tree
    chained = engine.terminal(X)
    for k in range(tree.K, 0, -1):
        sets = tuple(engine.stepped_sets(p, [chained.at(c) for c in tree.children(p)]) for p in tree.nodes(k - 1))
        chained = SetProcess(k - 1, sets)
        for n in tree.nodes(k - 1):
            if not set_eq(chained.at(n), risk.at(n)):
                report["chain_mismatch"].append({"level": k - 1, "node": n.id})
    report["ok"] = not (report["forward_failures"] or report["backward_failures"] or report["chain_mismatch"])
    return report


# -- closed forms on two-period trees -------------------------------------------------


def _cone(market, moves) -> UpperPoly:
    return market._cone_poly(tuple(moves))


def _shift(tree, b, z, root_dt):
    """``sum_I z_I prod_{i in I} b_i`` times ``sqrt(dt)`` for one outcome ``b``."""
    d = len(next(iter(z.values())))
    out = [q(0)] * d
    for I, coef in z.items():
        sign = 1
        for i in I:
            sign *= b[i - 1]
        out = [o + sign * root_dt * q(c) for o, c in zip(out, coef)]
    return tuple(out)


def closed_form_driver(tree, market, node, z) -> UpperPoly:
    """Driver on a two-period tree written out with solvency cones only.

    At t = 1 with walk position c: ``K_1(c) + intersection over b of
    (s z.b + K_2(c + b))``. At t = 0: ``K_0 + intersection over b of
    (s z.b + K_1(b) + intersection over b' of K_2(b + b'))``. Here ``s`` is
    the square root of the step length and ``z.b`` the sign-weighted sum of
    the coefficients. Everything is scaled by ``1/dt``.
    """
    if tree.K != 2:
        raise ValueError("closed forms cover two-period trees only")
    t = node.level
    if t not in (0, 1):
        raise ValueError("closed forms are defined at t = 0 and t = 1")
    c = tree.net_moves(node)
    root_dt = tree.spec.sqrt_dt[t]
    outs = tree.outcomes
    pieces = []
    for b in outs:
        child = tuple(x + y for x, y in zip(c, b))
        if t == 1:
            cont = _cone(market, child)
        else:
            inner = intersect([_cone(market, tuple(x + y for x, y in zip(child, b2))) for b2 in outs])
            cont = minkowski_sum(_cone(market, child), inner)
        pieces.append(translate(cont, _shift(tree, b, z, root_dt)))
    g = minkowski_sum(_cone(market, c), intersect(pieces))
    return scale(g, 1 / tree.spec.dt[t])


def closed_form_verdict(engine: RiskEngine, level: int, z) -> list:
    """Per node of ``level``: does the engine driver equal the closed form?"""
    market = engine.model.market
    return [
        {"node": n.id, "member": set_eq(driver_local(engine, n, z), closed_form_driver(engine.tree, market, n, z))}
        for n in engine.tree.nodes(level)
    ]
