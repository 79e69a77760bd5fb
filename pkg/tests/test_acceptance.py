"""Acceptance criteria. Each test records one PASS/FAIL line, printed after the run."""

import random
import time

from checks import (
    AXIOMS,
    g_d2_t0,
    g_d2_t1,
    g_d3_t0,
    g_d3_t1,
    lp_directions,
    node_at,
    random_payoff,
    random_z,
)
from conftest import ACCEPTANCE_LINES, fixture_engine, make_engine, solve_linear
from setrisk import bsdi, payoffs, svbsde
from setrisk._rational import q
from setrisk.oracle import SuperhedgingLP, replication_cost
from setrisk.polytope import set_eq
from setrisk.predictable import AdaptedVector, decompose, reconstruct
from setrisk.tree import TreeSpec, build_tree


def record(number, title, ok, elapsed, limit, detail=""):
    passed = ok and elapsed < limit
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} ({elapsed:.2f}s, limit {limit}s)"
    if detail:
        line += f" - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line
    assert elapsed < limit, line


def test_criterion_1_predictable_roundtrip():
    rng = random.Random(101)
    t0 = time.perf_counter()
    bad = 0
    trees = {}
    for trial in range(100):
        m, K, d = rng.randint(1, 3), rng.randint(1, 3), rng.randint(1, 3)
        if (m, K) not in trees:
            trees[m, K] = build_tree(TreeSpec(m=m, K=K, dt=tuple(["1/4", "1/9", "4/9"][:K])))
        tree = trees[m, K]
        k = rng.randint(1, K)
        Y = AdaptedVector(k, [tuple(q(rng.randint(-30, 30)) / rng.randint(1, 7) for _ in range(d))
                              for _ in tree.nodes(k)])
        rep = decompose(tree, Y)
        if reconstruct(tree, rep) != Y:
            bad += 1
            continue
        parent = rng.choice(tree.nodes(k - 1))
        kids = tree.children(parent)
        A = [[q(1)] + [tree.increment_value(c, I) for I in tree.indices] for c in kids]
        xi, psi = rep.coefficients(parent)
        for j in range(d):
            sol = solve_linear(A, [Y.at(c)[j] for c in kids])
            if sol[0] != xi[j] or any(sol[t] != psi[I][j] for t, I in enumerate(tree.indices, start=1)):
                bad += 1
                break
    record(1, "predictable representation roundtrip + linear-system oracle", bad == 0,
           time.perf_counter() - t0, 5, f"100 vectors, {bad} mismatches")


def test_criterion_2_driver_closed_forms():
    t0 = time.perf_counter()
    rng = random.Random(202)
    checked, bad = 0, 0
    e2 = fixture_engine("d2", 2)
    up, down = node_at(e2, 1, (1,)), node_at(e2, 1, (-1,))
    for _ in range(20):
        z = random_z(e2, rng)
        for got, expect in ((bsdi.driver_local(e2, up, z), g_d2_t1(e2, 1, z)),
                            (bsdi.driver_local(e2, down, z), g_d2_t1(e2, -1, z)),
                            (bsdi.driver_local(e2, e2.tree.root, z), g_d2_t0(e2, z))):
            checked += 1
            bad += not set_eq(got, expect)
    e3 = fixture_engine("d3", 2)
    for _ in range(20):
        z = random_z(e3, rng)
        for c in [(1, 1), (1, -1), (-1, 1), (-1, -1)]:
            checked += 1
            bad += not set_eq(bsdi.driver_local(e3, node_at(e3, 1, c), z), g_d3_t1(e3, *c, z))
        checked += 1
        bad += not set_eq(bsdi.driver_local(e3, e3.tree.root, z), g_d3_t0(e3, z))
    record(2, "driver closed forms d=2 (3 formulas) and d=3 (5 formulas), 20 z each", bad == 0,
           time.perf_counter() - t0, 60, f"{checked} comparisons, {bad} mismatches")


def test_criterion_3_lp_oracle():
    t0 = time.perf_counter()
    rng = random.Random(303)
    checked, bad, finite = 0, 0, 0
    for name, K in (("d2", 3), ("d3", 2)):
        e = fixture_engine(name, K)
        tree, mk = e.tree, e.model.market
        claims = {
            "zero": payoffs.table(tree, [[0] * e.dim] * len(tree.nodes(K)), e.dim),
            "exchange": -payoffs.exchange(tree, mk),
            "basket put": -payoffs.basket_put(tree, mk, 2 if name == "d2" else 3),
        }
        for X in claims.values():
            root = e.full_risk(X).levels[0]
            lp = SuperhedgingLP(tree, mk, X)
            for w in lp_directions(e, rng, 20):
                checked += 1
                a, b = e.scalarize(root, w)[0], lp.value(w)
                finite += a not in (float("inf"), float("-inf"))
                bad += a != b
    record(3, "root scalarization equals full-tree LP (3 payoffs x 20 w, 2 fixtures)", bad == 0,
           time.perf_counter() - t0, 60, f"{checked} directions, {finite} finite, {bad} mismatches")


def test_criterion_4_reachable_sets():
    t0 = time.perf_counter()
    problems = []
    steps, vertices, admissible = 0, 0, 0
    for name, K in (("d2", 3), ("d3", 2), ("d3", 3)):
        e = fixture_engine(name, K)
        for label, X in (("exchange", -payoffs.exchange(e.tree, e.model.market)),
                         ("basket put", -payoffs.basket_put(e.tree, e.model.market, 3))):
            path = bsdi.sample_paths(e, X, 1, seed=K)[0]
            for k in range(K, 0, -1):
                rep = bsdi.reachable_equivalence(e, path.Y[k], samples=200, seed=k)
                steps += 1
                vertices += rep["vertices_checked"]
                admissible += rep["admissible"]
                if not rep["ok"] or rep["admissible"] < 100:
                    problems.append(f"{name}/K={K}/{label}/step {k}")
            multi = bsdi.multistep_equivalence(e, X, samples=3, seed=K)
            if not multi["ok"]:
                problems.append(f"{name}/K={K}/{label}/multistep")
    record(4, "one-step reachable-set equivalence and multi-step chaining", not problems,
           time.perf_counter() - t0, 120,
           f"{steps} steps, {vertices} vertices, {admissible} admissible samples; failures: {problems or 'none'}")


def test_criterion_5_halfspace_identity_and_svbsde():
    t0 = time.perf_counter()
    problems, count = [], 0
    for name, K, ident_only in (("d2", 2, False), ("d3", 2, False), ("d2", 3, True), ("d3", 3, True)):
        e = fixture_engine(name, K, ["1/4"] * K)
        for label, X in (("exchange", -payoffs.exchange(e.tree, e.model.market)),
                         ("basket put", -payoffs.basket_put(e.tree, e.model.market, 3))):
            R = e.full_risk(X)
            for k in range(K, 0, -1):
                count += 1
                if not svbsde.intersection_identity(e, X, k, risk=R)["ok"]:
                    problems.append(f"identity {name}/K={K}/{label}/k={k}")
                if ident_only:
                    continue
                P, rep = svbsde.svbsde_backstep(e, X, k, risk=R)
                if not rep["ok"] or not all(set_eq(a, b) for a, b in zip(P.sets, R.levels[k - 1].sets)):
                    problems.append(f"backstep {name}/K={K}/{label}/k={k}")
    record(5, "halfspace intersection identity and SV-BSDE backstep reproduce full_risk", not problems,
           time.perf_counter() - t0, 120, f"{count} levels; failures: {problems or 'none'}")


def test_criterion_6_axioms():
    t0 = time.perf_counter()
    rng = random.Random(606)
    engines = [fixture_engine("d2", 2), fixture_engine("d3", 1)]
    failed = {}
    for name, check in AXIOMS.items():
        fails = sum(not check(engines[i % 2], rng) for i in range(50))
        if fails:
            failed[name] = fails
    record(6, "translativity, monotonicity, homogeneity, normalization, decomposability (50 trials each)",
           not failed, time.perf_counter() - t0, 30, f"failures: {failed or 'none'}")


def test_criterion_7_frictionless_collapse():
    t0 = time.perf_counter()
    rng = random.Random(707)
    bad = 0
    for K in (1, 2, 3):
        e = make_engine(1, K, ["2"], ["3/2"], [0])
        for _ in range(10):
            X = random_payoff(e, rng)
            root = e.full_risk(X).root
            cost = replication_cost(e.tree, e.model.market, X)
            if len(root.hrep) != 1 or root.hrep[0] != ((1, 2), -cost):
                bad += 1
    record(7, "frictionless root set is one halfspace at the replication cost", bad == 0,
           time.perf_counter() - t0, 5, f"30 payoffs, {bad} mismatches")
