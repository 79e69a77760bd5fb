"""Randomized checks shared by the unit and acceptance tests."""

from setrisk._rational import q
from setrisk.polytope import contains, intersect, minkowski_sum, scale, set_eq, subset, translate
from setrisk.predictable import AdaptedVector


def rand_q(rng, lo=-3, hi=3, den=4):
    return q(rng.randint(lo * den, hi * den)) / rng.randint(1, den)


def random_payoff(engine, rng):
    tree = engine.tree
    return AdaptedVector(tree.K, [tuple(rand_q(rng) for _ in range(engine.dim)) for _ in tree.nodes(tree.K)])


def all_nodes(engine):
    return [n for level in engine.tree.levels for n in level]


def check_translativity(engine, rng):
    X = random_payoff(engine, rng)
    m = tuple(rand_q(rng) for _ in range(engine.dim))
    shifted = AdaptedVector(X.level, [tuple(a + b for a, b in zip(x, m)) for x in X.values])
    R, S = engine.full_risk(X), engine.full_risk(shifted)
    neg = tuple(-v for v in m)
    return all(set_eq(S.at(n), translate(R.at(n), neg)) for n in all_nodes(engine))


def check_monotonicity(engine, rng):
    X = random_payoff(engine, rng)
    bump = [tuple(q(rng.randint(0, 8)) / 4 for _ in range(engine.dim)) for _ in X.values]
    Y = AdaptedVector(X.level, [tuple(a + b for a, b in zip(x, y)) for x, y in zip(X.values, bump)])
    R, S = engine.full_risk(X), engine.full_risk(Y)
    return all(subset(R.at(n), S.at(n)) for n in all_nodes(engine))


def check_homogeneity(engine, rng):
    X = random_payoff(engine, rng)
    lam = q(rng.randint(1, 12)) / rng.randint(1, 5)
    R, S = engine.full_risk(X), engine.full_risk(X.scaled(lam))
    return all(set_eq(S.at(n), scale(R.at(n), lam)) for n in all_nodes(engine))


def check_normalization(engine, rng):
    X = random_payoff(engine, rng)
    R, Z = engine.full_risk(X), engine.zero_risk()
    zero = (q(0),) * engine.dim
    below = tuple(q(-1) / rng.randint(1, 10) for _ in range(engine.dim))
    for n in all_nodes(engine):
        if not set_eq(minkowski_sum(R.at(n), Z.at(n)), R.at(n)):
            return False
        if not contains(Z.at(n), zero) or contains(Z.at(n), below):
            return False
    return True


def check_decomposability(engine, rng):
    tree = engine.tree
    X, Y = random_payoff(engine, rng), random_payoff(engine, rng)
    k = rng.randint(0, tree.K)
    A = rng.choice(tree.nodes(k))
    below = {n.id for n in tree.descendants(A, tree.K)}
    leaves = tree.nodes(tree.K)
    Z = AdaptedVector(tree.K, [X.at(n) if n.id in below else Y.at(n) for n in leaves])
    RX, RY, RZ = engine.full_risk(X), engine.full_risk(Y), engine.full_risk(Z)
    for n in tree.nodes(k):
        expect = RX.at(n) if n.id == A.id else RY.at(n)
        if not set_eq(RZ.at(n), expect):
            return False
    return True


AXIOMS = {
    "translativity": check_translativity,
    "monotonicity": check_monotonicity,
    "positive homogeneity": check_homogeneity,
    "normalization": check_normalization,
    "decomposability": check_decomposability,
}


def lp_directions(engine, rng, n):
    """Half strictly positive random directions, half (1, s) with s between root bid and ask."""
    market = engine.model.market
    bid, ask, _ = market.prices(engine.tree.root)
    out = []
    for i in range(n):
        if i % 2 == 0:
            out.append(tuple(q(rng.randint(1, 12)) / rng.randint(1, 4) for _ in range(engine.dim)))
        else:
            s = tuple(b + (a - b) * rng.randint(0, 8) / 8 for b, a in zip(bid, ask))
            out.append((q(1),) + s)
    return out


# closed forms, written out as in the two-period examples (dt = 1)


def K(engine, *c):
    return engine.model.market._cone_poly(tuple(c))


def neg(v):
    return tuple(-x for x in v)


def add(*vs):
    return tuple(sum(x) for x in zip(*vs))


def random_z(engine, rng):
    return {I: tuple(rand_q(rng) for _ in range(engine.dim)) for I in engine.tree.indices}


def g_d2_t1(e, c, z):
    z = z[(1,)]
    return minkowski_sum(K(e, c), intersect([translate(K(e, c + 1), z), translate(K(e, c - 1), neg(z))]))


def g_d2_t0(e, z):
    z = z[(1,)]
    up = minkowski_sum(K(e, 1), intersect([K(e, 2), K(e, 0)]))
    down = minkowski_sum(K(e, -1), intersect([K(e, 0), K(e, -2)]))
    return minkowski_sum(K(e, 0), intersect([translate(up, z), translate(down, neg(z))]))


def shift_d3(z, b1, b2):
    z1, z2, z12 = z[(1,)], z[(2,)], z[(1, 2)]
    return add(tuple(b1 * v for v in z1), tuple(b2 * v for v in z2), tuple(b1 * b2 * v for v in z12))


def g_d3_t1(e, c1, c2, z):
    pieces = [translate(K(e, c1 + b1, c2 + b2), shift_d3(z, b1, b2)) for b1 in (1, -1) for b2 in (1, -1)]
    return minkowski_sum(K(e, c1, c2), intersect(pieces))


def g_d3_t0(e, z):
    pieces = []
    for b1 in (1, -1):
        for b2 in (1, -1):
            four = intersect([K(e, b1 + a1, b2 + a2) for a1 in (1, -1) for a2 in (1, -1)])
            pieces.append(translate(minkowski_sum(K(e, b1, b2), four), shift_d3(z, b1, b2)))
    return minkowski_sum(K(e, 0, 0), intersect(pieces))


def node_at(engine, level, moves):
    return next(n for n in engine.tree.nodes(level) if engine.tree.net_moves(n) == tuple(moves))
