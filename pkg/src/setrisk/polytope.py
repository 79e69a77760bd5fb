"""Closed convex polyhedral upper sets in Q^d.

An :class:`UpperPoly` is stored by its canonical facet description
``{x : a.x >= b}``: primitive integer normals ``a`` in the nonnegative
orthant, sorted lexicographically, without redundant rows. Because upper
sets are full dimensional this description is unique, so equal sets have
equal canonical rows. The vertex/ray description is computed lazily.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from setrisk import dd, lp
from setrisk._rational import NEG_INF, dot, primitive, q, qvec, to_str
from setrisk.errors import DomainError, InvariantError


class UpperPoly:
    __slots__ = ("dim", "hrep", "empty", "_vrep")

    def __init__(self, dim: int, hrep=(), empty: bool = False, _vrep=None):
        self.dim = dim
        self.hrep = tuple(hrep) if not empty else ()
        self.empty = bool(empty)
        self._vrep = _vrep
        for a, _ in self.hrep:
            if len(a) != dim:
                raise InvariantError(f"normal {a} does not have dimension {dim}")
            if any(v < 0 for v in a) or not any(a):
                raise InvariantError(f"normal {a} is not a nonzero vector of the nonnegative orthant")

    # -- constructors ---------------------------------------------------------

    @classmethod
    def from_hrep(cls, dim: int, rows: Iterable[tuple[Sequence, object]]) -> "UpperPoly":
        """Canonicalize ``{x : a.x >= b}``; explicit-empty if infeasible."""
        rows = [(tuple(a), q(b)) for a, b in rows]
        for a, _ in rows:
            if any(q(v) < 0 for v in a) or not any(a):
                raise InvariantError(f"normal {a} is not a nonzero vector of the nonnegative orthant")
        vrep = dd.hrep_to_vrep(rows, dim)
        if vrep is None:
            return cls.empty_set(dim)
        return cls._from_generators(dim, *vrep)

    @classmethod
    def from_vrep(cls, dim: int, vertices: Iterable[Sequence], rays: Iterable[Sequence] = ()) -> "UpperPoly":
        """``conv(vertices) + cone(rays) + R^d_+`` (the orthant is always added)."""
        pts = [qvec(v) for v in vertices]
        if not pts:
            return cls.empty_set(dim)
        rys = [primitive(r) for r in rays] + _units(dim)
        rows = dd.vrep_to_hrep(pts, rys, [], dim)
        return cls(dim, rows)

    @classmethod
    def _from_generators(cls, dim, points, rays, lines) -> "UpperPoly":
        rows = dd.vrep_to_hrep(points, list(rays), list(lines), dim)
        return cls(dim, rows, _vrep=(tuple(points), tuple(rays) + tuple(lines) + tuple(tuple(-v for v in l) for l in lines)))

    @classmethod
    def empty_set(cls, dim: int) -> "UpperPoly":
        return cls(dim, (), empty=True)

    @classmethod
    def whole(cls, dim: int) -> "UpperPoly":
        return cls(dim, ())

    @classmethod
    def orthant(cls, dim: int, corner: Sequence | None = None) -> "UpperPoly":
        corner = qvec(corner) if corner is not None else tuple(q(0) for _ in range(dim))
        rows = [(tuple(1 if i == j else 0 for i in range(dim)), corner[j]) for j in range(dim)]
        return cls(dim, sorted(rows))

    @classmethod
    def halfspace(cls, normal: Sequence, offset) -> "UpperPoly":
        """``{x : normal.x >= offset}`` for a nonzero normal in the orthant."""
        normal = qvec(normal)
        if not any(normal):
            raise InvariantError("halfspace normal must be nonzero")
        a = primitive(normal)
        i = next(i for i, v in enumerate(a) if v)
        return cls(len(a), [(a, q(offset) * a[i] / normal[i])])

    # -- representations ------------------------------------------------------

    @property
    def vrep(self):
        """``(vertices, rays)``; lines appear as a pair of opposite rays.

        Raises :class:`DomainError` for the empty set.
        """
        if self.empty:
            raise DomainError("the empty set has no vertex description")
        if self._vrep is None:
            pts, rays, lines = dd.hrep_to_vrep(self.hrep, self.dim)
            self._vrep = (tuple(pts), tuple(rays) + tuple(lines) + tuple(tuple(-v for v in l) for l in lines))
        return self._vrep

    @property
    def vertices(self):
        return self.vrep[0]

    @property
    def rays(self):
        return self.vrep[1]

    @property
    def is_whole(self) -> bool:
        return not self.empty and not self.hrep

    def __eq__(self, other) -> bool:
        if not isinstance(other, UpperPoly):
            return NotImplemented
        return self.dim == other.dim and self.empty == other.empty and self.hrep == other.hrep

    def __hash__(self) -> int:
        return hash((self.dim, self.empty, self.hrep))

    def __repr__(self) -> str:
        if self.empty:
            return f"UpperPoly(dim={self.dim}, empty)"
        rows = ", ".join(f"{list(a)}.x>={to_str(b)}" for a, b in self.hrep)
        return f"UpperPoly(dim={self.dim}, [{rows}])"

    def to_json(self) -> dict:
        if self.empty:
            return {"H": [], "V": {"vertices": [], "rays": []}, "empty": True}
        pts, rays = self.vrep
        return {
            "H": [{"a": [to_str(v) for v in a], "b": to_str(b)} for a, b in self.hrep],
            "V": {
                "vertices": [[to_str(v) for v in p] for p in pts],
                "rays": [[to_str(v) for v in r] for r in rays],
            },
            "empty": False,
        }

    @classmethod
    def from_json(cls, data: dict, dim: int | None = None) -> "UpperPoly":
        if data.get("empty"):
            if dim is None:
                raise ValueError("dimension of an empty polyhedron must be given")
            return cls.empty_set(dim)
        rows = [(qvec(h["a"]), q(h["b"])) for h in data.get("H", [])]
        if rows:
            n = len(rows[0][0])
            return cls.from_hrep(n, rows)
        verts = data.get("V", {}).get("vertices", [])
        if verts:
            return cls.from_vrep(len(verts[0]), verts, data["V"].get("rays", []))
        if dim is None:
            raise ValueError("cannot infer the dimension of the whole space")
        return cls.whole(dim)


def _units(d: int) -> list[tuple[int, ...]]:
    return [tuple(1 if i == j else 0 for i in range(d)) for j in range(d)]


class Cone:
    """Finitely generated convex cone ``cone(generators)``."""

    __slots__ = ("dim", "generators")

    def __init__(self, generators: Iterable[Sequence]):
        self.generators = tuple(qvec(g) for g in generators)
        if not self.generators:
            raise ValueError("a cone needs at least one generator")
        self.dim = len(self.generators[0])

    def __repr__(self) -> str:
        gens = ", ".join("(" + ", ".join(to_str(v) for v in g) + ")" for g in self.generators)
        return f"Cone([{gens}])"

    def as_upperpoly(self) -> UpperPoly:
        """Facet description of the cone; it must contain the orthant."""
        zero = tuple(q(0) for _ in range(self.dim))
        rows = dd.vrep_to_hrep([zero], [primitive(g) for g in self.generators if any(g)], [], self.dim)
        for a, _ in rows:
            if any(v < 0 for v in a):
                raise InvariantError(f"cone {self} does not contain the nonnegative orthant")
        return UpperPoly(self.dim, rows)


def _same_dim(*polys: UpperPoly) -> int:
    dims = {p.dim for p in polys}
    if len(dims) != 1:
        raise DomainError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def hrep_from_vrep(vertices, rays, dim: int | None = None):
    """Canonical facet rows of ``conv(vertices) + cone(rays)``; rays must span an upper set."""
    vertices = [qvec(v) for v in vertices]
    if dim is None:
        dim = len(vertices[0])
    return dd.vrep_to_hrep(vertices, [primitive(r) for r in rays], [], dim)


def vrep_from_hrep(dim: int, rows):
    """``(vertices, rays)`` of ``{x : a.x >= b}``, or ``None`` when empty."""
    res = dd.hrep_to_vrep([(tuple(a), q(b)) for a, b in rows], dim)
    if res is None:
        return None
    pts, rays, lines = res
    return pts, rays + lines + [tuple(-v for v in l) for l in lines]


def minkowski_sum(P: UpperPoly, Q: UpperPoly) -> UpperPoly:
    d = _same_dim(P, Q)
    if P.empty or Q.empty:
        return UpperPoly.empty_set(d)
    if P.is_whole or Q.is_whole:
        return UpperPoly.whole(d)
    pv, pr = P.vrep
    qv, qr = Q.vrep
    pts = sorted({tuple(a + b for a, b in zip(x, y)) for x in pv for y in qv})
    rays = sorted(set(pr) | set(qr))
    return UpperPoly(d, dd.vrep_to_hrep(pts, rays, [], d))


def minkowski_sum_all(polys: Sequence[UpperPoly]) -> UpperPoly:
    out = polys[0]
    for p in polys[1:]:
        out = minkowski_sum(out, p)
    return out


def intersect(polys: Sequence[UpperPoly]) -> UpperPoly:
    polys = list(polys)
    d = _same_dim(*polys)
    if any(p.empty for p in polys):
        return UpperPoly.empty_set(d)
    rows = sorted({row for p in polys for row in p.hrep})
    if len(polys) == 1 or not rows:
        return polys[0] if len(polys) == 1 else UpperPoly.whole(d)
    return UpperPoly.from_hrep(d, rows)


def lower_support(P: UpperPoly, w: Sequence):
    """``inf {w.x : x in P}``; ``-inf`` when unbounded below.

    Evaluated on the vertex/ray description; :func:`lower_support_lp` is an
    independent simplex route to the same number.
    """
    if P.empty:
        raise DomainError("lower support of the empty set")
    w = qvec(w)
    pts, rays = P.vrep
    if any(dot(w, r) < 0 for r in rays):
        return NEG_INF
    return min(dot(w, p) for p in pts)


def lower_support_lp(P: UpperPoly, w: Sequence):
    """Same as :func:`lower_support`, via the exact simplex on the dual.

    ``inf {w.x : A x >= b} = max {b.mu : A^T mu = w, mu >= 0}``; an
    infeasible dual means the primal is unbounded below.
    """
    if P.empty:
        raise DomainError("lower support of the empty set")
    w = qvec(w)
    if P.is_whole:
        return q(0) if not any(w) else NEG_INF
    A_eq = [[q(a[i]) for a, _ in P.hrep] for i in range(P.dim)]
    res = lp.StandardFormLP(A_eq, w)
    if not res.feasible:
        return NEG_INF
    out = res.maximize([b for _, b in P.hrep])
    if not out.optimal:
        raise DomainError("primal infeasible: polyhedron is empty")
    return out.value


def contains(P: UpperPoly, x: Sequence) -> bool:
    if P.empty:
        return False
    x = qvec(x)
    return all(dot(a, x) >= b for a, b in P.hrep)


def violated_row(P: UpperPoly, x: Sequence):
    """First facet row violated by ``x``, or ``None`` if ``x`` is in ``P``."""
    x = qvec(x)
    for a, b in P.hrep:
        if dot(a, x) < b:
            return a, b
    return None


def subset(P: UpperPoly, Q: UpperPoly) -> bool:
    _same_dim(P, Q)
    if P.empty:
        return True
    if Q.empty:
        return False
    return all(lower_support(P, a) >= b for a, b in Q.hrep)


def set_eq(P: UpperPoly, Q: UpperPoly) -> bool:
    return subset(P, Q) and subset(Q, P)


def scale(P: UpperPoly, lam) -> UpperPoly:
    lam = q(lam)
    if lam <= 0:
        raise DomainError("scale factor must be positive")
    if P.empty:
        return P
    return UpperPoly(P.dim, [(a, b * lam) for a, b in P.hrep])


def translate(P: UpperPoly, v: Sequence) -> UpperPoly:
    v = qvec(v)
    if P.empty:
        return P
    return UpperPoly(P.dim, [(a, b + dot(a, v)) for a, b in P.hrep])


def geometric_difference(C: UpperPoly, D: UpperPoly) -> UpperPoly:
    """``{u : u + D subset of C}``, row by row on the facets of ``C``."""
    d = _same_dim(C, D)
    if D.empty:
        return UpperPoly.whole(d)
    if C.empty:
        return UpperPoly.empty_set(d)
    rows = []
    for a, b in C.hrep:
        ell = lower_support(D, a)
        if ell == NEG_INF:
            return UpperPoly.empty_set(d)
        rows.append((a, b - ell))
    if not rows:
        return UpperPoly.whole(d)
    return UpperPoly.from_hrep(d, rows)
