"""Double description conversion for general polyhedra.

Cones are handled in integer arithmetic: every generator is kept as a
primitive integer vector, which keeps the numbers small and makes
duplicates easy to spot. Polyhedra are reduced to cones by homogenization.
"""

from __future__ import annotations

import math
from typing import Sequence

from setrisk._rational import int_primitive, primitive, q
from setrisk.errors import UnsupportedDimension

MAX_DIM = 4


def set_max_dim(n: int) -> None:
    global MAX_DIM
    MAX_DIM = int(n)


def _check_dim(n: int) -> None:
    if n > MAX_DIM:
        raise UnsupportedDimension(f"dimension {n} exceeds the double-description bound {MAX_DIM}")


def _idot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))


def cone_generators(rows: Sequence[Sequence[int]], n: int):
    """Generators of ``{y in R^n : row . y >= 0 for all rows}``.

    Returns ``(lines, rays)`` as lists of primitive integer tuples; lines
    span the lineality space and rays are extreme modulo lineality.
    """
    lines = [tuple(1 if i == j else 0 for i in range(n)) for j in range(n)]
    rays: list[tuple[int, ...]] = []
    zeros: list[int] = []  # bitmask of processed rows tight at each ray
    for idx, a in enumerate(rows):
        bit = 1 << idx
        pivot = next((l for l in lines if _idot(a, l) != 0), None)
        if pivot is not None:
            al0 = _idot(a, pivot)
            if al0 < 0:
                pivot = tuple(-v for v in pivot)
                al0 = -al0
            new_lines = []
            for l in lines:
                if l is pivot or l == pivot or l == tuple(-v for v in pivot):
                    continue
                al = _idot(a, l)
                if al:
                    l = int_primitive(tuple(al0 * x - al * p for x, p in zip(l, pivot)))
                if any(l):
                    new_lines.append(l)
            new_rays = []
            for r, z in zip(rays, zeros):
                ar = _idot(a, r)
                if ar:
                    r = int_primitive(tuple(al0 * x - ar * p for x, p in zip(r, pivot)))
                new_rays.append(r)
            all_prev = bit - 1
            new_zeros = [z | bit for z in zeros]
            new_rays.append(int_primitive(pivot))
            new_zeros.append(all_prev)
            lines, rays, zeros = new_lines, new_rays, new_zeros
            continue
        pos, neg, nxt_rays, nxt_zeros = [], [], [], []
        for r, z in zip(rays, zeros):
            ar = _idot(a, r)
            if ar > 0:
                pos.append((r, z, ar))
                nxt_rays.append(r)
                nxt_zeros.append(z)
            elif ar < 0:
                neg.append((r, z, ar))
            else:
                nxt_rays.append(r)
                nxt_zeros.append(z | bit)
        need = n - len(lines) - 2
        for rp, zp, ap in pos:
            for rn, zn, an in neg:
                common = zp & zn
                if _popcount(common) < need:
                    continue
                if _blocked(common, rp, rn, rays, zeros):
                    continue
                new = int_primitive(tuple(ap * x - an * y for x, y in zip(rn, rp)))
                nxt_rays.append(new)
                nxt_zeros.append(common | bit)
        rays, zeros = nxt_rays, nxt_zeros
    rays = sorted(set(rays))
    return sorted(lines), rays


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _blocked(common, rp, rn, rays, zeros) -> bool:
    for r, z in zip(rays, zeros):
        if common & z == common and r is not rp and r is not rn:
            return True
    return False


def _row_ints(a: Sequence, b) -> tuple[int, ...]:
    """Integer row of the homogenized inequality ``a.x - b*t >= 0``."""
    return primitive(list(a) + [-q(b)])


def hrep_to_vrep(rows: Sequence[tuple[Sequence, object]], n: int):
    """Vertices/rays/lines of ``{x in Q^n : a.x >= b for (a, b) in rows}``.

    Returns ``None`` for the empty set, else ``(points, rays, lines)`` where
    points are rational tuples and rays/lines primitive integer tuples.
    """
    _check_dim(n)
    hom = [_row_ints(a, b) for a, b in rows]
    hom.append(tuple([0] * n + [1]))
    lines, rays = cone_generators(hom, n + 1)
    points, out_rays = [], []
    for r in rays:
        t = r[-1]
        if t > 0:
            points.append(tuple(q(v) / t for v in r[:-1]))
        elif any(r[:-1]):
            out_rays.append(int_primitive(r[:-1]))
    if not points:
        return None
    out_lines = [int_primitive(l[:-1]) for l in lines if any(l[:-1])]
    return sorted(set(points)), sorted(set(out_rays)), sorted(set(out_lines))


def vrep_to_hrep(points: Sequence[Sequence], rays: Sequence[Sequence], lines: Sequence[Sequence], n: int):
    """Facet description ``[(a, b), ...]`` of ``conv(points) + cone(rays) + span(lines)``.

    Each row reads ``a.x >= b`` with ``a`` a primitive integer tuple.
    Implicit equalities come back as two opposite rows.
    """
    _check_dim(n)
    if not points:
        raise ValueError("a nonempty polyhedron needs at least one point")
    cons = []
    for p in points:
        cons.append(primitive(list(p) + [1]))
    for r in rays:
        cons.append(primitive(list(r) + [0]))
    for l in lines:
        v = primitive(list(l) + [0])
        cons.append(v)
        cons.append(tuple(-x for x in v))
    # dual cone of the homogenized generators: (a, c) with a.p + c >= 0
    dlines, drays = cone_generators(cons, n + 1)
    out = []
    for g in drays:
        _add_row(out, g, n)
    for g in dlines:
        _add_row(out, g, n)
        _add_row(out, tuple(-x for x in g), n)
    return sorted(set(out))


def _add_row(out, g, n):
    a = g[:n]
    if not any(a):
        return
    k = 0
    for v in a:
        k = math.gcd(k, v)
    out.append((tuple(v // k for v in a), q(-g[n]) / k))
