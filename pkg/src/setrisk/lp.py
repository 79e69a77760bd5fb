"""Exact rational simplex for small dense linear programs.

The tableau holds gmpy2 rationals, pivoting follows Bland's rule, so the
method terminates and every reported value is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from setrisk._rational import q

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_ZERO = q(0)


@dataclass
class LPResult:
    status: str
    value: object = None
    x: tuple | None = None

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class StandardFormLP:
    """``min c.x  s.t.  A x = b, x >= 0``.

    Phase one runs once in the constructor; :meth:`minimize` can then be
    called for many objectives, each warm-started from the last optimal
    basis (which stays primal feasible since the constraints do not change).
    """

    def __init__(self, A: Sequence[Sequence], b: Sequence):
        self.n = len(A[0]) if A else 0
        rows = [[q(v) for v in row] for row in A]
        rhs = [q(v) for v in b]
        for i, bi in enumerate(rhs):
            if bi < 0:
                rows[i] = [-v for v in rows[i]]
                rhs[i] = -bi
        self.feasible = True
        self._tab = None
        self._rhs = None
        self._basis = None
        self._phase_one(rows, rhs)

    def _phase_one(self, rows, rhs):
        m, n = len(rows), self.n
        tab = [row + [q(1) if j == i else _ZERO for j in range(m)] for i, row in enumerate(rows)]
        basis = [n + i for i in range(m)]
        cost = [_ZERO] * n + [q(1)] * m
        obj = _reduced_costs(tab, basis, cost)
        value = -sum(rhs, _ZERO)
        value = _run_simplex(tab, rhs, basis, obj, value, allowed=n + m)
        if value is None or value != 0:
            # phase one is bounded below by 0, so None cannot occur
            self.feasible = False
            return
        # drive zero-level artificials out of the basis; drop redundant rows
        i = 0
        while i < len(basis):
            if basis[i] >= n:
                col = next((j for j in range(n) if tab[i][j] != 0), None)
                if col is None:
                    del tab[i]
                    del rhs[i]
                    del basis[i]
                    continue
                _pivot(tab, rhs, None, i, col)
                basis[i] = col
            i += 1
        self._tab = [row[:n] for row in tab]
        self._rhs = rhs
        self._basis = basis

    def minimize(self, c: Sequence) -> LPResult:
        if not self.feasible:
            return LPResult(INFEASIBLE)
        cost = [q(v) for v in c]
        tab = [row[:] for row in self._tab]
        rhs = self._rhs[:]
        basis = self._basis[:]
        obj = _reduced_costs(tab, basis, cost)
        value = -sum((cost[b] * r for b, r in zip(basis, rhs)), _ZERO)
        value = _run_simplex(tab, rhs, basis, obj, value, allowed=self.n)
        if value is None:
            return LPResult(UNBOUNDED)
        self._tab, self._rhs, self._basis = tab, rhs, basis
        x = [_ZERO] * self.n
        for b, r in zip(basis, rhs):
            x[b] = r
        return LPResult(OPTIMAL, -value, tuple(x))

    def maximize(self, c: Sequence) -> LPResult:
        res = self.minimize([-q(v) for v in c])
        if res.optimal:
            res.value = -res.value
        return res


def _reduced_costs(tab, basis, cost):
    obj = list(cost) + [_ZERO] * (len(tab[0]) - len(cost) if tab else 0)
    for i, b in enumerate(basis):
        cb = cost[b] if b < len(cost) else _ZERO
        if cb != 0:
            row = tab[i]
            for j, v in enumerate(row):
                if v != 0:
                    obj[j] -= cb * v
    return obj


def _pivot(tab, rhs, obj, r, s):
    prow = tab[r]
    piv = prow[s]
    if piv != 1:
        inv = 1 / piv
        prow = [v * inv for v in prow]
        tab[r] = prow
        rhs[r] = rhs[r] * inv
    nz = [j for j, v in enumerate(prow) if v != 0]
    rr = rhs[r]
    for i, row in enumerate(tab):
        if i == r:
            continue
        f = row[s]
        if f != 0:
            for j in nz:
                row[j] -= f * prow[j]
            rhs[i] -= f * rr
    if obj is not None:
        f = obj[s]
        if f != 0:
            for j in nz:
                obj[j] -= f * prow[j]
            return f * rr
    return _ZERO


def _run_simplex(tab, rhs, basis, obj, value, allowed):
    """Bland-rule primal simplex; returns the negated objective, None if unbounded.

    ``value`` tracks ``-c_B B^{-1} b`` so that the optimum is ``-value``.
    """
    while True:
        s = next((j for j in range(allowed) if obj[j] < 0), None)
        if s is None:
            return value
        best = None
        for i, row in enumerate(tab):
            a = row[s]
            if a > 0:
                ratio = rhs[i] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return None
        r = best[1]
        value -= _pivot(tab, rhs, obj, r, s)
        basis[r] = s


def solve(c, A_ub=(), b_ub=(), A_eq=(), b_eq=(), free=()) -> LPResult:
    """``min c.x`` subject to ``A_ub x >= b_ub`` and ``A_eq x = b_eq``.

    Variables listed in ``free`` are unrestricted; all others are
    nonnegative. Returns primal values in the original variable order.
    """
    n = len(c)
    free = sorted(set(free))
    n_ub = len(A_ub)
    # columns: original vars, negative parts of free vars, surplus per >= row
    width = n + len(free) + n_ub
    A, b = [], []
    for k, (row, rhs) in enumerate(zip(A_ub, b_ub)):
        full = [q(v) for v in row] + [-q(row[j]) for j in free] + [_ZERO] * n_ub
        full[n + len(free) + k] = q(-1)
        A.append(full)
        b.append(q(rhs))
    for row, rhs in zip(A_eq, b_eq):
        A.append([q(v) for v in row] + [-q(row[j]) for j in free] + [_ZERO] * n_ub)
        b.append(q(rhs))
    cost = [q(v) for v in c] + [-q(c[j]) for j in free] + [_ZERO] * n_ub
    if not A:
        if any(v < 0 for v in cost):
            return LPResult(UNBOUNDED)
        return LPResult(OPTIMAL, _ZERO, tuple([_ZERO] * n))
    lp = StandardFormLP(A, b)
    res = lp.minimize(cost)
    if not res.optimal:
        return res
    x = list(res.x[:n])
    for k, j in enumerate(free):
        x[j] -= res.x[n + k]
    assert width == len(res.x)
    return LPResult(OPTIMAL, res.value, tuple(x))
