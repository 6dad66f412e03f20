"""Exact rational linear programming and polytope vertex enumeration.

Everything here runs on :class:`fractions.Fraction`, so a feasibility verdict
is a statement about the rational system and not about a tolerance.

``solve_lp`` works on problems of the form::

    optimize  c.x   subject to  A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0

with a two-phase dense tableau and Bland's rule. When phase one ends with a
positive artificial total, the final duals give a Farkas certificate.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

Number = int | Fraction
Matrix = Sequence[Sequence[Number]]


def frac(x) -> Fraction:
    """Parse ints, Fractions and "p/q" strings; floats are converted exactly."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: list[Fraction] | None = None
    value: Fraction | None = None
    # Farkas multipliers for an infeasible system (see verify_farkas)
    certificate: dict | None = None
    pivots: int = 0


@dataclass
class _Tableau:
    rows: list[list[Fraction]]  # last entry of each row is the rhs
    cost: list[Fraction]        # reduced costs, last entry is -objective
    basis: list[int]
    pivots: int = 0

    def pivot(self, r: int, j: int) -> None:
        row = self.rows[r]
        p = row[j]
        if p != 1:
            row = [v / p for v in row]
            self.rows[r] = row
        nz = [k for k, v in enumerate(row) if v]
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other[j]
            if f:
                for k in nz:
                    other[k] -= f * row[k]
        f = self.cost[j]
        if f:
            for k in nz:
                self.cost[k] -= f * row[k]
        self.basis[r] = j
        self.pivots += 1

    def run(self, allowed: int) -> str:
        """Bland's rule iterations over columns ``< allowed``."""
        while True:
            j = next((k for k in range(allowed) if self.cost[k] < 0), None)
            if j is None:
                return "optimal"
            best = None
            for i, row in enumerate(self.rows):
                if row[j] > 0:
                    key = (row[-1] / row[j], self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return "unbounded"
            self.pivot(best[1], j)


def solve_lp(c: Sequence[Number] | None, a_eq: Matrix = (), b_eq: Sequence[Number] = (),
             a_ub: Matrix = (), b_ub: Sequence[Number] = (), maximize: bool = False,
             n: int | None = None) -> LPResult:
    """Solve an LP over nonnegative variables exactly.

    ``c=None`` asks only for feasibility. ``n`` gives the variable count when
    there is no objective and no constraint row to infer it from.
    """
    if n is None:
        n = len(c) if c is not None else len((list(a_eq) + list(a_ub))[0])
    a_eq = [[frac(v) for v in row] for row in a_eq]
    a_ub = [[frac(v) for v in row] for row in a_ub]
    b_eq = [frac(v) for v in b_eq]
    b_ub = [frac(v) for v in b_ub]
    if len(a_eq) != len(b_eq) or len(a_ub) != len(b_ub):
        raise ValueError("constraint rows and right-hand sides differ in length")
    if any(len(row) != n for row in a_eq + a_ub):
        raise ValueError("constraint row length does not match variable count")
    m_eq, m_ub = len(a_eq), len(a_ub)
    m = m_eq + m_ub
    n_struct = n + m_ub          # original variables plus slacks
    width = n_struct + m         # plus one artificial per row
    zero = Fraction(0)

    rows, signs = [], []
    for i in range(m):
        if i < m_eq:
            coeffs, rhs = a_eq[i] + [zero] * m_ub, b_eq[i]
        else:
            k = i - m_eq
            coeffs = a_ub[k] + [Fraction(int(s == k)) for s in range(m_ub)]
            rhs = b_ub[k]
        sign = -1 if rhs < 0 else 1
        signs.append(sign)
        row = [sign * v for v in coeffs] + [Fraction(int(s == i)) for s in range(m)]
        rows.append(row + [sign * rhs])

    cost = [zero] * (width + 1)
    for row in rows:
        for k in range(n_struct):
            cost[k] -= row[k]
        cost[-1] -= row[-1]
    tab = _Tableau(rows, cost, [n_struct + i for i in range(m)])
    tab.run(width)

    if tab.cost[-1] != 0:
        # phase one optimum is positive: duals y_i = 1 - d(artificial_i)
        y = [(1 - tab.cost[n_struct + i]) * signs[i] for i in range(m)]
        z = [-v for v in y]
        cert = {"eq": z[:m_eq], "ub": z[m_eq:]}
        return LPResult("infeasible", certificate=cert, pivots=tab.pivots)

    # drive degenerate artificials out of the basis, dropping redundant rows
    keep = []
    for i in range(len(tab.rows)):
        if tab.basis[i] >= n_struct:
            j = next((k for k in range(n_struct) if tab.rows[i][k] != 0), None)
            if j is None:
                continue
            tab.pivot(i, j)
        keep.append(i)
    tab.rows = [tab.rows[i] for i in keep]
    tab.basis = [tab.basis[i] for i in keep]

    obj = [zero] * n_struct
    if c is not None:
        sgn = -1 if maximize else 1
        obj[:n] = [sgn * frac(v) for v in c]
    cost = obj + [zero] * m + [zero]
    for i, b in enumerate(tab.basis):
        cb = cost[b]
        if cb:
            for k, v in enumerate(tab.rows[i]):
                if v:
                    cost[k] -= cb * v
    tab.cost = cost
    status = tab.run(n_struct)
    if status == "unbounded":
        return LPResult("unbounded", pivots=tab.pivots)
    x = [zero] * n_struct
    for i, b in enumerate(tab.basis):
        x[b] = tab.rows[i][-1]
    x = x[:n]
    value = None
    if c is not None:
        value = sum((frac(ci) * xi for ci, xi in zip(c, x)), zero)
    return LPResult("optimal", x=x, value=value, pivots=tab.pivots)


def verify_farkas(certificate: dict, a_eq: Matrix = (), b_eq: Sequence[Number] = (),
                  a_ub: Matrix = (), b_ub: Sequence[Number] = ()) -> bool:
    """Check that multipliers prove {A_eq x = b_eq, A_ub x <= b_ub, x >= 0} empty.

    Requires ub-multipliers >= 0, a combined row with every coefficient >= 0,
    and a combined right-hand side < 0.
    """
    z_eq = [frac(v) for v in certificate.get("eq", [])]
    z_ub = [frac(v) for v in certificate.get("ub", [])]
    if len(z_eq) != len(a_eq) or len(z_ub) != len(a_ub):
        return False
    if any(v < 0 for v in z_ub):
        return False
    rows = list(a_eq) + list(a_ub)
    mult = z_eq + z_ub
    if not rows:
        return False
    n = len(rows[0])
    combined = [sum((mu * frac(row[k]) for mu, row in zip(mult, rows) if mu), Fraction(0))
                for k in range(n)]
    rhs = sum((mu * frac(b) for mu, b in zip(mult, list(b_eq) + list(b_ub))), Fraction(0))
    return all(v >= 0 for v in combined) and rhs < 0


def rref(a: Matrix, b: Sequence[Number]):
    """Reduced row echelon form of [a | b].

    Returns ``(rows, rhs, pivots)`` with zero rows removed, or raises
    ValueError when the system is inconsistent.
    """
    rows = [[frac(v) for v in row] + [frac(r)] for row, r in zip(a, b)]
    n = len(rows[0]) - 1 if rows else 0
    pivots = []
    r = 0
    for j in range(n):
        piv = next((i for i in range(r, len(rows)) if rows[i][j] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][j]
        rows[r] = [v / p for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][j] != 0:
                f = rows[i][j]
                rows[i] = [v - f * w for v, w in zip(rows[i], rows[r])]
        pivots.append(j)
        r += 1
    for row in rows[r:]:
        if row[-1] != 0:
            raise ValueError("inconsistent linear system")
    rows = rows[:r]
    return [row[:-1] for row in rows], [row[-1] for row in rows], pivots


def _inverse(a: list[list[Fraction]]) -> list[list[Fraction]] | None:
    m = len(a)
    ident = [[Fraction(int(i == j)) for j in range(m)] for i in range(m)]
    aug = [row + e for row, e in zip(a, ident)]
    for j in range(m):
        piv = next((i for i in range(j, m) if aug[i][j] != 0), None)
        if piv is None:
            return None
        aug[j], aug[piv] = aug[piv], aug[j]
        p = aug[j][j]
        aug[j] = [v / p for v in aug[j]]
        for i in range(m):
            if i != j and aug[i][j] != 0:
                f = aug[i][j]
                aug[i] = [v - f * w for v, w in zip(aug[i], aug[j])]
    return [row[m:] for row in aug]


def box_vertices(lower: Sequence[Number], upper: Sequence[Number],
                 a_eq: Matrix = (), b_eq: Sequence[Number] = ()) -> list[tuple[Fraction, ...]]:
    """All vertices of {lower <= x <= upper, a_eq x = b_eq}, exactly.

    A vertex has at least ``n - rank`` coordinates at a bound; every choice of
    ``rank`` free coordinates with a nonsingular column block is tried.
    """
    lo = [frac(v) for v in lower]
    hi = [frac(v) for v in upper]
    n = len(lo)
    if any(l > h for l, h in zip(lo, hi)):
        return []
    if a_eq:
        try:
            rows, rhs, _ = rref(a_eq, b_eq)
        except ValueError:
            return []
    else:
        rows, rhs = [], []
    m = len(rows)
    found = set()
    # clear denominators row by row so the inner loop runs on integers
    scales = [math.lcm(*(v.denominator for v in (*row, r))) for row, r in zip(rows, rhs)]
    rows = [[int(v * d) for v in row] for row, d in zip(rows, scales)]
    rhs = [int(r * d) for r, d in zip(rhs, scales)]
    integral = all(v.denominator == 1 for v in (*lo, *hi))
    for free in itertools.combinations(range(n), m):
        fixed = [k for k in range(n) if k not in free]
        inv = _inverse([[Fraction(row[k]) for k in free] for row in rows]) if m else []
        if inv is None:
            continue
        # inv = z / den with integer z
        den = math.lcm(*(w.denominator for irow in inv for w in irow)) if m else 1
        z = [[int(w * den) for w in irow] for irow in inv]
        for choice in itertools.product((0, 1), repeat=len(fixed)):
            x = [None] * n
            for k, c in zip(fixed, choice):
                x[k] = hi[k] if c else lo[k]
            if m and integral:
                target = [r - sum(row[k] * int(x[k]) for k in fixed) for row, r in zip(rows, rhs)]
                nums = [sum(w * t for w, t in zip(zrow, target)) for zrow in z]
                if any(not (lo[k] * den <= q <= hi[k] * den) for k, q in zip(free, nums)):
                    continue
                for k, q in zip(free, nums):
                    x[k] = Fraction(q, den)
            elif m:
                target = [r - sum((row[k] * x[k] for k in fixed), Fraction(0))
                          for row, r in zip(rows, rhs)]
                for k, irow in zip(free, inv):
                    x[k] = sum((w * t for w, t in zip(irow, target)), Fraction(0))
                if any(not (lo[k] <= x[k] <= hi[k]) for k in free):
                    continue
            found.add(tuple(x))
    return sorted(found)
