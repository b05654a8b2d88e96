"""Exact rational linear programming.

A dense two-phase tableau simplex over ``Fraction`` with Bland's rule.  Every
outcome carries a certificate that ``verify`` checks without reference to the
solve path:

* optimal: a primal point and row multipliers whose dual value equals the
  primal value;
* infeasible: a Farkas vector;
* unbounded: a feasible point and an improving ray.

Row multipliers ``y`` use the convention of the program's own sense.  For a
minimisation ``>=`` rows carry ``y >= 0`` and ``<=`` rows ``y <= 0``; for a
maximisation the signs flip.  The dual value is
``b.y + min_box (c - A^T y).x`` (``max_box`` when maximising).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import MalformedProgram
from .model import to_fraction

SENSES = ("<=", ">=", "==")
_ZERO = Fraction(0)


@dataclass
class LinearProgram:
    """Variables with optional bounds, linear rows, and a linear objective.

    Attributes:
        objective: cost per variable.
        lower, upper: bounds per variable, ``None`` for unbounded.
        rows: ``(coefficients, sense, rhs)`` with sparse ``{var: coef}`` maps.
        maximize: optimisation sense.
    """

    objective: list = field(default_factory=list)
    lower: list = field(default_factory=list)
    upper: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    maximize: bool = False
    names: list = field(default_factory=list)

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    def add_variable(self, cost=0, lower=0, upper=None, name=None) -> int:
        self.objective.append(to_fraction(cost))
        self.lower.append(None if lower is None else to_fraction(lower))
        self.upper.append(None if upper is None else to_fraction(upper))
        self.names.append(name)
        return len(self.objective) - 1

    def add_row(self, coeffs: Mapping, sense: str, rhs) -> int:
        self.rows.append(({int(j): to_fraction(v) for j, v in coeffs.items() if v != 0}, sense, to_fraction(rhs)))
        return len(self.rows) - 1

    def check(self) -> None:
        n = self.num_vars
        if not (len(self.lower) == len(self.upper) == n):
            raise MalformedProgram("bound vectors do not match the number of variables")
        for j in range(n):
            lo, hi = self.lower[j], self.upper[j]
            if lo is not None and hi is not None and lo > hi:
                raise MalformedProgram(f"variable {j} has lower bound above upper bound")
        for coeffs, sense, _ in self.rows:
            if sense not in SENSES:
                raise MalformedProgram(f"unknown row sense {sense!r}")
            for j in coeffs:
                if not 0 <= j < n:
                    raise MalformedProgram(f"row refers to unknown variable {j}")

    def value(self, x) -> Fraction:
        return sum((c * v for c, v in zip(self.objective, x)), _ZERO)

    def row_value(self, i: int, x) -> Fraction:
        coeffs = self.rows[i][0]
        return sum((c * x[j] for j, c in coeffs.items()), _ZERO)


@dataclass
class LpOutcome:
    status: str  # optimal | infeasible | unbounded
    value: Fraction | None = None
    x: list | None = None
    dual: list | None = None
    farkas: list | None = None
    ray: list | None = None
    pivots: int = 0


# ---------------------------------------------------------------------------
# certificate checks

def _feasible(lp: LinearProgram, x) -> bool:
    for j, v in enumerate(x):
        if lp.lower[j] is not None and v < lp.lower[j]:
            return False
        if lp.upper[j] is not None and v > lp.upper[j]:
            return False
    for i, (_, sense, rhs) in enumerate(lp.rows):
        a = lp.row_value(i, x)
        if sense == "<=" and a > rhs or sense == ">=" and a < rhs or sense == "==" and a != rhs:
            return False
    return True


def _signs_ok(lp: LinearProgram, y) -> bool:
    """Row multipliers in the minimisation convention."""
    for (_, sense, _), v in zip(lp.rows, y):
        if sense == ">=" and v < 0 or sense == "<=" and v > 0:
            return False
    return True


def _transpose_product(lp: LinearProgram, y) -> list:
    g = [_ZERO] * lp.num_vars
    for (coeffs, _, _), v in zip(lp.rows, y):
        if v:
            for j, a in coeffs.items():
                g[j] += a * v
    return g


def verify(lp: LinearProgram, out: LpOutcome) -> bool:
    """Check an outcome's certificate exactly."""
    s = -1 if lp.maximize else 1
    c_min = [s * c for c in lp.objective]
    if out.status == "optimal":
        if out.x is None or out.dual is None or not _feasible(lp, out.x):
            return False
        if lp.value(out.x) != out.value:
            return False
        y = [s * v for v in out.dual]
        if len(y) != len(lp.rows) or not _signs_ok(lp, y):
            return False
        at = _transpose_product(lp, y)
        dual_value = sum((r[2] * v for r, v in zip(lp.rows, y)), _ZERO)
        for j in range(lp.num_vars):
            d = c_min[j] - at[j]
            if d > 0:
                if lp.lower[j] is None:
                    return False
                dual_value += d * lp.lower[j]
            elif d < 0:
                if lp.upper[j] is None:
                    return False
                dual_value += d * lp.upper[j]
        return dual_value == s * out.value
    if out.status == "infeasible":
        y = out.farkas
        if y is None or len(y) != len(lp.rows) or not _signs_ok(lp, y):
            return False
        g = _transpose_product(lp, y)
        top = _ZERO
        for j in range(lp.num_vars):
            if g[j] > 0:
                if lp.upper[j] is None:
                    return False
                top += g[j] * lp.upper[j]
            elif g[j] < 0:
                if lp.lower[j] is None:
                    return False
                top += g[j] * lp.lower[j]
        return sum((r[2] * v for r, v in zip(lp.rows, y)), _ZERO) > top
    if out.status == "unbounded":
        if out.x is None or out.ray is None or not _feasible(lp, out.x):
            return False
        d = out.ray
        for j, v in enumerate(d):
            if lp.lower[j] is not None and v < 0 or lp.upper[j] is not None and v > 0:
                return False
        for i, (_, sense, _) in enumerate(lp.rows):
            a = lp.row_value(i, d)
            if sense == "<=" and a > 0 or sense == ">=" and a < 0 or sense == "==" and a != 0:
                return False
        return sum((c * v for c, v in zip(c_min, d)), _ZERO) < 0
    return False


# ---------------------------------------------------------------------------
# tableau

class _Tableau:
    def __init__(self, rows, rhs, ncols):
        self.A = rows
        self.b = rhs
        self.ncols = ncols
        self.basis = []
        self.d = None
        self.z = _ZERO
        self.pivots = 0

    def price(self, cost):
        """Reduced costs and objective value for the current basis."""
        d = list(cost)
        z = _ZERO
        for i, bi in enumerate(self.basis):
            cb = cost[bi]
            if cb:
                row = self.A[i]
                for j, a in enumerate(row):
                    if a:
                        d[j] -= cb * a
                z += cb * self.b[i]
        self.d = d
        self.z = z

    def pivot(self, r, e):
        A, b = self.A, self.b
        row = A[r]
        p = row[e]
        if p != 1:
            inv = 1 / p
            for j, a in enumerate(row):
                if a:
                    row[j] = a * inv
            b[r] = b[r] * inv
        nz = [j for j, a in enumerate(row) if a]
        br = b[r]
        for i, other in enumerate(A):
            if i != r:
                f = other[e]
                if f:
                    for j in nz:
                        other[j] -= f * row[j]
                    b[i] -= f * br
        f = self.d[e]
        if f:
            d = self.d
            for j in nz:
                d[j] -= f * row[j]
            self.z += f * br
        self.basis[r] = e
        self.pivots += 1

    def run(self, allowed, rule="bland"):
        """Minimise from the current feasible basis.  Returns "optimal" or a column index (unbounded)."""
        degenerate = 0
        while True:
            e = None
            if rule == "dantzig" and degenerate < 50:
                best = _ZERO
                for j in allowed:
                    if self.d[j] < best:
                        best, e = self.d[j], j
            else:
                for j in allowed:
                    if self.d[j] < 0:
                        e = j
                        break
            if e is None:
                return "optimal"
            r = None
            best = None
            for i, row in enumerate(self.A):
                a = row[e]
                if a > 0:
                    ratio = self.b[i] / a
                    if best is None or ratio < best or ratio == best and self.basis[i] < self.basis[r]:
                        best, r = ratio, i
            if r is None:
                return e
            degenerate = degenerate + 1 if best == 0 else 0
            self.pivot(r, e)


def solve(lp: LinearProgram, rule: str = "bland") -> LpOutcome:
    """Solve exactly; the outcome always passes ``verify``."""
    lp.check()
    if rule not in ("bland", "dantzig"):
        raise MalformedProgram(f"unknown pivoting rule {rule!r}")
    n = lp.num_vars
    # column map: x_j = shift_j + sum(sign * x'_c)
    shift = [_ZERO] * n
    cols = []  # per original variable: list of (std column, sign)
    ncols = 0
    bounded = []  # (std column, width) for doubly bounded variables
    for j in range(n):
        lo, hi = lp.lower[j], lp.upper[j]
        if lo is not None:
            shift[j] = lo
            cols.append([(ncols, 1)])
            if hi is not None:
                bounded.append((ncols, hi - lo))
            ncols += 1
        elif hi is not None:
            shift[j] = hi
            cols.append([(ncols, -1)])
            ncols += 1
        else:
            cols.append([(ncols, 1), (ncols + 1, -1)])
            ncols += 2
    slack_of = {}
    for i, (_, sense, _) in enumerate(lp.rows):
        if sense != "==":
            slack_of[i] = ncols
            ncols += 1
    bound_slack = []
    for _ in bounded:
        bound_slack.append(ncols)
        ncols += 1
    m = len(lp.rows) + len(bounded)
    total = ncols + m  # artificial columns follow
    A, b, sigma = [], [], []
    for i, (coeffs, sense, rhs) in enumerate(lp.rows):
        row = [_ZERO] * total
        r = rhs
        for j, a in coeffs.items():
            r -= a * shift[j]
            for c, sg in cols[j]:
                row[c] += a * sg
        if sense == "<=":
            row[slack_of[i]] = Fraction(1)
        elif sense == ">=":
            row[slack_of[i]] = Fraction(-1)
        sg = 1
        if r < 0:
            sg = -1
            row = [-a for a in row]
            r = -r
        row[ncols + i] = Fraction(1)
        A.append(row)
        b.append(r)
        sigma.append(sg)
    for k, (c, width) in enumerate(bounded):
        row = [_ZERO] * total
        row[c] = Fraction(1)
        row[bound_slack[k]] = Fraction(1)
        row[ncols + len(lp.rows) + k] = Fraction(1)
        A.append(row)
        b.append(width)
    std_cost = [_ZERO] * total
    s = -1 if lp.maximize else 1
    for j in range(n):
        for c, sg in cols[j]:
            std_cost[c] = s * sg * lp.objective[j]

    t = _Tableau(A, b, total)
    t.basis = [ncols + i for i in range(m)]
    real = list(range(ncols))
    phase1 = [_ZERO] * ncols + [Fraction(1)] * m
    t.price(phase1)
    t.run(real, rule)
    if t.z > 0:
        y_std = [1 - t.d[ncols + i] for i in range(m)]
        farkas = [sigma[i] * y_std[i] for i in range(len(lp.rows))]
        return LpOutcome("infeasible", farkas=farkas, pivots=t.pivots)
    # drive zero-level artificials out of the basis where possible
    for r in range(m):
        if t.basis[r] >= ncols:
            row = t.A[r]
            for j in range(ncols):
                if row[j]:
                    t.pivot(r, j)
                    break
    t.price(std_cost)
    res = t.run(real, rule)
    xs = [_ZERO] * total
    for i, bi in enumerate(t.basis):
        xs[bi] = t.b[i]

    def to_orig(vec, with_shift):
        out = []
        for j in range(n):
            v = shift[j] if with_shift else _ZERO
            for c, sg in cols[j]:
                v += sg * vec[c]
            out.append(v)
        return out

    x = to_orig(xs, True)
    if res != "optimal":
        e = res
        dvec = [_ZERO] * total
        dvec[e] = Fraction(1)
        for i, bi in enumerate(t.basis):
            dvec[bi] -= t.A[i][e]
        return LpOutcome("unbounded", x=x, ray=to_orig(dvec, False), pivots=t.pivots)
    y_std = [-t.d[ncols + i] for i in range(m)]
    y_min = [sigma[i] * y_std[i] for i in range(len(lp.rows))]
    dual = [s * v for v in y_min]
    return LpOutcome("optimal", value=lp.value(x), x=x, dual=dual, pivots=t.pivots)
