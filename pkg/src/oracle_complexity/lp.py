"""Linear programs with appendable columns.

``ExactLP`` is a dense two-phase tableau simplex over exact rationals. The tableau
keeps the columns that started as the identity, so B^-1 (and with it the dual
vector) is always at hand and new columns can be priced and appended without
re-solving from scratch. ``FloatLP`` has the same surface and delegates each
solve to HiGHS.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .errors import InfeasibleError
from .exact import fast_rational as Q, to_fraction

ZERO = Q(0)

_STRUCT, _SLACK, _SURPLUS, _ART = range(4)


class UnboundedError(ArithmeticError):
    pass


class ExactLP:
    """minimize c.x  subject to  A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0."""

    exact = True

    def __init__(self, b_eq: Sequence, b_ub: Sequence):
        b = [Q(v) for v in b_eq] + [Q(v) for v in b_ub]
        self.n_eq = len(b_eq)
        self.m = m = len(b)
        self.sign = [(-1 if v < 0 else 1) for v in b]
        self.rhs = [abs(v) for v in b]
        self.rows: list[list] = [[] for _ in range(m)]
        self.kind: list[int] = []
        self.cost: list = []
        self.struct: list[int] = []          # tableau column of each structural variable
        self.ident = [0] * m                 # tableau column holding +e_i initially
        self.basis = [0] * m
        self.redundant: set[int] = set()
        for i in range(m):
            is_eq = i < self.n_eq
            if not is_eq:
                col = self._new_column(_SLACK if self.sign[i] > 0 else _SURPLUS, ZERO)
                self._set_unit(col, i, Q(self.sign[i]))
                if self.sign[i] > 0:
                    self.ident[i] = self.basis[i] = col
                    continue
            col = self._new_column(_ART, ZERO)
            self._set_unit(col, i, Q(1))
            self.ident[i] = self.basis[i] = col
        self.d: list = []
        self.phase = 1 if any(self.kind[c] == _ART for c in self.basis) else 2
        self.solved = False
        self.pivots = 0

    # -- construction -------------------------------------------------------
    def _new_column(self, kind: int, cost) -> int:
        for row in self.rows:
            row.append(ZERO)
        self.kind.append(kind)
        self.cost.append(cost)
        return len(self.kind) - 1

    def _set_unit(self, col: int, i: int, v) -> None:
        self.rows[i][col] = v

    @property
    def n_vars(self) -> int:
        return len(self.struct)

    def add_column(self, cost, col_eq: Sequence, col_ub: Sequence) -> int:
        """Append a structural variable; returns its variable index."""
        a = [Q(v) for v in col_eq] + [Q(v) for v in col_ub]
        if len(a) != self.m:
            raise ValueError("column length does not match the number of rows")
        a = [s * v for s, v in zip(self.sign, a)]
        col = self._new_column(_STRUCT, Q(cost))
        nz = [(i, v) for i, v in enumerate(a) if v]
        for r in range(self.m):
            row = self.rows[r]
            val = ZERO
            for i, v in nz:
                binv = row[self.ident[i]]
                if binv:
                    val += binv * v
            row[col] = val
        for r in self.redundant:
            if self.rows[r][col]:
                raise ArithmeticError("new column breaks a redundant equality row")
        self.struct.append(col)
        if self.d:
            # reduced cost against the current basis
            costs = self._phase_costs()
            self.d.append(costs[col] - sum((costs[self.basis[r]] * self.rows[r][col]
                                            for r in range(self.m)), ZERO))
        self.solved = False
        return len(self.struct) - 1

    # -- simplex --------------------------------------------------------------
    def _phase_costs(self) -> list:
        if self.phase == 1:
            return [Q(1) if k == _ART else ZERO for k in self.kind]
        return self.cost

    def _reset_reduced_costs(self) -> None:
        costs = self._phase_costs()
        cb = [costs[b] for b in self.basis]
        d = list(costs)
        for r in range(self.m):
            if cb[r]:
                row = self.rows[r]
                for j, v in enumerate(row):
                    if v:
                        d[j] -= cb[r] * v
        self.d = d

    def _allowed(self, j: int) -> bool:
        return not (self.phase == 2 and self.kind[j] == _ART)

    def _pivot(self, pr: int, pc: int) -> None:
        prow = self.rows[pr]
        piv = prow[pc]
        if piv != 1:
            inv = 1 / piv
            prow[:] = [v * inv if v else v for v in prow]
            self.rhs[pr] *= inv
        nz = [j for j, v in enumerate(prow) if v]
        prhs = self.rhs[pr]
        for r in range(self.m):
            if r == pr:
                continue
            row = self.rows[r]
            f = row[pc]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
                if prhs:
                    self.rhs[r] -= f * prhs
        f = self.d[pc]
        if f:
            for j in nz:
                self.d[j] -= f * prow[j]
        self.basis[pr] = pc
        self.pivots += 1

    def _iterate(self) -> None:
        degenerate = 0
        while True:
            bland = degenerate > 50
            enter, best = -1, ZERO
            for j, dj in enumerate(self.d):
                if dj < 0 and self._allowed(j) and (dj < best or (bland and enter < 0)):
                    enter, best = j, dj
                    if bland:
                        break
            if enter < 0:
                return
            leave, ratio = -1, None
            for r in range(self.m):
                a = self.rows[r][enter]
                if a > 0:
                    q = self.rhs[r] / a
                    if (ratio is None or q < ratio
                            or (q == ratio and self.basis[r] < self.basis[leave])):
                        leave, ratio = r, q
            if leave < 0:
                raise UnboundedError("linear program is unbounded")
            degenerate = degenerate + 1 if ratio == 0 else 0
            self._pivot(leave, enter)

    def solve(self) -> "ExactLP":
        if not self.d:
            self._reset_reduced_costs()
        if self.phase == 1:
            self._iterate()
            if any(self.kind[b] == _ART and self.rhs[r] > 0 for r, b in enumerate(self.basis)):
                raise InfeasibleError("linear program is infeasible")
            for r, b in enumerate(self.basis):
                if self.kind[b] != _ART:
                    continue
                row = self.rows[r]
                j = next((j for j, v in enumerate(row) if v and self.kind[j] != _ART), None)
                if j is None:
                    self.redundant.add(r)
                else:
                    self._pivot(r, j)
            self.phase = 2
            self._reset_reduced_costs()
        self._iterate()
        self.solved = True
        return self

    # -- results --------------------------------------------------------------
    @property
    def x(self) -> list[Fraction]:
        pos = {b: r for r, b in enumerate(self.basis)}
        return [to_fraction(self.rhs[pos[c]]) if c in pos else Fraction(0) for c in self.struct]

    @property
    def objective(self) -> Fraction:
        return to_fraction(sum((self.cost[b] * self.rhs[r] for r, b in enumerate(self.basis)), ZERO))

    @property
    def y(self) -> list[Fraction]:
        """Dual vector of the original rows (eq rows first, then ub rows)."""
        out = []
        for i in range(self.m):
            col = self.ident[i]
            yi = self.cost[col] - self.d[col] if self.kind[col] != _ART else -self.d[col]
            out.append(to_fraction(self.sign[i] * yi))
        return out

    @property
    def duals_eq(self) -> list[Fraction]:
        return self.y[: self.n_eq]

    @property
    def duals_ub(self) -> list[Fraction]:
        """Nonnegative multipliers of the <= rows."""
        return [-v for v in self.y[self.n_eq:]]

    def reduced_cost(self, cost, col_eq: Sequence, col_ub: Sequence):
        y = self.y
        a = list(col_eq) + list(col_ub)
        return Fraction(cost) - sum((yi * Fraction(ai) for yi, ai in zip(y, a) if ai), Fraction(0))


class FloatLP:
    """Same interface as ExactLP, solved in floating point by HiGHS."""

    exact = False

    def __init__(self, b_eq: Sequence, b_ub: Sequence):
        self.b_eq = [float(v) for v in b_eq]
        self.b_ub = [float(v) for v in b_ub]
        self.n_eq = len(self.b_eq)
        self.m = self.n_eq + len(self.b_ub)
        self.cols: list[tuple[float, list[float], list[float]]] = []
        self._res = None

    @property
    def n_vars(self) -> int:
        return len(self.cols)

    def add_column(self, cost, col_eq, col_ub) -> int:
        self.cols.append((float(cost), [float(v) for v in col_eq], [float(v) for v in col_ub]))
        self._res = None
        return len(self.cols) - 1

    def solve(self) -> "FloatLP":
        import numpy as np
        from scipy.optimize import linprog

        c = np.array([col[0] for col in self.cols])
        kw = {}
        if self.n_eq:
            kw["A_eq"] = np.array([col[1] for col in self.cols]).T
            kw["b_eq"] = np.array(self.b_eq)
        if self.b_ub:
            kw["A_ub"] = np.array([col[2] for col in self.cols]).T
            kw["b_ub"] = np.array(self.b_ub)
        res = linprog(c, bounds=(0, None), method="highs", **kw)
        if res.status == 2:
            raise InfeasibleError("linear program is infeasible")
        if res.status == 3:
            raise UnboundedError("linear program is unbounded")
        if res.status != 0:
            raise ArithmeticError(f"HiGHS failed: {res.message}")
        self._res = res
        return self

    @property
    def x(self) -> list[float]:
        return [float(v) for v in self._res.x]

    @property
    def objective(self) -> float:
        return float(self._res.fun)

    @property
    def duals_eq(self) -> list[float]:
        if not self.n_eq:
            return []
        return [float(v) for v in self._res.eqlin.marginals]

    @property
    def duals_ub(self) -> list[float]:
        if not self.b_ub:
            return []
        return [-float(v) for v in self._res.ineqlin.marginals]

    @property
    def y(self) -> list[float]:
        return self.duals_eq + [-v for v in self.duals_ub]

    def reduced_cost(self, cost, col_eq, col_ub) -> float:
        a = [float(v) for v in col_eq] + [float(v) for v in col_ub]
        return float(cost) - sum(yi * ai for yi, ai in zip(self.y, a))


def make_lp(b_eq, b_ub, mode: str = "exact"):
    if mode == "exact":
        return ExactLP(b_eq, b_ub)
    if mode == "float":
        return FloatLP(b_eq, b_ub)
    raise ValueError(f"unknown LP mode {mode!r}")


def solve_dense(c, A_eq=(), b_eq=(), A_ub=(), b_ub=(), mode: str = "exact"):
    """One-shot helper for small dense programs given row-major constraint matrices."""
    n = len(c)
    lp = make_lp(b_eq, b_ub, mode)
    for j in range(n):
        lp.add_column(c[j], [row[j] for row in A_eq], [row[j] for row in A_ub])
    return lp.solve()
