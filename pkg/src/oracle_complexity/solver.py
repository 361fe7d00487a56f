"""Complexity measures at a fixed depth bound.

Two interchangeable sources of deterministic trees feed every computation:

* a ``TreeCatalog``: every canonical tree of depth <= T, deduplicated by
  evaluation fingerprint, handed to the LP all at once;
* an integer depth T: columns are generated on demand by the exact
  best-response oracle in ``pricing``, which scales to product problems whose
  catalogs would be astronomically large.

Both give the same values; the tests cross-check them.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence, Union

from .errors import CatalogCapError, FormatError, InfeasibleError, PreconditionError
from .exact import Surd, frac
from .lp import make_lp
from .model import Prior, Problem
from .pricing import Weights, best_response
from .strategy import (
    Evaluation,
    Leaf,
    Query,
    RandomizedStrategy,
    Tree,
    evaluate,
    mu_error,
    mu_expectation,
)

ZERO = Fraction(0)
ONE = Fraction(1)

CAP_ENV = "ORACLE_COMPLEXITY_CAP"
DEFAULT_CAP = 200_000
FLOAT_TOL = 1e-12


def default_cap() -> int:
    raw = os.environ.get(CAP_ENV)
    if raw is None:
        return DEFAULT_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise FormatError(f"{CAP_ENV} must be an integer, got {raw!r}") from None
    if cap < 1:
        raise PreconditionError(f"{CAP_ENV} must be >= 1")
    return cap


# -- catalog ----------------------------------------------------------------------

class Fingerprint(NamedTuple):
    err: tuple     # [theta][component]
    cost: tuple    # expected calls per theta
    depth: tuple   # worst-case calls per theta


@dataclass
class TreeCatalog:
    problem: Problem
    depth_bound: int
    trees: list
    fingerprints: list
    _evals: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.trees)

    def __iter__(self):
        return iter(self.trees)

    def evaluation(self, i: int) -> Evaluation:
        ev = self._evals.get(i)
        if ev is None:
            ev = self._evals[i] = evaluate(self.problem, self.trees[i])
        return ev


def predicted_size(p: Problem, prev: int) -> int:
    return len(p.outcomes.labels) + len(p.oracle.inputs) * prev ** len(p.oracle.answers)


def enumerate_trees(p: Problem, T: int, cap: int | None = None) -> TreeCatalog:
    """All canonical trees of depth <= T, one per evaluation fingerprint.

    Queries whose children are all the same leaf are skipped: they cost a call
    and change nothing else. Refuses with ``CatalogCapError`` when the number of
    candidates at some level would exceed ``cap``.
    """
    if T < 0:
        raise PreconditionError("depth bound must be nonnegative")
    cap = default_cap() if cap is None else cap
    n_theta, n_comp = len(p.theta), p.n_components
    kernel, wrong = p.oracle.kernel, p.wrong
    seen: set = set()
    trees: list = []
    fps: list = []

    def add(tree, fp):
        if fp not in seen:
            seen.add(fp)
            trees.append(tree)
            fps.append(fp)

    for o, lab in enumerate(p.outcomes.labels):
        add(Leaf(lab), Fingerprint(tuple(tuple(Fraction(v) for v in wrong[t][o]) for t in range(n_theta)),
                                   (ZERO,) * n_theta, (0,) * n_theta))
    n_leaves = len(trees)
    for _ in range(T):
        if predicted_size(p, len(trees)) > cap:
            raise CatalogCapError(
                f"catalog would reach {predicted_size(p, len(trees))} candidates (cap {cap})")
        prev_trees, prev_fps = list(trees), list(fps)
        idx = range(len(prev_trees))
        for xi, x in enumerate(p.oracle.inputs):
            rows = [kernel[t][xi] for t in range(n_theta)]
            for combo in itertools.product(idx, repeat=len(p.oracle.answers)):
                if combo[0] < n_leaves and all(c == combo[0] for c in combo):
                    continue
                kids = [prev_fps[c] for c in combo]
                err, cost, depth = [], [], []
                for t in range(n_theta):
                    row = rows[t]
                    err.append(tuple(sum((q * k.err[t][c] for q, k in zip(row, kids) if q), ZERO)
                                     for c in range(n_comp)))
                    cost.append(1 + sum((q * k.cost[t] for q, k in zip(row, kids) if q), ZERO))
                    depth.append(1 + max(k.depth[t] for q, k in zip(row, kids) if q))
                fp = Fingerprint(tuple(err), tuple(cost), tuple(depth))
                if fp not in seen:
                    add(Query(x, tuple(prev_trees[c] for c in combo)), fp)
    return TreeCatalog(p, T, trees, fps)


def enumerate_all_trees(p: Problem, T: int):
    """Every deterministic tree of depth <= T, with no pruning or dedup (test oracle)."""
    level = [Leaf(lab) for lab in p.outcomes.labels]
    for _ in range(T):
        level = [Leaf(lab) for lab in p.outcomes.labels] + [
            Query(x, combo) for x in p.oracle.inputs
            for combo in itertools.product(level, repeat=len(p.oracle.answers))
        ]
    return level


# -- column generation ---------------------------------------------------------------

class Column(NamedTuple):
    tree: Tree
    err: tuple    # [theta][component]
    cost: tuple   # per theta


class Linear(NamedTuple):
    """sum_theta cost[theta] * E_theta + sum_{theta, c} err[theta][c] * err_{theta, c}."""

    cost: tuple
    err: tuple

    def at(self, col: Column):
        v = sum((a * b for a, b in zip(self.cost, col.cost) if a), ZERO)
        for we, ce in zip(self.err, col.err):
            for a, b in zip(we, ce):
                if a:
                    v += a * b
        return v


class Row(NamedTuple):
    form: Linear
    z_coef: Fraction   # form - z_coef * z <= rhs
    rhs: Fraction


class Source:
    """Where columns come from: an explicit catalog or the pricing oracle at depth T."""

    def __init__(self, p: Problem, source: Union[TreeCatalog, int]):
        self.problem = p
        if isinstance(source, TreeCatalog):
            if source.problem is not p and len(source.problem.theta) != len(p.theta):
                raise PreconditionError("catalog was built for a different problem")
            self.catalog = source
            self.depth = source.depth_bound
            self.columns = [Column(t, fp.err, fp.cost)
                            for t, fp in zip(source.trees, source.fingerprints)]
        else:
            T = int(source)
            if T < 0:
                raise PreconditionError("depth bound must be nonnegative")
            self.catalog = None
            self.depth = T
            self.columns = None
            self._cols: dict = {}

    def column(self, tree: Tree) -> Column:
        col = self._cols.get(tree)
        if col is None:
            ev = evaluate(self.problem, tree)
            col = self._cols[tree] = Column(tree, ev.components, ev.cost_mean)
        return col

    def initial(self) -> list[Column]:
        if self.columns is not None:
            return self.columns
        return [self.column(Leaf(lab)) for lab in self.problem.outcomes.labels]

    def price(self, objective: Sequence[Weights]) -> Column:
        return self.column(best_response(self.problem, self.depth, objective).tree)


def _zero_err(p: Problem) -> tuple:
    return tuple((ZERO,) * p.n_components for _ in p.theta)


class LPResult(NamedTuple):
    value: object
    mixture: RandomizedStrategy
    columns: list
    weights: list
    duals: list      # multipliers of the <= rows, nonnegative
    z: object


def _solve_master(src: Source, objective: Linear, rows: Sequence[Row], use_z: bool,
                  z_free: bool, lp_mode: str, columns: list | None = None) -> LPResult:
    """min objective(w) [+ z]  s.t.  sum w = 1,  row.form(w) - row.z_coef z <= row.rhs."""
    p = src.problem
    exact = lp_mode == "exact"
    lp = make_lp([1], [r.rhs for r in rows], lp_mode)
    z_cols = []
    if use_z:
        z_cols.append(lp.add_column(1, [0], [-r.z_coef for r in rows]))
        if z_free:
            z_cols.append(lp.add_column(-1, [0], [r.z_coef for r in rows]))
    cols: list[Column] = []
    have: set = set()

    def push(col: Column):
        if col.tree in have:
            return False
        have.add(col.tree)
        cols.append(col)
        lp.add_column(objective.at(col), [1], [r.form.at(col) for r in rows])
        return True

    for col in (columns if columns is not None else src.initial()):
        push(col)
    while True:
        lp.solve()
        if src.columns is not None:
            break
        y = lp.y if exact else [Fraction(v) for v in lp.y]
        # reduced cost of a tree = objective - y0 - sum_k y_k form_k
        cost_w = list(objective.cost)
        err_w = [list(e) for e in objective.err]
        for yk, r in zip(y[1:], rows):
            if not yk:
                continue
            for t, a in enumerate(r.form.cost):
                if a:
                    cost_w[t] -= yk * a
            for t, we in enumerate(r.form.err):
                for c, a in enumerate(we):
                    if a:
                        err_w[t][c] -= yk * a
        w = Weights(tuple(cost_w), tuple(tuple(e) for e in err_w))
        priced = best_response(p, src.depth, (w,))
        reduced = priced.value[0] - y[0]
        if reduced >= (0 if exact else -FLOAT_TOL * max(1, abs(float(y[0])))):
            break
        if not push(src.column(priced.tree)):
            break
    x = lp.x
    n_z = len(z_cols)
    z = None
    if use_z:
        z = x[0] - (x[1] if z_free else 0)
    wts = x[n_z:]
    atoms = [(wv, c.tree) for wv, c in zip(wts, cols) if wv > 0]
    if exact:
        mixture = RandomizedStrategy(tuple(atoms))
    else:
        total = sum(wv for wv, _ in atoms)
        mixture = RandomizedStrategy(tuple((Fraction(wv / total).limit_denominator(10 ** 12), t)
                                           for wv, t in atoms))
    return LPResult(lp.objective, mixture, cols, wts, lp.duals_ub, z)


def _error_rows(p: Problem, eps, kind: str) -> list[Row]:
    """Error constraints: one per theta and component ("randomized") or one per
    component averaged under the prior ("distributional")."""
    eps = frac(eps)
    n_theta, n_comp = len(p.theta), p.n_components
    rows = []
    if kind == "randomized":
        for t in range(n_theta):
            for c in range(n_comp):
                err = tuple(tuple(ONE if (s == t and d == c) else ZERO for d in range(n_comp))
                            for s in range(n_theta))
                rows.append(Row(Linear((ZERO,) * n_theta, err), ZERO, eps))
    elif kind == "distributional":
        if p.prior is None:
            raise PreconditionError("distributional complexity needs a prior")
        mu = p.prior.weights
        for c in range(n_comp):
            err = tuple(tuple(mu[s] if d == c else ZERO for d in range(n_comp))
                        for s in range(n_theta))
            rows.append(Row(Linear((ZERO,) * n_theta, err), ZERO, eps))
    else:
        raise PreconditionError(f"unknown complexity kind {kind!r}")
    return rows


def _feasibility(src: Source, rows: list[Row], lp_mode: str) -> LPResult:
    """Minimize the largest error-row violation; feasible iff the optimum is <= 0."""
    p = src.problem
    shifted = [Row(r.form, ONE, r.rhs) for r in rows]
    zero = Linear((ZERO,) * len(p.theta), _zero_err(p))
    return _solve_master(src, zero, shifted, use_z=True, z_free=True, lp_mode=lp_mode)


def _check_feasible(res: LPResult, lp_mode: str) -> bool:
    return res.z <= 0 if lp_mode == "exact" else res.z <= 1e-9


def _optimize(src: Source, objective: Linear, err_rows: list[Row], extra_rows: list[Row],
              use_z: bool, lp_mode: str) -> LPResult:
    feas = _feasibility(src, err_rows, lp_mode)
    if not _check_feasible(feas, lp_mode):
        raise InfeasibleError(
            f"no mixture of depth <= {src.depth} meets the error bound "
            f"(smallest excess {feas.z})")
    return _solve_master(src, objective, err_rows + extra_rows, use_z, False, lp_mode,
                         columns=feas.columns if src.columns is None else None)


def _mu_cost(p: Problem, mu) -> Linear:
    mu = mu.weights if isinstance(mu, Prior) else tuple(mu)
    return Linear(tuple(mu), _zero_err(p))


# -- distributional ----------------------------------------------------------------------

def dist_value(p: Problem, source, eps, lp: str = "exact", mu=None) -> LPResult:
    """min E_mu over mixtures of depth <= T whose averaged error (per component) is <= eps."""
    src = source if isinstance(source, Source) else Source(p, source)
    mu = p.prior if mu is None else mu
    if mu is None:
        raise PreconditionError("distributional complexity needs a prior")
    q = p if mu is p.prior else p.with_prior(mu)
    return _optimize(src, _mu_cost(p, mu), _error_rows(q, eps, "distributional"), [], False, lp)


@dataclass(frozen=True)
class FrontierCurve:
    """Lower convex hull of (error, expected calls) over depth-bounded strategies."""

    vertices: tuple          # ((error, cost), ...) errors increasing, costs decreasing
    witnesses: tuple         # a deterministic tree attaining each vertex
    depth: int

    @property
    def min_error(self) -> Fraction:
        return self.vertices[0][0]

    @property
    def zero_cost_error(self) -> Fraction:
        return self.vertices[-1][0]

    def _segment(self, eps):
        if eps < self.min_error:
            raise InfeasibleError(
                f"error {eps} is below the smallest achievable error {self.min_error} at depth <= {self.depth}")
        for i in range(len(self.vertices) - 1):
            if eps < self.vertices[i + 1][0]:
                return i
        return len(self.vertices) - 1

    def value(self, eps):
        """Frontier value; ``eps`` may be rational or an exact square root."""
        if not isinstance(eps, Surd):
            eps = frac(eps)
        i = self._segment(eps)
        e0, c0 = self.vertices[i]
        if i == len(self.vertices) - 1:
            return c0
        e1, c1 = self.vertices[i + 1]
        out = (eps - e0) * ((c1 - c0) / (e1 - e0)) + c0
        if isinstance(out, Surd) and out.is_rational:
            return out.rational()
        return out

    def witness(self, eps) -> RandomizedStrategy:
        """At most two vertex trees mixed to sit exactly on the frontier at ``eps``."""
        eps = frac(eps)
        i = self._segment(eps)
        e0 = self.vertices[i][0]
        if i == len(self.vertices) - 1 or eps == e0:
            return RandomizedStrategy.pure(self.witnesses[i])
        e1 = self.vertices[i + 1][0]
        lam = (e1 - eps) / (e1 - e0)
        return RandomizedStrategy(((lam, self.witnesses[i]), (1 - lam, self.witnesses[i + 1])))

    def __call__(self, eps):
        return self.value(eps)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def hull_from_points(points: Sequence[tuple], witnesses: Sequence, depth: int) -> FrontierCurve:
    """Nonincreasing lower convex hull of (error, cost) points by monotone chain."""
    best: dict = {}
    for pt, w in zip(points, witnesses):
        if pt not in best:
            best[pt] = w
    pts = sorted(best)
    lower: list = []
    for pt in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], pt) <= 0:
            lower.pop()
        lower.append(pt)
    # keep the strictly decreasing part, from the cheapest min-error point to the
    # least-error zero-slope point
    start = 0
    while start + 1 < len(lower) and lower[start + 1][0] == lower[start][0]:
        start += 1
    end = start
    while end + 1 < len(lower) and lower[end + 1][1] < lower[end][1]:
        end += 1
    verts = tuple(lower[start:end + 1])
    return FrontierCurve(verts, tuple(best[v] for v in verts), depth)


def _single_error(p: Problem):
    if p.semantics.per_coordinate:
        raise PreconditionError("the error-cost frontier needs a scalar error; "
                                "use dist_value for per-coordinate products")
    if p.prior is None:
        raise PreconditionError("the error-cost frontier needs a prior")


def dist_frontier(p: Problem, source) -> FrontierCurve:
    """The curve eps -> min E_mu[calls] subject to error_mu <= eps, at depth <= T."""
    _single_error(p)
    mu = p.prior.weights
    if isinstance(source, TreeCatalog):
        points = [(sum((m * e[0] for m, e in zip(mu, fp.err)), ZERO),
                   sum((m * c for m, c in zip(mu, fp.cost)), ZERO)) for fp in source.fingerprints]
        return hull_from_points(points, source.trees, source.depth_bound)
    T = int(source)
    if T < 0:
        raise PreconditionError("depth bound must be nonnegative")
    n_theta = len(p.theta)
    zero_err = tuple((ZERO,) for _ in range(n_theta))
    err_w = Weights((ZERO,) * n_theta, tuple((m,) for m in mu))
    cost_w = Weights(tuple(mu), zero_err)

    def point(tree):
        ev = evaluate(p, tree)
        return (mu_error(ev, mu), mu_expectation(ev, mu)), tree

    a, ta = point(best_response(p, T, (err_w, cost_w)).tree)
    b, tb = point(best_response(p, T, (cost_w, err_w)).tree)
    verts = [(a, ta)]

    def refine(left, right):
        (ea, ca), (eb, cb) = left[0], right[0]
        slope = (ca - cb) / (eb - ea)
        w = Weights(tuple(mu), tuple((slope * m,) for m in mu))
        c, tc = point(best_response(p, T, (w, cost_w)).tree)
        if c[1] + slope * c[0] < ca + slope * ea:
            refine(left, (c, tc))
            verts.append((c, tc))
            refine((c, tc), right)

    if b != a:
        refine((a, ta), (b, tb))
        verts.append((b, tb))
    return FrontierCurve(tuple(v for v, _ in verts), tuple(t for _, t in verts), T)


# -- worst-case depth -----------------------------------------------------------------------

def feasible_at_depth(p: Problem, eps, T: int, kind: str = "randomized", lp: str = "exact",
                      cap: int | None = None, use_catalog: bool = False) -> LPResult | None:
    """A witnessing feasibility solution if some depth-<=T mixture meets the bound, else None."""
    source = enumerate_trees(p, T, cap) if use_catalog else T
    src = Source(p, source)
    res = _feasibility(src, _error_rows(p, eps, kind), lp)
    return res if _check_feasible(res, lp) else None


def worst_case_depth(p: Problem, eps, kind: str = "randomized", max_T: int = 8,
                     lp: str = "exact") -> int:
    """Smallest T such that some mixture of depth <= T meets the error requirement.

    ``kind`` is "randomized" (every theta, every component) or "distributional"
    (averaged under the prior).
    """
    for T in range(max_T + 1):
        if feasible_at_depth(p, eps, T, kind, lp) is not None:
            return T
    raise InfeasibleError(f"no strategy of depth <= {max_T} has error <= {eps}")


def worst_case_witness(p: Problem, eps, kind: str = "randomized", max_T: int = 8,
                       lp: str = "exact") -> tuple[int, RandomizedStrategy]:
    for T in range(max_T + 1):
        res = feasible_at_depth(p, eps, T, kind, lp)
        if res is not None:
            return T, res.mixture
    raise InfeasibleError(f"no strategy of depth <= {max_T} has error <= {eps}")


# -- randomized value and minimax ------------------------------------------------------------------

@dataclass(frozen=True)
class GameValue:
    primal_value: object
    dual_value: object
    primal_mixture: object      # RandomizedStrategy, or row weights for a matrix game
    dual_prior: object          # Prior, or column weights for a matrix game
    gap: object
    epsilon: Fraction | None = None
    depth: int | None = None
    exact: bool = True

    @property
    def certified(self) -> bool:
        return self.gap == 0 if self.exact else abs(self.gap) <= 1e-9


def randomized_value(p: Problem, source, eps, lp: str = "exact") -> GameValue:
    """R-bar at depth <= T: min over mixtures of max_theta expected calls, every
    per-theta (and per-component) error <= eps.

    The cost-row multipliers form a least favorable prior; the best response to
    that prior alone, under the same error constraints, is solved separately and
    reported as the dual value.
    """
    src = source if isinstance(source, Source) else Source(p, source)
    n_theta = len(p.theta)
    zero_err = _zero_err(p)
    err_rows = _error_rows(p, eps, "randomized")
    cost_rows = [Row(Linear(tuple(ONE if s == t else ZERO for s in range(n_theta)), zero_err), ONE, ZERO)
                 for t in range(n_theta)]
    objective = Linear((ZERO,) * n_theta, zero_err)
    res = _optimize(src, objective, err_rows, cost_rows, True, lp)
    lam = res.duals[len(err_rows):]
    if lp == "exact":
        total = sum(lam, ZERO)
        prior = tuple(v / total for v in lam) if total else Prior.uniform(n_theta).weights
    else:
        lam = [max(v, 0.0) for v in lam]
        total = sum(lam)
        prior = tuple(Fraction(v / total).limit_denominator(10 ** 12) for v in lam) if total \
            else Prior.uniform(n_theta).weights
        drift = 1 - sum(prior)
        if drift:
            i = max(range(n_theta), key=lambda t: prior[t])
            prior = prior[:i] + (prior[i] + drift,) + prior[i + 1:]
    inner = _optimize(src, _mu_cost(p, prior), err_rows, [], False, lp)
    primal = res.value
    dual = inner.value
    return GameValue(primal, dual, res.mixture, Prior(prior), primal - dual, frac(eps), src.depth,
                     lp == "exact")


def matrix_game(payoffs: Sequence[Sequence], lp: str = "exact") -> GameValue:
    """Finite zero-sum game: rows minimize, columns maximize the payoff."""
    A = [[frac(v) if lp == "exact" else float(frac(v)) for v in row] for row in payoffs]
    if not A or not A[0] or any(len(r) != len(A[0]) for r in A):
        raise PreconditionError("payoff matrix must be nonempty and rectangular")
    n_r, n_c = len(A), len(A[0])
    shift = 1 - min(min(r) for r in A)  # shifted value >= 1, so the multipliers sum to 1
    prog = make_lp([1], [0] * n_c, lp)
    prog.add_column(1, [0], [-1] * n_c)
    for r in range(n_r):
        prog.add_column(0, [1], [A[r][c] + shift for c in range(n_c)])
    prog.solve()
    rows = tuple(prog.x[1:])
    cols = tuple(prog.duals_ub)
    if lp == "exact":
        total = sum(cols, ZERO)
        cols = tuple(v / total for v in cols)
        primal = max(sum((rows[r] * A[r][c] for r in range(n_r)), ZERO) for c in range(n_c))
        dual = min(sum((cols[c] * A[r][c] for c in range(n_c)), ZERO) for r in range(n_r))
    else:
        total = sum(cols)
        cols = tuple(v / total for v in cols)
        primal = max(sum(rows[r] * A[r][c] for r in range(n_r)) for c in range(n_c))
        dual = min(sum(cols[c] * A[r][c] for c in range(n_c)) for r in range(n_r))
    return GameValue(primal, dual, rows, cols, primal - dual, exact=lp == "exact")
