"""Finite, exact checks of the additivity, continuity, minimax, direct-sum,
truncation and derandomization statements.

Every check returns a ``CheckReport``: a list of claims ``lhs <relation> rhs``
with exact values, plus witnesses. A claim whose hypothesis does not hold is
recorded as skipped, which is distinct from failing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .constructions import (
    chebyshev_budget,
    continuity_weight,
    embed_coordinate,
    filter_posterior,
    k_for_alpha,
    mix,
    repeat_n,
    truncate,
)
from .errors import InfeasibleError, PreconditionError
from .exact import Surd, fmt, frac, sqrt
from .model import Prior, Problem, make_query_problem, product_problem
from .solver import (
    dist_frontier,
    dist_value,
    randomized_value,
    worst_case_depth,
    worst_case_witness,
)
from .strategy import (
    as_strategy,
    derandomize,
    evaluate,
    moments,
    mu_aggregates,
    mu_error,
    mu_expectation,
    strategy_depth,
    tail_mass,
)

ZERO = Fraction(0)
INF = math.inf
PASS, FAIL, SKIP = "pass", "fail", "skip"

_RELATIONS = {
    "<=": lambda a, b: a <= b,
    "==": lambda a, b: a == b,
    ">=": lambda a, b: a >= b,
    "<": lambda a, b: a < b,
}


@dataclass
class Claim:
    label: str
    lhs: object
    relation: str
    rhs: object
    holds: bool | None   # None: hypothesis not met, claim skipped
    note: str = ""

    def to_dict(self) -> dict:
        return {"label": self.label, "lhs": _show(self.lhs), "relation": self.relation,
                "rhs": _show(self.rhs), "status": _claim_status(self.holds), "note": self.note}


def _claim_status(holds) -> str:
    return SKIP if holds is None else (PASS if holds else FAIL)


def _show(v):
    if v is None or isinstance(v, bool):
        return v
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    if isinstance(v, (tuple, list)):
        return [_show(x) for x in v]
    if isinstance(v, (int, Fraction, Surd)):
        return fmt(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass
class CheckReport:
    theorem: str
    instance: str
    claims: list = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)
    measurements: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        states = [c.holds for c in self.claims]
        if any(s is False for s in states):
            return FAIL
        if any(s is True for s in states):
            return PASS
        return SKIP

    @property
    def passed(self) -> bool:
        return self.status == PASS

    @property
    def failures(self) -> list:
        return [c for c in self.claims if c.holds is False]

    def claim(self, label: str, lhs, relation: str, rhs, note: str = "") -> Claim:
        if lhs is None or rhs is None:
            c = Claim(label, lhs, relation, rhs, None, note or "value unavailable")
        else:
            c = Claim(label, lhs, relation, rhs, bool(_RELATIONS[relation](lhs, rhs)), note)
        self.claims.append(c)
        return c

    def skip(self, label: str, reason: str) -> Claim:
        c = Claim(label, None, "", None, None, reason)
        self.claims.append(c)
        return c

    def get(self, label: str) -> Claim:
        for c in self.claims:
            if c.label == label:
                return c
        raise KeyError(label)

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "instance": self.instance,
            "status": self.status,
            "claims": [c.to_dict() for c in self.claims],
            "measurements": {k: _show(v) for k, v in sorted(self.measurements.items())},
            "witnesses": {k: _show(v) for k, v in sorted(self.witnesses.items())},
        }

    def table(self) -> str:
        lines = [f"{self.theorem} [{self.instance}]: {self.status}"]
        for c in self.claims:
            body = (f"{_show(c.lhs)} {c.relation} {_show(c.rhs)}" if c.relation
                    else c.note)
            lines.append(f"  {_claim_status(c.holds):4}  {c.label}: {body}")
        for k, v in sorted(self.measurements.items()):
            lines.append(f"  info  {k} = {_show(v)}")
        return "\n".join(lines)


def _describe(p: Problem, **params) -> str:
    extra = ", ".join(f"{k}={_show(v)}" for k, v in params.items())
    return f"{p!r}; {extra}" if extra else repr(p)


def _try(fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except InfeasibleError:
        return None


def _dist(p, T, eps):
    r = _try(dist_value, p, T, eps)
    return None if r is None else r.value


def _rand(p, T, eps):
    r = _try(randomized_value, p, T, eps)
    return None if r is None else r.primal_value


def _scale(k, v):
    return None if v is None else k * v


# -- additivity ------------------------------------------------------------------------

def check_additivity(p: Problem, eps, n: int, T: int, randomized: bool = True) -> CheckReport:
    """n copies with per-coordinate error eps cost exactly n times one copy.

    The product is solved at depth n*T, the single instance at depths T and n*T;
    the theorem sandwiches the product value between the two.
    """
    eps = frac(eps)
    rep = CheckReport("additivity", _describe(p, epsilon=eps, n=n, T=T))
    if n < 1:
        raise PreconditionError("n must be >= 1")
    pc = product_problem(p, n, "per-coordinate")

    if p.prior is None:
        rep.skip("distributional", "problem has no prior")
    else:
        prod = _try(dist_value, pc, n * T, eps)
        one_T = _try(dist_value, p, T, eps)
        one_nT = _dist(p, n * T, eps)
        lhs = None if prod is None else prod.value
        single = None if one_T is None else one_T.value
        rep.measurements["D_product"] = lhs
        rep.measurements["D_single_T"] = single
        rep.measurements["D_single_nT"] = one_nT
        rep.claim("D lower: n*D_nT(P) <= D([P,eps]^n)", _scale(n, one_nT), "<=", lhs)
        rep.claim("D upper: D([P,eps]^n) <= n*D_T(P)", lhs, "<=", _scale(n, single))
        if single is not None and single == one_nT:
            rep.claim("D additivity: D([P,eps]^n) = n*D(P)", lhs, "==", _scale(n, single))
        else:
            rep.skip("D additivity: D([P,eps]^n) = n*D(P)",
                     "single-instance value differs between depth T and n*T")
        if one_T is not None:
            rs = repeat_n(one_T.mixture, n)
            ev = evaluate(pc, rs)
            err = mu_error(ev, pc.prior)
            rep.claim("D repeat: per-coordinate error", max(err), "<=", eps)
            rep.claim("D repeat: expected calls", mu_expectation(ev, pc.prior), "==", n * single)
        if prod is not None:
            emb = embed_coordinate(p, prod.mixture, n, "average", p.prior)
            ev = evaluate(p, emb)
            rep.claim("D embed: error", mu_error(ev, p.prior), "<=", eps)
            rep.claim("D embed: n * expected calls", n * mu_expectation(ev, p.prior), "==", lhs)
            rep.claim("D embed: depth", strategy_depth(emb), "<=", n * T)

    if randomized:
        prod = _try(randomized_value, pc, n * T, eps)
        one_T = _try(randomized_value, p, T, eps)
        one_nT = _try(randomized_value, p, n * T, eps)
        lhs = None if prod is None else prod.primal_value
        single = None if one_T is None else one_T.primal_value
        single_nT = None if one_nT is None else one_nT.primal_value
        rep.measurements["R_product"] = lhs
        rep.measurements["R_single_T"] = single
        rep.measurements["R_single_nT"] = single_nT
        rep.claim("R lower: n*R_nT(P) <= R([P,eps]^n)", _scale(n, single_nT), "<=", lhs)
        rep.claim("R upper: R([P,eps]^n) <= n*R_T(P)", lhs, "<=", _scale(n, single))
        if single is not None and single == single_nT:
            rep.claim("R additivity: R([P,eps]^n) = n*R(P)", lhs, "==", _scale(n, single))
        else:
            rep.skip("R additivity: R([P,eps]^n) = n*R(P)",
                     "single-instance value differs between depth T and n*T")
        if one_T is not None:
            ev = evaluate(pc, repeat_n(one_T.primal_mixture, n))
            rep.claim("R repeat: worst per-theta error", ev.max_error, "<=", eps)
            rep.claim("R repeat: worst expected calls", max(ev.cost_mean), "<=", n * single)
        if prod is not None and one_nT is not None:
            mu = one_nT.dual_prior
            emb = embed_coordinate(p, prod.primal_mixture, n, "average", mu)
            ev = evaluate(p, emb)
            e_mu = mu_expectation(ev, mu)
            rep.claim("R embed: worst per-theta error", ev.max_error, "<=", eps)
            rep.claim("R embed: n * E_mu*", n * e_mu, "<=", lhs)
            rep.claim("R embed: E_mu* >= R_nT(P)", e_mu, ">=", single_nT)
    return rep


# -- continuity ------------------------------------------------------------------------------

def check_continuity(p: Problem, grid: Iterable, T: int, alpha=0, construct: bool = True) -> CheckReport:
    """Frontier shape, the posterior-filter inequality at each grid point, and the
    mixing construction between pairs of grid points."""
    alpha = frac(alpha)
    grid = sorted({frac(e) for e in grid})
    rep = CheckReport("continuity", _describe(p, grid=grid, T=T, alpha=alpha))
    curve = dist_frontier(p, T)
    rep.witnesses["frontier"] = [list(v) for v in curve.vertices]
    v = curve.vertices
    rep.claim("frontier errors strictly increase", all(a[0] < b[0] for a, b in zip(v, v[1:])), "==", True)
    rep.claim("frontier costs strictly decrease", all(a[1] > b[1] for a, b in zip(v, v[1:])), "==", True)
    slopes = [(b[1] - a[1]) / (b[0] - a[0]) for a, b in zip(v, v[1:])]
    rep.claim("frontier slopes strictly increase (convex)",
              all(a < b for a, b in zip(slopes, slopes[1:])), "==", True)

    mu_min = p.mu_min
    deterministic = p.oracle.deterministic

    def val(e):
        try:
            return curve.value(e)
        except InfeasibleError:
            return None

    for eps in grid:
        tag = f"eps={fmt(eps)}"
        if eps <= 0:
            rep.skip(f"filter inequality {tag}", "needs eps > 0")
            continue
        if not mu_min ** 2 > eps:
            rep.skip(f"filter inequality {tag}", f"needs sqrt(eps) < mu_min = {fmt(mu_min)}")
            continue
        root = sqrt(eps)
        lhs, d_eps = val(alpha), val(eps)
        far = alpha / root
        d_far = val(far)
        if lhs is None or d_far is None:
            rep.skip(f"filter inequality {tag}", "alpha below the smallest achievable error")
            continue
        rhs = root * d_far + d_eps
        rep.claim(f"filter inequality {tag}", lhs, "<=", rhs)
        if not construct or isinstance(far, Surd):
            continue
        res = filter_posterior(p, curve.witness(eps), eps, curve.witness(far), alpha=alpha)
        rep.claim(f"filter construction cost {tag}", res.cost, "<=", res.cost_bound)
        rep.claim(f"filter Markov step {tag}", res.grafted_mass, "<=", root)
        if deterministic:
            rep.claim(f"filter kept leaves are correct {tag}", res.dichotomy_ok, "==", True)
            rep.claim(f"filter construction error {tag}", res.error, "<=", alpha)
        else:
            rep.skip(f"filter construction error {tag}",
                     "the kept-leaf argument needs a deterministic oracle")

    for i, eps in enumerate(grid):
        for rho in grid[i + 1:]:
            tag = f"eps={fmt(eps)}, rho={fmt(rho)}"
            if eps <= 0 or val(eps / 2) is None or val(rho) is None:
                rep.skip(f"mixing {tag}", "eps/2 is below the smallest achievable error")
                continue
            w = continuity_weight(eps, rho)
            m = mix(curve.witness(rho), curve.witness(eps / 2), w)
            ev = evaluate(p, m)
            cost = mu_expectation(ev, p.prior)
            rep.claim(f"mixing error {tag}", mu_error(ev, p.prior), "<=", eps)
            rep.claim(f"mixing cost {tag}", cost, "==", w * val(rho) + (1 - w) * val(eps / 2))
            rep.claim(f"mixing bounds D(eps) {tag}", val(eps), "<=", cost)
    return rep


# -- minimax ---------------------------------------------------------------------------------------

def check_minimax(p: Problem, eps, T, lp: str = "exact") -> CheckReport:
    """min over mixtures of max over priors equals max over priors of min over mixtures."""
    eps = frac(eps)
    rep = CheckReport("minimax", _describe(p, epsilon=eps, T=T, lp=lp))
    try:
        g = randomized_value(p, T, eps, lp=lp)
    except InfeasibleError as exc:
        # both sides are infima over the same empty set
        rep.measurements["infeasible"] = str(exc)
        rep.claim("primal value (empty feasible set)", INF, "==", INF)
        rep.claim("gap", ZERO, "==", ZERO, note="both values are +inf")
        return rep
    rep.measurements["primal"] = g.primal_value
    rep.measurements["dual"] = g.dual_value
    rep.witnesses["dual_prior"] = list(g.dual_prior.weights)
    rep.witnesses["primal_mixture"] = [w for w, _ in g.primal_mixture.atoms]
    if g.exact:
        rep.claim("gap", g.gap, "==", ZERO)
    else:
        rep.claim("|gap|", abs(g.gap), "<=", 1e-9)
    ev = evaluate(p, g.primal_mixture)
    mu = g.dual_prior
    rep.claim("dual prior sums to 1", sum(mu.weights), "==", 1)
    if g.exact:
        rep.claim("mixture worst expected calls", max(ev.cost_mean), "==", g.primal_value)
        rep.claim("mixture per-theta error", ev.max_error, "<=", eps)
        rep.claim("E_mu*[mixture] = value", mu_expectation(ev, mu), "==", g.primal_value)
    else:
        rep.claim("mixture worst expected calls", abs(float(max(ev.cost_mean)) - g.primal_value), "<=", 1e-6)
        rep.claim("mixture per-theta error", float(ev.max_error), "<=", float(eps) + 1e-9)
    return rep


# -- direct sum ---------------------------------------------------------------------------------------

def _surrogate(rep: CheckReport, p: Problem, eps, n: int, T: int, kind: str) -> None:
    """Worst-case complexity of n copies, bracketed by the expected single-instance
    cost from below and a truncated repetition from above."""
    if eps <= 0:
        rep.skip("worst-case bracket", "needs eps > 0")
        return
    alpha = eps / 2
    pc = product_problem(p, n, "per-coordinate")
    if kind == "distributional":
        base = _try(dist_value, p, T, eps - alpha)
        low = _dist(p, n * T, eps)
    else:
        base = _try(randomized_value, p, T, eps - alpha)
        low = _rand(p, n * T, eps)
    if base is None or low is None:
        rep.skip("worst-case bracket", "single-instance value infeasible")
        return
    s = base.mixture if kind == "distributional" else base.primal_mixture
    ev = evaluate(p, s)
    if kind == "distributional":
        agg = mu_aggregates(p, ev)
        mean, var = agg.expectation, agg.variance
    else:
        mean = max(ev.cost_mean)
        var = max(m2 - m1 * m1 for m1, m2 in
                  (moments(ev, Prior.point_mass(len(p.theta), t)) for t in range(len(p.theta))))
    budget = chebyshev_budget(n * mean, sqrt(n * var), k_for_alpha(alpha))
    cut = truncate(repeat_n(s, n), budget, problem=pc)
    cev = evaluate(pc, cut)
    try:
        depth_n = worst_case_depth(pc, eps, kind, max_T=budget.max_calls)
    except InfeasibleError:
        depth_n = None
    rep.measurements["worst_case_product"] = depth_n
    rep.measurements["truncation_budget"] = budget.max_calls
    if kind == "distributional":
        rep.claim("truncated repetition error", max(mu_error(cev, pc.prior)), "<=", eps)
    else:
        rep.claim("truncated repetition error", cev.max_error, "<=", eps)
    rep.claim("truncated repetition depth", cev.depth, "<=", budget.max_calls)
    rep.claim("worst-case lower: n*Cbar_nT(eps) <= C([P,eps]^n)", n * low, "<=", depth_n)
    rep.claim("worst-case upper: C([P,eps]^n) <= budget", depth_n, "<=", budget.max_calls)
    if depth_n is not None:
        rep.measurements["bracket_width_per_copy"] = Fraction(budget.max_calls, n) - low


def check_direct_sum(p: Problem, eps, n: int, T: int, kind: str = "distributional",
                     worst_case: bool = True) -> CheckReport:
    """Inequality chains relating n copies with joint error eps to single copies.

    Distributional: needs a nontrivial prior and 0 < eps < min(99/100, mu_min^2).
    Randomized: needs 0 < eps < 1/(128 |theta|^2); uses the delta = 1/2 constant 1/2.
    """
    eps = frac(eps)
    rep = CheckReport(f"direct-sum ({kind})", _describe(p, epsilon=eps, n=n, T=T))
    m = len(p.theta)
    if kind == "distributional":
        if p.prior is None or not p.prior.nontrivial:
            rep.skip("hypothesis", "needs a nontrivial prior")
            return rep
        if not (0 < eps < Fraction(99, 100) and eps < p.mu_min ** 2):
            rep.skip("hypothesis", f"needs 0 < eps < min(99/100, mu_min^2 = {fmt(p.mu_min ** 2)})")
            return rep
        value = _dist
    elif kind == "randomized":
        if not 0 < eps < Fraction(1, 128 * m * m):
            rep.skip("hypothesis", f"needs 0 < eps < 1/(128 |theta|^2) = {fmt(Fraction(1, 128 * m * m))}")
            return rep
        value = _rand
    else:
        raise PreconditionError(f"unknown kind {kind!r}")

    pc = product_problem(p, n, "per-coordinate")
    joint = product_problem(p, n, "joint")
    c_pc = value(pc, n * T, eps)
    c_joint = value(joint, n * T, eps)
    c_eps_nT = value(p, n * T, eps)
    c_zero_nT = value(p, n * T, 0)
    c_small_T = value(p, T, eps / n)
    c_zero_T = value(p, T, 0)
    rep.measurements.update({"per_coordinate": c_pc, "joint": c_joint})

    # (a)
    rep.claim("(a) n*C(eps) <= C([P,eps]^n)", _scale(n, c_eps_nT), "<=", c_pc)
    rep.claim("(a) C([P,eps]^n) <= C([P^n,eps])", c_pc, "<=", c_joint)
    # (b)
    if kind == "distributional":
        factor = 1 - sqrt(eps)
        c_small_nT = value(p, n * T, eps / n)
        rep.claim("(b) (1-sqrt(eps))*C(eps/n) <= C(eps)",
                  None if c_small_nT is None else factor * c_small_nT, "<=", c_eps_nT)
    else:
        factor = Fraction(1, 2)
        mid = value(p, n * T, Fraction(1, 64 * m * m))
        c_small_nT = value(p, n * T, eps / n)
        rep.claim("(b) (1/2)*C(eps/n) <= C(1/(64|theta|^2))",
                  _scale(factor, c_small_nT), "<=", mid)
        rep.claim("(b) C(1/(64|theta|^2)) <= C(eps)", mid, "<=", c_eps_nT)
    # (c)
    rep.claim("(c) C([P^n,eps]) <= n*C(eps/n)", c_joint, "<=", _scale(n, c_small_T))
    # (d)
    rep.claim("(d) c0*n*C(0) <= n*C(eps)",
              None if c_zero_nT is None else factor * n * c_zero_nT, "<=", _scale(n, c_eps_nT))
    rep.claim("(d) C([P^n,eps]) <= n*C(0)", c_joint, "<=", _scale(n, c_zero_T))
    if c_joint is not None and c_zero_T:
        rep.measurements["ratio_joint_over_n_C0"] = c_joint / (n * c_zero_T)
    # (e)
    if worst_case:
        _surrogate(rep, p, eps, n, T, kind)
    return rep


# -- truncation ----------------------------------------------------------------------------------------

def check_truncation(p: Problem, s, n: int, alpha, kind: str | None = None) -> CheckReport:
    """Repeat ``s`` n times and cut at mean + sigma_n / sqrt(alpha) calls.

    "distributional" uses the prior's mean and variance; "randomized" uses the
    worst parameter's, which bounds every product parameter's variance.
    """
    alpha = frac(alpha)
    kind = kind or ("distributional" if p.prior is not None else "randomized")
    rep = CheckReport(f"truncation ({kind})", _describe(p, n=n, alpha=alpha))
    s = as_strategy(s)
    ev = evaluate(p, s)
    pc = product_problem(p, n, "per-coordinate")
    k = k_for_alpha(alpha)
    if kind == "distributional":
        agg = mu_aggregates(p, ev)
        mean, var = agg.expectation, agg.variance
    else:
        per = [moments(ev, Prior.point_mass(len(p.theta), t)) for t in range(len(p.theta))]
        mean = max(m1 for m1, _ in per)
        var = max(m2 - m1 * m1 for m1, m2 in per)
    sigma_n = sqrt(n * var)
    budget = chebyshev_budget(n * mean, sigma_n, k)
    rep.measurements.update({"mean": n * mean, "sigma_n": sigma_n, "k": k,
                             "budget": budget.max_calls})
    rs = repeat_n(s, n)
    full = evaluate(pc, rs)
    cut = evaluate(pc, truncate(rs, budget, problem=pc))
    rep.claim("depth within budget", cut.depth, "<=", budget.max_calls)
    if kind == "distributional":
        mu = pc.prior
        tail = tail_mass(full, budget.max_calls, mu)
        rep.measurements["tail_mass"] = tail
        rep.claim("tail mass <= 1/k^2", tail, "<=", budget.certificate)
        before, after = mu_error(full, mu), mu_error(cut, mu)
        base = mu_error(ev, p.prior)
        for c in range(n):
            rep.claim(f"coordinate {c + 1} inflation <= tail", after[c] - before[c], "<=", tail)
            rep.claim(f"coordinate {c + 1} error <= err(s) + alpha", after[c], "<=", base + alpha)
    else:
        tails = tail_mass(full, budget.max_calls)
        rep.measurements["worst_tail_mass"] = max(tails)
        rep.claim("worst tail mass <= 1/k^2", max(tails), "<=", budget.certificate)
        worst_inflation = max(a - b for ca, cb in zip(cut.components, full.components)
                              for a, b in zip(ca, cb))
        rep.claim("worst inflation <= alpha", worst_inflation, "<=", alpha)
        rep.claim("worst error <= err(s) + alpha", cut.max_error, "<=", ev.max_error + alpha)
    return rep


# -- derandomization ---------------------------------------------------------------------------------------

def check_derandomization(f, eps, max_T: int | None = None, ell: int | None = None) -> CheckReport:
    """Below 2^-l worst-case error, randomization does not reduce worst-case depth."""
    p = f if isinstance(f, Problem) else make_query_problem(f, ell)
    eps = frac(eps)
    rep = CheckReport("derandomization", _describe(p, epsilon=eps))
    bound = Fraction(1, len(p.theta))
    if not eps < bound:
        rep.skip("hypothesis", f"needs eps < 1/|theta| = {fmt(bound)}")
        return rep
    max_T = len(p.inputs) if max_T is None else max_T
    d_eps, mixture = worst_case_witness(p, eps, "randomized", max_T)
    d_zero = worst_case_depth(p, 0, "randomized", max_T)
    rep.measurements.update({"R_eps": d_eps, "R_zero": d_zero})
    rep.claim("R([f,eps]) = R([f,0])", d_eps, "==", d_zero)
    tree = derandomize(p, mixture)
    ev = evaluate(p, tree)
    rep.witnesses["atoms"] = len(mixture.atoms)
    rep.claim("extracted tree error", ev.max_error, "==", 0)
    rep.claim("extracted tree depth", strategy_depth(tree), "<=", strategy_depth(mixture))
    return rep
