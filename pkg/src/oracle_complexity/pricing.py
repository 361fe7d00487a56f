"""Best depth-bounded deterministic tree against linear weights on its evaluation.

A tree is scored by

    sum_theta cost_w[theta] * E_theta[calls] + sum_{theta, c} err_w[theta][c] * err_{theta, c}

and several such scores can be stacked for a lexicographic objective. The search
is a dynamic program over likelihood states: the vector of per-parameter path
probabilities reached so far. Scores are linear in that vector, so states are
memoized after scaling by their first nonzero entry.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple, Sequence

from .exact import fast_rational as Q, to_fraction
from .model import Problem
from .strategy import Leaf, Query, Tree

ZERO = Fraction(0)


class Weights(NamedTuple):
    cost: tuple   # per theta
    err: tuple    # per theta, per component


def weights(p: Problem, cost=None, err=None) -> Weights:
    """Fill in zero weights; ``err`` may give one scalar per theta for single-error problems."""
    n_theta, n_comp = len(p.theta), p.n_components
    cost = tuple(Fraction(v) for v in cost) if cost is not None else (ZERO,) * n_theta
    if err is None:
        err = tuple((ZERO,) * n_comp for _ in range(n_theta))
    else:
        err = tuple(tuple(Fraction(v) for v in e) if isinstance(e, (tuple, list))
                    else (Fraction(e),) * 1 for e in err)
        if any(len(e) != n_comp for e in err):
            raise ValueError("error weights do not match the number of components")
    if len(cost) != n_theta or len(err) != n_theta:
        raise ValueError("weights do not match |theta|")
    return Weights(cost, err)


class Priced(NamedTuple):
    value: tuple  # one entry per stacked objective
    tree: Tree


def best_response(p: Problem, depth: int, objectives: Sequence[Weights] | Weights) -> Priced:
    """Exact minimizer over all deterministic trees of depth <= ``depth``.

    Ties prefer leaves over queries, then earlier outcomes and inputs.
    """
    if isinstance(objectives, Weights):
        objectives = (objectives,)
    objectives = tuple(Weights(tuple(Q(v) for v in w.cost),
                               tuple(tuple(Q(v) for v in e) for e in w.err)) for w in objectives)
    k = len(objectives)
    n_theta = len(p.theta)
    kernel = [[[Q(v) for v in row] for row in rows] for rows in p.oracle.kernel]
    zero = Q(0)
    wrong = p.wrong
    n_out, n_x, n_y = len(p.outcomes.labels), len(p.oracle.inputs), len(p.oracle.answers)
    labels, inputs = p.outcomes.labels, p.oracle.inputs

    # leaf_score[o][j][t]: weighted error of outcome o at theta t under objective j
    leaf_score = [[[sum((w.err[t][c] for c in range(len(w.err[t])) if wrong[t][o][c]), zero)
                    for t in range(n_theta)] for w in objectives] for o in range(n_out)]
    cost_w = [w.cost for w in objectives]
    leaves = [Leaf(lab) for lab in labels]
    zero_val = (zero,) * k
    memo: dict = {}

    def solve(b: tuple, d: int) -> Priced:
        support = [t for t in range(n_theta) if b[t]]
        if not support:
            return Priced(zero_val, leaves[0])
        lead = b[support[0]]
        scale = lead if lead > 0 else -lead
        key = (tuple(v / scale for v in b) if scale != 1 else b, d)
        hit = memo.get(key)
        if hit is None:
            hit = memo[key] = _solve(key[0], d, support)
        val, tree = hit
        return Priced(tuple(v * scale for v in val), tree) if scale != 1 else hit

    def _solve(b: tuple, d: int, support: list) -> Priced:
        best_val, best_tree = None, None
        for o in range(n_out):
            sc = leaf_score[o]
            val = tuple(sum((b[t] * sc[j][t] for t in support), zero) for j in range(k))
            if best_val is None or val < best_val:
                best_val, best_tree = val, leaves[o]
        if d == 0:
            return Priced(best_val, best_tree)
        call = tuple(sum((b[t] * cost_w[j][t] for t in support), zero) for j in range(k))
        for xi in range(n_x):
            kids, total = [], list(call)
            for y in range(n_y):
                nb = tuple(b[t] * kernel[t][xi][y] if b[t] else zero for t in range(n_theta))
                r = solve(nb, d - 1)
                kids.append(r.tree)
                for j in range(k):
                    total[j] += r.value[j]
            val = tuple(total)
            if val < best_val:
                best_val, best_tree = val, Query(inputs[xi], tuple(kids))
        return Priced(best_val, best_tree)

    start = tuple(Q(1) for _ in range(n_theta))
    val, tree = solve(start, depth)
    return Priced(tuple(to_fraction(v) for v in val), tree)
