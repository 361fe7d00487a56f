"""Strategy transformations: repetition, coordinate embedding, truncation, mixing,
and posterior filtering."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from .errors import PreconditionError, ProblemError
from .exact import Surd, exact_ceil, frac, mul_roots, sqrt, square
from .model import Prior, Problem
from .strategy import (
    Leaf,
    Query,
    RandomizedStrategy,
    Strategy,
    Tree,
    as_strategy,
    evaluate,
    mu_expectation,
    mu_error,
)

ZERO = Fraction(0)
ONE = Fraction(1)


# -- repetition ---------------------------------------------------------------

def _compose(trees: Sequence[Tree]) -> Tree:
    """Run ``trees[i]`` on coordinate i+1 after the earlier coordinates finish."""
    n = len(trees)
    memo: dict = {}

    def go(node, i: int, prefix: tuple):
        key = (id(node), i, prefix)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if isinstance(node, Leaf):
            done = prefix + (node.out,)
            out = Leaf(done) if i == n - 1 else go(trees[i + 1], i + 1, done)
        else:
            out = Query((i + 1, node.x), tuple(go(c, i, prefix) for c in node.children))
        memo[key] = out
        return out

    return go(trees[0], 0, ())


def repeat_n(s: Strategy, n: int) -> RandomizedStrategy:
    """Solve n independent copies by running ``s`` on each coordinate in turn.

    Every coordinate draws its own atom of ``s``; the result is the product mixture.
    """
    if n < 1:
        raise PreconditionError(f"repeat_n needs n >= 1, got {n}")
    s = as_strategy(s)
    atoms = []
    for combo in itertools.product(s.atoms, repeat=n):
        w = ONE
        for wi, _ in combo:
            w *= wi
        atoms.append((w, _compose([t for _, t in combo])))
    return RandomizedStrategy(tuple(atoms)).merged()


# -- embedding one coordinate --------------------------------------------------

def _couple(branches: Sequence[Sequence[tuple]]) -> list[tuple]:
    """Quantile coupling of several mixtures; returns (weight, tuple-of-trees) atoms.

    Each branch keeps its marginal law, which is all a query node needs since only
    one branch is ever taken.
    """
    idx = [0] * len(branches)
    left = [branches[b][0][0] for b in range(len(branches))]
    out = []
    while True:
        w = min(left)
        out.append((w, tuple(branches[b][idx[b]][1] for b in range(len(branches)))))
        done = False
        for b in range(len(branches)):
            left[b] -= w
            if left[b] == 0:
                idx[b] += 1
                if idx[b] == len(branches[b]):
                    done = True
                else:
                    left[b] = branches[b][idx[b]][0]
        if done:
            return out


def _merge_atoms(atoms) -> tuple:
    acc: dict = {}
    for w, t in atoms:
        if w:
            acc[t] = acc.get(t, ZERO) + w
    return tuple((w, t) for t, w in acc.items())


def _embed_tree(base: Problem, tree: Tree, i: int, filler: tuple) -> tuple:
    """Mixture for the base problem: coordinate ``i`` is real, others use ``filler``."""
    kernel = base.oracle.kernel
    xidx = base.input_index
    memo: dict = {}

    def go(node) -> tuple:
        key = id(node)
        hit = memo.get(key)
        if hit is not None:
            return hit[1]
        if isinstance(node, Leaf):
            out = ((ONE, Leaf(node.out[i - 1])),)
        else:
            coord, x = node.x
            kids = [go(c) for c in node.children]
            if coord == i:
                out = tuple((w, Query(x, ts)) for w, ts in _couple(kids))
            else:
                row = kernel[filler[coord - 1]][xidx[x]]
                out = _merge_atoms((q * w, t) for q, kid in zip(row, kids) if q for w, t in kid)
        memo[key] = (node, out)
        return out

    return go(tree)


def embed_coordinate(base: Problem, s_n: Strategy, n: int, mode="average",
                     fillers=None) -> RandomizedStrategy:
    """Turn a strategy for n copies into one for a single copy.

    The real instance is placed at coordinate ``mode`` (1-based), or at a uniform
    random coordinate when ``mode == "average"``. The other coordinates get
    parameters drawn from ``fillers`` and their oracle answers are simulated from
    the known kernel, so only real-coordinate queries cost calls.
    """
    s_n = as_strategy(s_n)
    m = len(base.theta)
    if fillers is None:
        if base.prior is None:
            raise PreconditionError("embed_coordinate needs filler priors or a base prior")
        fillers = base.prior
    if isinstance(fillers, Prior) or (fillers and not isinstance(fillers[0], (Prior, list, tuple))):
        fillers = [fillers] * n
    fillers = [f.weights if isinstance(f, Prior) else tuple(frac(w) for w in f) for f in fillers]
    if len(fillers) != n:
        raise PreconditionError(f"need {n} filler priors, got {len(fillers)}")
    for f in fillers:
        if len(f) != m or sum(f) != 1 or any(w < 0 for w in f):
            raise PreconditionError("filler prior does not match the base parameter set")
    if mode == "average":
        coords = [(Fraction(1, n), i) for i in range(1, n + 1)]
    else:
        i = int(mode)
        if not 1 <= i <= n:
            raise PreconditionError(f"coordinate {i} is outside 1..{n}")
        coords = [(ONE, i)]

    atoms = []
    for wi, i in coords:
        others = [range(m) if j != i else (None,) for j in range(1, n + 1)]
        for filler in itertools.product(*others):
            wf = wi
            for j, t in enumerate(filler, start=1):
                if j != i:
                    wf *= fillers[j - 1][t]
            if not wf:
                continue
            for wa, tree in s_n.atoms:
                for w, t in _embed_tree(base, tree, i, filler):
                    atoms.append((wf * wa * w, t))
    return RandomizedStrategy(_merge_atoms(atoms))


# -- truncation -----------------------------------------------------------------

class Budget(NamedTuple):
    max_calls: int
    certificate: Fraction | None = None  # bound on the error inflation, 1/k^2


def chebyshev_budget(mean, sigma, k) -> Budget:
    """Budget ceil(mean + k*sigma) with the Chebyshev inflation bound 1/k^2.

    ``sigma`` and ``k`` may be exact square roots.
    """
    mean = frac(mean)
    if not isinstance(sigma, Surd):
        sigma = frac(sigma)
    if not isinstance(k, Surd):
        k = frac(k)
    if sigma < 0 or k <= 0:
        raise PreconditionError("chebyshev_budget needs sigma >= 0 and k > 0")
    calls = exact_ceil(mul_roots(k, sigma) + mean)
    return Budget(max(calls, 0), 1 / square(k))


def k_for_alpha(alpha) -> Fraction | Surd:
    """k = 1/sqrt(alpha), so that 1/k^2 = alpha."""
    alpha = frac(alpha)
    if not 0 < alpha <= 1:
        raise PreconditionError(f"alpha must lie in (0, 1], got {alpha}")
    return sqrt(1 / alpha)


def _truncate_tree(t: Tree, budget: int, fallback) -> Tree:
    memo: dict = {}

    def go(node, left: int):
        if isinstance(node, Leaf):
            return node
        if left == 0:
            return Leaf(fallback)
        key = (id(node), left)
        hit = memo.get(key)
        if hit is None:
            kids = tuple(go(c, left - 1) for c in node.children)
            out = node if all(a is b for a, b in zip(kids, node.children)) else Query(node.x, kids)
            hit = memo[key] = (node, out)
        return hit[1]

    return go(t, budget)


def truncate(s: Strategy, budget, fallback=None, problem: Problem | None = None) -> Strategy:
    """Stop every run after ``budget`` calls and emit ``fallback`` instead of continuing.

    ``fallback`` defaults to the problem's first outcome label.
    """
    max_calls = budget.max_calls if isinstance(budget, Budget) else int(budget)
    if max_calls < 0:
        raise PreconditionError("budget must be nonnegative")
    if fallback is None:
        if problem is None:
            raise PreconditionError("truncate needs a fallback outcome or a problem")
        fallback = problem.outcomes.labels[0]
    if isinstance(s, (Leaf, Query)):
        return _truncate_tree(s, max_calls, fallback)
    s = as_strategy(s)
    return RandomizedStrategy(tuple((w, _truncate_tree(t, max_calls, fallback)) for w, t in s.atoms))


# -- mixing ---------------------------------------------------------------------

def mix(s1: Strategy, s2: Strategy, w) -> RandomizedStrategy:
    """Run ``s1`` with probability ``w`` and ``s2`` otherwise."""
    w = frac(w)
    if not 0 <= w <= 1:
        raise PreconditionError(f"mixture weight must lie in [0, 1], got {w}")
    if w == 1:
        return as_strategy(s1)
    if w == 0:
        return as_strategy(s2)
    a1, a2 = as_strategy(s1).atoms, as_strategy(s2).atoms
    return RandomizedStrategy(_merge_atoms([(w * v, t) for v, t in a1]
                                           + [((1 - w) * v, t) for v, t in a2]))


def continuity_weight(eps, rho) -> Fraction:
    """Weight eps / (2 rho - eps) on an error-rho strategy, mixed with an error-eps/2 one."""
    eps, rho = frac(eps), frac(rho)
    if not 0 <= eps <= rho or rho == 0:
        raise PreconditionError("need 0 <= eps <= rho and rho > 0")
    return eps / (2 * rho - eps)


# -- posterior filtering --------------------------------------------------------

@dataclass(frozen=True)
class PosteriorRecord:
    atom: int
    path: tuple        # ((x, answer position), ...)
    out: object
    prob: Fraction     # Pr(M = m), mixture weight included
    posterior: tuple   # Pr(theta | M = m) for every theta, zero off the support
    perr: object       # posterior error; a tuple per coordinate for per-coordinate products

    @property
    def support(self) -> tuple:
        return tuple(t for t, q in enumerate(self.posterior) if q)


def _reach(p: Problem, tree: Tree, start: tuple):
    """Yield (path, out, joint) for each leaf with joint[t] = start[t] * Pr_t(path)."""
    kernel = p.oracle.kernel
    xidx = p.input_index
    stack = [(tree, (), start)]
    while stack:
        node, path, b = stack.pop()
        if not any(b):
            continue
        if isinstance(node, Leaf):
            yield path, node.out, b
            continue
        try:
            xi = xidx[node.x]
        except (KeyError, TypeError):
            raise ProblemError(f"query input {node.x!r} is not an oracle input") from None
        for j in range(len(node.children) - 1, -1, -1):
            nb = tuple(bt * kernel[t][xi][j] if bt else ZERO for t, bt in enumerate(b))
            stack.append((node.children[j], path + ((node.x, j),), nb))


def posterior_table(p: Problem, s: Strategy, mu=None) -> list[PosteriorRecord]:
    """One record per reachable (atom, leaf): its probability, posterior, and posterior error."""
    if mu is None:
        if p.prior is None:
            raise PreconditionError("posterior_table needs a prior")
        mu = p.prior
    mu = mu.weights if isinstance(mu, Prior) else tuple(frac(w) for w in mu)
    s = as_strategy(s)
    wrong, oidx = p.wrong, p.outcome_index
    n_comp = p.n_components
    records = []
    for a, (w, tree) in enumerate(s.atoms):
        start = tuple(w * v for v in mu)
        for path, out, joint in _reach(p, tree, start):
            total = sum(joint, ZERO)
            post = tuple(v / total for v in joint)
            try:
                o = oidx[out]
            except (KeyError, TypeError):
                raise ProblemError(f"leaf outcome {out!r} is not in the outcome space") from None
            errs = tuple(sum((q for t, q in enumerate(post) if q and wrong[t][o][c]), ZERO)
                         for c in range(n_comp))
            perr = errs if p.semantics.per_coordinate else errs[0]
            records.append(PosteriorRecord(a, path, out, total, post, perr))
    return records


def _graft(tree: Tree, paths: set, sub: Tree) -> Tree:
    def go(node, path):
        if isinstance(node, Leaf):
            return sub if path in paths else node
        if not any(q[: len(path)] == path for q in paths):
            return node
        return Query(node.x, tuple(go(c, path + ((node.x, j),))
                                   for j, c in enumerate(node.children)))

    return go(tree, ())


class FilterResult(NamedTuple):
    strategy: RandomizedStrategy
    error: Fraction              # evaluated error of the output under the prior
    cost: Fraction               # evaluated expected calls of the output
    cost_bound: object           # E[s] + sqrt(eps) * E[fallback], exact (may be a Surd)
    grafted_mass: Fraction       # Pr(the fallback runs)
    cost_ok: bool
    markov_ok: bool              # grafted_mass <= sqrt(eps)
    dichotomy_ok: bool           # kept leaves are correct on their whole posterior support
    error_ok: bool | None        # error <= alpha, when alpha is given


def filter_posterior(p: Problem, s: Strategy, eps, fallback: Strategy, alpha=None) -> FilterResult:
    """Keep an answer only when its posterior error is at most sqrt(eps); otherwise
    run ``fallback`` after it.

    Requires mu_min > sqrt(eps), checked exactly as mu_min^2 > eps.
    """
    eps = frac(eps)
    if eps < 0:
        raise PreconditionError("eps must be nonnegative")
    if p.prior is None:
        raise PreconditionError("filter_posterior needs a prior")
    if p.semantics.per_coordinate:
        raise PreconditionError("filter_posterior works on single-error problems")
    if not p.mu_min ** 2 > eps:
        raise PreconditionError(f"need mu_min > sqrt(eps): mu_min = {p.mu_min}, eps = {eps}")
    threshold = sqrt(eps)
    s = as_strategy(s)
    fb = as_strategy(fallback)
    table = posterior_table(p, s)
    accept = p.target.accept

    drop: dict[int, set] = {}
    grafted = ZERO
    dichotomy = True
    for rec in table:
        if rec.perr > threshold:
            drop.setdefault(rec.atom, set()).add(rec.path)
            grafted += rec.prob
        elif any(rec.out not in accept[t] for t in rec.support):
            dichotomy = False

    atoms = []
    for a, (w, tree) in enumerate(s.atoms):
        paths = drop.get(a)
        if not paths:
            atoms.append((w, tree))
            continue
        for v, sub in fb.atoms:
            atoms.append((w * v, _graft(tree, paths, sub)))
    out = RandomizedStrategy(_merge_atoms(atoms))

    mu = p.prior
    ev = evaluate(p, out)
    err, cost = mu_error(ev, mu), mu_expectation(ev, mu)
    bound = mu_expectation(evaluate(p, s), mu) + threshold * mu_expectation(evaluate(p, fb), mu)
    error_ok = None if alpha is None else err <= frac(alpha)
    return FilterResult(out, err, cost, bound, grafted, cost <= bound,
                        grafted <= threshold, dichotomy, error_ok)
