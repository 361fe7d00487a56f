"""Adaptive query strategies as finite decision trees and their exact evaluation."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple, Sequence, Union

from .errors import PreconditionError, ProblemError
from .exact import frac
from .model import Label, Prior, Problem

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class Leaf:
    out: Label

    def __repr__(self):
        return f"Leaf({self.out!r})"


@dataclass(frozen=True)
class Query:
    """Query input ``x``; ``children[j]`` runs after the j-th answer of the oracle."""

    x: Label
    children: tuple

    def __repr__(self):
        return f"Query({self.x!r}, {list(self.children)!r})"


Tree = Union[Leaf, Query]


@dataclass(frozen=True)
class RandomizedStrategy:
    atoms: tuple  # ((weight, tree), ...)

    @classmethod
    def pure(cls, tree: Tree) -> "RandomizedStrategy":
        return cls(((ONE, tree),))

    @classmethod
    def of(cls, atoms: Iterable) -> "RandomizedStrategy":
        atoms = tuple((frac(w), t) for w, t in atoms)
        if any(w <= 0 for w, _ in atoms):
            raise ProblemError("mixture weights must be positive")
        if sum(w for w, _ in atoms) != 1:
            raise ProblemError("mixture weights must sum to 1")
        return cls(atoms)

    @property
    def weights(self) -> tuple:
        return tuple(w for w, _ in self.atoms)

    @property
    def trees(self) -> tuple:
        return tuple(t for _, t in self.atoms)

    def merged(self) -> "RandomizedStrategy":
        """Sum the weights of identical trees, keeping first-occurrence order."""
        acc: dict = {}
        for w, t in self.atoms:
            acc[t] = acc.get(t, ZERO) + w
        return RandomizedStrategy(tuple((w, t) for t, w in acc.items()))


Strategy = Union[Tree, RandomizedStrategy]


def as_strategy(s: Strategy) -> RandomizedStrategy:
    if isinstance(s, RandomizedStrategy):
        return s
    if isinstance(s, (Leaf, Query)):
        return RandomizedStrategy.pure(s)
    raise TypeError(f"not a strategy: {s!r}")


def tree_depth(t: Tree) -> int:
    """Structural depth: the most queries on any root-to-leaf path."""
    memo: dict[int, int] = {}

    def go(node):
        key = id(node)
        if key not in memo:
            memo[key] = 0 if isinstance(node, Leaf) else 1 + max(go(c) for c in node.children)
        return memo[key]

    return go(t)


def strategy_depth(s: Strategy) -> int:
    return max(tree_depth(t) for t in as_strategy(s).trees)


def tree_size(t: Tree) -> int:
    if isinstance(t, Leaf):
        return 1
    return 1 + sum(tree_size(c) for c in t.children)


def iter_paths(t: Tree) -> Iterator[tuple[tuple, Label]]:
    """Yield ``(path, outcome)`` for every leaf; path is a tuple of (x, answer position)."""
    stack = [(t, ())]
    while stack:
        node, path = stack.pop()
        if isinstance(node, Leaf):
            yield path, node.out
        else:
            for j in range(len(node.children) - 1, -1, -1):
                stack.append((node.children[j], path + ((node.x, j),)))


# -- evaluation ---------------------------------------------------------------

class _Raw(NamedTuple):
    err: list   # [theta][component]
    dist: list  # [theta][calls]


def _trim(dist: list) -> list:
    end = len(dist)
    while end > 1 and dist[end - 1] == 0:
        end -= 1
    return dist[:end]


@dataclass(frozen=True, eq=False)
class Evaluation:
    """Exact per-parameter error and stopping-time law of a strategy."""

    components: tuple   # components[t][c]: error probability of component c at theta t
    cost_dist: tuple    # cost_dist[t][k]: Pr_t(exactly k oracle calls)
    per_coordinate: bool = False

    @classmethod
    def from_raw(cls, err, dist, per_coordinate: bool) -> "Evaluation":
        trimmed = [_trim(list(d)) for d in dist]
        width = max(len(d) for d in trimmed)
        cost = tuple(tuple(d) + (ZERO,) * (width - len(d)) for d in trimmed)
        return cls(tuple(tuple(e) for e in err), cost, per_coordinate)

    @property
    def err(self) -> tuple:
        if self.per_coordinate:
            return self.components
        return tuple(c[0] for c in self.components)

    @cached_property
    def cost_mean(self) -> tuple:
        return tuple(sum((k * p for k, p in enumerate(d)), ZERO) for d in self.cost_dist)

    @cached_property
    def theta_depth(self) -> tuple:
        out = []
        for d in self.cost_dist:
            k = len(d) - 1
            while k > 0 and d[k] == 0:
                k -= 1
            out.append(k)
        return tuple(out)

    @property
    def depth(self) -> int:
        return max(self.theta_depth)

    @property
    def max_error(self) -> Fraction:
        return max(max(c) for c in self.components)

    def fingerprint(self) -> tuple:
        return (self.components, self.cost_mean, self.theta_depth)

    def __eq__(self, other):
        if not isinstance(other, Evaluation):
            return NotImplemented
        return (self.components == other.components and self.cost_dist == other.cost_dist
                and self.per_coordinate == other.per_coordinate)

    def __hash__(self):
        return hash((self.components, self.cost_dist))


def _leaf_raw(p: Problem, out) -> _Raw:
    try:
        o = p.outcome_index[out]
    except (KeyError, TypeError):
        raise ProblemError(f"leaf outcome {out!r} is not in the outcome space") from None
    wrong = p.wrong
    return _Raw([[Fraction(w) for w in wrong[t][o]] for t in range(len(p.theta))],
                [[ONE] for _ in p.theta])


def _query_raw(p: Problem, x, children: Sequence[_Raw]) -> _Raw:
    try:
        xi = p.input_index[x]
    except (KeyError, TypeError):
        raise ProblemError(f"query input {x!r} is not an oracle input") from None
    if len(children) != len(p.oracle.answers):
        raise ProblemError(f"query on {x!r} has {len(children)} children for "
                           f"{len(p.oracle.answers)} answers")
    kernel = p.oracle.kernel
    n_comp = p.n_components
    err, dist = [], []
    for t in range(len(p.theta)):
        row = kernel[t][xi]
        e = [ZERO] * n_comp
        width = 1 + max(len(ch.dist[t]) for ch in children)
        d = [ZERO] * width
        for y, q in enumerate(row):
            if not q:
                continue
            ch = children[y]
            ce = ch.err[t]
            for c in range(n_comp):
                if ce[c]:
                    e[c] += q * ce[c]
            for k, v in enumerate(ch.dist[t]):
                if v:
                    d[k + 1] += q * v
        err.append(e)
        dist.append(d)
    return _Raw(err, dist)


def _tree_raw(p: Problem, tree: Tree, memo: dict) -> _Raw:
    key = id(tree)
    hit = memo.get(key)
    if hit is not None:
        return hit[1]
    if isinstance(tree, Leaf):
        raw = _leaf_raw(p, tree.out)
    elif isinstance(tree, Query):
        raw = _query_raw(p, tree.x, [_tree_raw(p, c, memo) for c in tree.children])
    else:
        raise ProblemError(f"not a tree node: {tree!r}")
    memo[key] = (tree, raw)  # keep the node alive so its id stays unique
    return raw


def _mix_raw(parts: Sequence[tuple[Fraction, _Raw]], n_theta: int, n_comp: int) -> _Raw:
    err, dist = [], []
    for t in range(n_theta):
        e = [ZERO] * n_comp
        width = max(len(r.dist[t]) for _, r in parts)
        d = [ZERO] * width
        for w, r in parts:
            for c in range(n_comp):
                e[c] += w * r.err[t][c]
            for k, v in enumerate(r.dist[t]):
                d[k] += w * v
        err.append(e)
        dist.append(d)
    return _Raw(err, dist)


def evaluate(p: Problem, s: Strategy) -> Evaluation:
    """Exact error and stopping-time law of ``s`` on every parameter of ``p``."""
    s = as_strategy(s)
    memo: dict = {}
    parts = [(w, _tree_raw(p, t, memo)) for w, t in s.atoms]
    if len(parts) == 1 and parts[0][0] == 1:
        raw = parts[0][1]
    else:
        raw = _mix_raw(parts, len(p.theta), p.n_components)
    return Evaluation.from_raw(raw.err, raw.dist, p.semantics.per_coordinate)


def evaluate_atoms(p: Problem, s: Strategy) -> list[Evaluation]:
    s = as_strategy(s)
    memo: dict = {}
    out = []
    for _, t in s.atoms:
        raw = _tree_raw(p, t, memo)
        out.append(Evaluation.from_raw(raw.err, raw.dist, p.semantics.per_coordinate))
    return out


def combine(evals: Sequence[tuple[Fraction, Evaluation]]) -> Evaluation:
    """Convex combination of evaluations (the law of the corresponding mixture)."""
    first = evals[0][1]
    n_theta, n_comp = len(first.components), len(first.components[0])
    parts = [(frac(w), _Raw([list(c) for c in ev.components], [list(d) for d in ev.cost_dist]))
             for w, ev in evals]
    raw = _mix_raw(parts, n_theta, n_comp)
    return Evaluation.from_raw(raw.err, raw.dist, first.per_coordinate)


# -- aggregates ---------------------------------------------------------------

class Aggregates(NamedTuple):
    error: object        # Fraction, or a tuple per coordinate
    expectation: Fraction
    variance: Fraction


class WorstCase(NamedTuple):
    max_error: Fraction
    max_expected_cost: Fraction
    depth: int


def _weights(mu) -> tuple:
    if isinstance(mu, Prior):
        return mu.weights
    return tuple(frac(w) for w in mu)


def mu_error(ev: Evaluation, mu):
    w = _weights(mu)
    n_comp = len(ev.components[0])
    errs = tuple(sum((w[t] * ev.components[t][c] for t in range(len(w))), ZERO)
                 for c in range(n_comp))
    return errs if ev.per_coordinate else errs[0]


def mu_expectation(ev: Evaluation, mu) -> Fraction:
    w = _weights(mu)
    return sum((wt * m for wt, m in zip(w, ev.cost_mean)), ZERO)


def moments(ev: Evaluation, mu) -> tuple[Fraction, Fraction]:
    """Raw moments ``(E_mu[calls], E_mu[calls^2])`` of the stopping time."""
    w = _weights(mu)
    m1 = m2 = ZERO
    for wt, d in zip(w, ev.cost_dist):
        if not wt:
            continue
        for k, v in enumerate(d):
            if v:
                m1 += wt * k * v
                m2 += wt * k * k * v
    return m1, m2


def mu_aggregates(p: Problem, ev: Evaluation, mu=None) -> Aggregates:
    """Prior-averaged error, expected calls, and variance of the number of calls."""
    if mu is None:
        if p.prior is None:
            raise PreconditionError("no prior given and the problem has none")
        mu = p.prior
    w = _weights(mu)
    if len(w) != len(p.theta):
        raise ProblemError("prior length does not match theta")
    mean = mu_expectation(ev, w)
    var = ZERO
    for wt, d in zip(w, ev.cost_dist):
        if wt:
            var += wt * sum(((k - mean) ** 2 * v for k, v in enumerate(d) if v), ZERO)
    return Aggregates(mu_error(ev, w), mean, var)


def tail_mass(ev: Evaluation, budget: int, mu=None) -> object:
    """Pr(calls > budget), per parameter, or averaged under ``mu`` when given."""
    per = tuple(sum(d[budget + 1:], ZERO) for d in ev.cost_dist)
    if mu is None:
        return per
    return sum((wt * x for wt, x in zip(_weights(mu), per)), ZERO)


def worst_case(ev: Evaluation) -> WorstCase:
    return WorstCase(ev.max_error, max(ev.cost_mean), ev.depth)


# -- transformations ----------------------------------------------------------

def derandomize(p: Problem, s: Strategy) -> Tree:
    """Pick a zero-error atom of a mixture whose worst-case error is below 1/|theta|.

    For a total query problem on ``{0,1}^l`` the threshold is ``2^-l``. The union
    bound over parameters leaves atom mass with no error anywhere; the first such
    atom in mixture order is returned.
    """
    s = as_strategy(s)
    if not p.oracle.deterministic:
        raise PreconditionError("derandomization needs a deterministic oracle")
    bound = Fraction(1, len(p.theta))
    ev = evaluate(p, s)
    if ev.max_error >= bound:
        raise PreconditionError(
            f"worst-case error {ev.max_error} is not below 1/|theta| = {bound}")
    for (w, t), atom_ev in zip(s.atoms, evaluate_atoms(p, s)):
        if atom_ev.max_error == 0:
            return t
    raise AssertionError("union bound violated: no zero-error atom found")


def canonicalize(t: Tree) -> Tree:
    """Collapse queries whose children are all the same leaf, bottom-up.

    The collapsed query paid a call without affecting the output, so the error
    vector is unchanged and the stopping time can only shrink.
    """
    memo: dict[int, tuple] = {}

    def go(node):
        key = id(node)
        if key in memo:
            return memo[key][1]
        if isinstance(node, Leaf):
            out = node
        else:
            kids = tuple(go(c) for c in node.children)
            first = kids[0]
            if isinstance(first, Leaf) and all(k == first for k in kids[1:]):
                out = first
            elif all(a is b for a, b in zip(kids, node.children)):
                out = node
            else:
                out = Query(node.x, kids)
        memo[key] = (node, out)
        return out

    return go(t)
