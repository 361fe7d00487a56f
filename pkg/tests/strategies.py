"""Hypothesis generators for small random problems and strategies."""

from fractions import Fraction as F

from hypothesis import strategies as st

from oracle_complexity.model import OutcomeSpace, Oracle, Prior, Problem, TargetFunction, ensure_valid
from oracle_complexity.strategy import Leaf, Query, RandomizedStrategy

OUTCOMES = ("a", "b", "c")


@st.composite
def distributions(draw, size, allow_zero=True):
    lo = 0 if allow_zero else 1
    raw = draw(st.lists(st.integers(lo, 4), min_size=size, max_size=size).filter(lambda r: sum(r) > 0))
    total = sum(raw)
    return tuple(F(v, total) for v in raw)


@st.composite
def problems(draw, max_theta=4, max_x=2, max_y=2, prior=True):
    n_theta = draw(st.integers(1, max_theta))
    n_x = draw(st.integers(1, max_x))
    n_y = draw(st.integers(1, max_y))
    n_o = draw(st.integers(1, 3))
    theta = tuple(f"t{i}" for i in range(n_theta))
    inputs = tuple(f"x{i}" for i in range(n_x))
    answers = tuple(f"y{i}" for i in range(n_y))
    labels = OUTCOMES[:n_o]
    kernel = tuple(tuple(draw(distributions(n_y)) for _ in inputs) for _ in theta)
    accept = tuple(frozenset(draw(st.sets(st.sampled_from(labels), min_size=1))) for _ in theta)
    mu = Prior(draw(distributions(n_theta))) if prior else None
    return ensure_valid(Problem(theta, Oracle(inputs, answers, kernel), OutcomeSpace(labels),
                                TargetFunction(accept), mu))


def trees(p, depth):
    leaves = st.sampled_from([Leaf(o) for o in p.outcomes.labels])
    if depth == 0:
        return leaves
    sub = trees(p, depth - 1)
    queries = st.builds(lambda x, kids: Query(x, tuple(kids)), st.sampled_from(p.inputs),
                        st.lists(sub, min_size=len(p.answers), max_size=len(p.answers)))
    return st.one_of(leaves, queries)


@st.composite
def mixtures(draw, p, depth=2, max_atoms=3):
    k = draw(st.integers(1, max_atoms))
    ts = [draw(trees(p, depth)) for _ in range(k)]
    return RandomizedStrategy(tuple(zip(draw(distributions(k, allow_zero=False)), ts)))


@st.composite
def problem_and_mixture(draw, depth=2, **kw):
    p = draw(problems(**kw))
    return p, draw(mixtures(p, depth))
