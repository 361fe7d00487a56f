from fractions import Fraction as F

import pytest

from conftest import AND2_OPT, BIT_QUERY, L0, L1, sample
from oracle_complexity.constructions import (
    Budget,
    chebyshev_budget,
    continuity_weight,
    embed_coordinate,
    filter_posterior,
    k_for_alpha,
    mix,
    posterior_table,
    repeat_n,
    truncate,
)
from oracle_complexity.errors import PreconditionError
from oracle_complexity.exact import sqrt
from oracle_complexity.model import Prior, product_problem
from oracle_complexity.strategy import (
    Leaf,
    Query,
    RandomizedStrategy,
    as_strategy,
    evaluate,
    mu_aggregates,
    mu_error,
    mu_expectation,
    strategy_depth,
    tail_mass,
)


def pc(p, n):
    return product_problem(p, n, "per-coordinate")


def test_repeat_once_is_identity(and2):
    a = evaluate(and2, AND2_OPT)
    r = repeat_n(AND2_OPT, 1)
    b = evaluate(pc(and2, 1), r)
    assert a.components == b.components and a.cost_dist == b.cost_dist


def test_repeat_bit_query(bit):
    p = pc(bit, 2)
    ev = evaluate(p, repeat_n(BIT_QUERY, 2))
    assert ev.depth == 2
    assert mu_error(ev, p.prior) == (0, 0)
    assert mu_expectation(ev, p.prior) == 2


def test_repeat_and2_optimal(and2):
    p = pc(and2, 2)
    assert mu_expectation(evaluate(p, repeat_n(AND2_OPT, 2)), p.prior) == 3


def test_repeat_four_times_stopping_law(and2):
    p = pc(and2, 4)
    ev = evaluate(p, repeat_n(AND2_OPT, 4))
    agg = mu_aggregates(p, ev)
    assert (agg.expectation, agg.variance, ev.depth) == (6, 1, 8)
    # the number of second reads is Binomial(4, 1/2)
    assert tail_mass(ev, 6, p.prior) == F(5, 16)


@pytest.mark.parametrize("mode", ["average", 1, 2, 3])
def test_embed_inverts_repeat(noisy, mode):
    s = RandomizedStrategy.of([(F(1, 3), sample(3)), (F(2, 3), Query("⊥", (L0, sample(1))))])
    out = embed_coordinate(noisy, repeat_n(s, 3), 3, mode)
    assert evaluate(noisy, out) == evaluate(noisy, s)


def test_embed_average_halves_cost(bit):
    p = pc(bit, 2)
    s2 = repeat_n(BIT_QUERY, 2)
    out = embed_coordinate(bit, s2, 2, "average")
    assert mu_expectation(evaluate(bit, out), bit.prior) == mu_expectation(evaluate(p, s2), p.prior) / 2 == 1


def test_embed_fixed_coordinate_folds_simulated_answers(noisy):
    # reads coordinate 1, then coordinate 2 only if the first answer was 1
    s = Query((1, "⊥"), (Leaf(("0", "0")),
                         Query((2, "⊥"), (Leaf(("1", "0")), Leaf(("1", "1"))))))
    out = embed_coordinate(noisy, s, 2, 2, Prior((F(1), F(0))))
    # filler theta = "0": the simulated first answer is 1 with probability 1/4
    ws = {t: w for w, t in out.atoms}
    assert ws[Leaf("0")] == F(3, 4)
    assert ws[Query("⊥", (Leaf("0"), Leaf("1")))] == F(1, 4)
    assert mu_expectation(evaluate(noisy, out), noisy.prior) == F(1, 4)


def test_embed_rejects_bad_fillers(bit):
    with pytest.raises(PreconditionError):
        embed_coordinate(bit, repeat_n(BIT_QUERY, 2), 2, "average", [F(1, 3), F(1, 3)])
    with pytest.raises(PreconditionError):
        embed_coordinate(bit, repeat_n(BIT_QUERY, 2), 2, 3)


def test_chebyshev_budget():
    assert chebyshev_budget(6, 1, 2) == Budget(8, F(1, 4))
    k = k_for_alpha(F(1, 16))
    assert k == 4
    assert chebyshev_budget(6, 1, k).certificate == F(1, 16)
    assert chebyshev_budget(F(7, 2), 0, 3) == Budget(4, F(1, 9))
    # irrational sigma and k: ceil(5 + sqrt(2) * sqrt(3)) = ceil(5 + 2.449...) = 8
    assert chebyshev_budget(5, sqrt(2), sqrt(3)).max_calls == 8


def test_truncate(and2):
    assert truncate(AND2_OPT, Budget(5), problem=and2) == AND2_OPT
    assert truncate(AND2_OPT, Budget(0), "1") == Leaf("1")
    p = pc(and2, 4)
    rs = repeat_n(AND2_OPT, 4)
    full = evaluate(p, rs)
    cut = evaluate(p, truncate(rs, Budget(6), problem=p))
    tail = tail_mass(full, 6)
    assert cut.depth <= 6
    for t in range(len(p.theta)):
        for c in range(4):
            assert cut.components[t][c] - full.components[t][c] <= tail[t]
    assert tail_mass(full, 6, p.prior) == F(5, 16) <= F(1, 1)


def test_mix(bit):
    assert as_strategy(mix(L0, L1, 1)) == as_strategy(L0)
    ev = evaluate(bit, mix(L0, L1, F(1, 2)))
    assert ev.err == (F(1, 2), F(1, 2))
    w = continuity_weight(F(1, 5), F(3, 10))
    assert w == F(1, 2)
    assert w * F(3, 10) + (1 - w) * F(1, 10) == F(1, 5)


def test_posterior_table(bit, noisy, and2):
    assert all(r.perr == 0 for r in posterior_table(and2, AND2_OPT))
    (rec,) = posterior_table(bit, L0)
    assert rec.posterior == bit.prior.weights and rec.perr == F(1, 2)
    recs = posterior_table(noisy, sample(1))
    assert len(recs) == 2 and all(r.perr == F(1, 4) for r in recs)
    with pytest.raises(PreconditionError):
        posterior_table(bit.with_prior(None), L0)


def test_filter_keeps_zero_error_strategy(and2):
    res = filter_posterior(and2, AND2_OPT, 0, AND2_OPT, alpha=0)
    assert res.strategy == as_strategy(AND2_OPT)
    assert res.grafted_mass == 0 and res.error == 0


def test_filter_and2_example(and2):
    s = mix(AND2_OPT, L0, F(21, 25))
    res = filter_posterior(and2, s, F(1, 25), AND2_OPT, alpha=0)
    assert res.error == 0
    assert res.cost <= mu_expectation(evaluate(and2, s), and2.prior) + F(1, 5) * F(3, 2)
    assert res.cost_bound == F(39, 25) and res.grafted_mass == F(4, 25)
    assert res.cost_ok and res.markov_ok and res.dichotomy_ok and res.error_ok


def test_filter_precondition(bit):
    with pytest.raises(PreconditionError):
        filter_posterior(bit, L0, F(1, 4), BIT_QUERY)
