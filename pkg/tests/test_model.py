from fractions import Fraction as F

import pytest

from oracle_complexity.errors import PreconditionError, ProblemError
from oracle_complexity.instances import AND, OR, XOR, coin_bias_problem, pac_dictators_problem
from oracle_complexity.model import (
    JOINT,
    OutcomeSpace,
    Oracle,
    PerCoordinate,
    Prior,
    Problem,
    TargetFunction,
    ensure_valid,
    make_estimation_problem,
    make_pac_problem,
    make_query_problem,
    product_problem,
    smooth_prior,
    validate_problem,
)


def test_bit_is_valid(bit):
    assert validate_problem(bit).ok


def test_row_sum_violation_reported(bit):
    bad = Problem(bit.theta, Oracle(bit.inputs, bit.answers, (((F(1, 2), F(2, 5)),), ((F(0), F(1)),))),
                  bit.outcomes, bit.target, bit.prior)
    issues = list(validate_problem(bad))
    assert any("row sum ≠ 1" in i for i in issues)
    with pytest.raises(ProblemError):
        ensure_valid(bad)


def test_unknown_outcome_reported(bit):
    bad = Problem(bit.theta, bit.oracle, bit.outcomes,
                  TargetFunction((frozenset({"0"}), frozenset({"2"}))), bit.prior)
    assert any("unknown outcome label" in i for i in validate_problem(bad))


def test_empty_target_needs_flag(bit):
    target = TargetFunction((frozenset({"0"}), frozenset()))
    bad = Problem(bit.theta, bit.oracle, bit.outcomes, target, bit.prior)
    assert not validate_problem(bad).ok
    ok = Problem(bit.theta, bit.oracle, bit.outcomes, target, bit.prior, infeasible_at_zero=True)
    assert validate_problem(ok).ok


def test_prior_must_sum_to_one(bit):
    assert not validate_problem(bit.with_prior(Prior((F(1, 2), F(1, 3))))).ok


def test_product_n1_joint_is_bit(bit):
    p = product_problem(bit, 1, JOINT)
    assert len(p.theta) == 2 and len(p.inputs) == 1
    assert [row for rows in p.oracle.kernel for row in rows] == \
        [row for rows in bit.oracle.kernel for row in rows]


def test_product_bit_per_coordinate(bit):
    p = product_problem(bit, 2, "per-coordinate")
    assert len(p.theta) == 4
    assert p.prior.weights == (F(1, 4),) * 4
    assert p.semantics == PerCoordinate(2)
    assert p.n_components == 2


def test_product_and2_joint(and2):
    p = product_problem(and2, 2, JOINT)
    assert len(p.theta) == 16
    assert set(p.inputs) == {(c, i) for c in (1, 2) for i in ("1", "2")}
    # joint accept: every coordinate correct
    t = p.theta_index[("11", "01")]
    ok = [o for o, w in zip(p.outcomes.labels, p.wrong[t]) if not w[0]]
    assert ok == [("1", "0")]


def test_product_prior_is_product_measure(and2):
    skew = and2.with_prior([F(1, 2), F(1, 4), F(1, 8), F(1, 8)])
    p = product_problem(skew, 2)
    for (a, b), w in zip(p.theta_parts, p.prior.weights):
        assert w == skew.prior[a] * skew.prior[b]


def test_product_rejects_n0(bit):
    with pytest.raises(PreconditionError):
        product_problem(bit, 0)


def test_smooth_prior_examples():
    assert smooth_prior(Prior((F(1), F(0))), F(1, 2)).weights == (F(7, 8), F(1, 8))
    u = Prior.uniform(3)
    assert smooth_prior(u, F(1, 3)) == u
    s = smooth_prior(Prior((F(3, 4), F(1, 4))), F(1, 4))
    assert s.weights == (F(23, 32), F(9, 32))
    assert min(s.weights) >= F(1, 4) / 4


@pytest.mark.parametrize("delta", [0, 1, F(3, 2)])
def test_smooth_prior_rejects_delta(delta):
    with pytest.raises(PreconditionError):
        smooth_prior(Prior.uniform(2), delta)


def test_query_problems():
    p = make_query_problem(AND(2))
    assert len(p.theta) == 4 and p.oracle.deterministic
    assert all(sorted(row) == [0, 1] for rows in p.oracle.kernel for row in rows)
    assert len(make_query_problem(XOR(2), promise=["00", "11"]).theta) == 2
    q = make_query_problem(OR(3))
    assert len(q.theta) == 8 and len(q.inputs) == 3
    with pytest.raises(PreconditionError):
        make_query_problem(XOR(2), promise=[])


def test_estimation_problems(noisy):
    assert noisy.oracle.kernel[0][0] == (F(3, 4), F(1, 4))
    bitlike = make_estimation_problem({"0": ["1", "0"], "1": ["0", "1"]}, {"0": ["0"], "1": ["1"]},
                                      ["0", "1"])
    assert bitlike.oracle.deterministic
    coin = coin_bias_problem()
    assert len(coin.theta) == 3 and len(coin.answers) == 2
    with pytest.raises(ProblemError):
        make_estimation_problem({"0": ["1/2", "2/5"]}, {"0": ["0"]}, ["0", "1"])


def test_pac_examples():
    p = pac_dictators_problem("0")
    assert all(len(a) == 1 for a in p.target.accept)
    p = pac_dictators_problem("1")
    assert all(a == frozenset(p.outcomes.labels) for a in p.target.accept)
    X = ("a", "b", "c")
    concepts = {c: [int(x == c) for x in X] for c in X}
    q = make_pac_problem(X, concepts, {"u": ["1/3"] * 3}, F(1, 3))
    # singleton indicators disagree on two points, mass 2/3 > 1/3
    for (h, _), acc in zip(q.theta, q.target.accept):
        assert acc == frozenset({h})
    r = make_pac_problem(X, concepts, {"u": ["1/3"] * 3}, F(2, 3))
    assert all(len(a) == 3 for a in r.target.accept)


def test_pac_rejects_bad_distribution():
    with pytest.raises(ProblemError):
        make_pac_problem(("a",), {"c": [1]}, {"d": ["1/2"]}, 0)
