from fractions import Fraction as F

import pytest

from conftest import AND2_OPT, sample
from oracle_complexity.errors import PreconditionError
from oracle_complexity.instances import AND, XOR
from oracle_complexity.verify import (
    FAIL,
    PASS,
    SKIP,
    CheckReport,
    check_additivity,
    check_continuity,
    check_derandomization,
    check_direct_sum,
    check_minimax,
    check_truncation,
)


def test_report_status_logic():
    rep = CheckReport("t", "i")
    assert rep.status == SKIP
    rep.skip("a", "hypothesis fails")
    assert rep.status == SKIP
    rep.claim("b", 1, "<=", 2)
    assert rep.status == PASS
    rep.claim("c", 3, "<=", 2)
    assert rep.status == FAIL and [c.label for c in rep.failures] == ["c"]
    rep.claim("d", None, "<=", 2)
    assert rep.get("d").holds is None
    doc = rep.to_dict()
    assert doc["status"] == FAIL and doc["claims"][1]["lhs"] == "1"


def test_additivity_bit(bit):
    rep = check_additivity(bit, F(1, 8), 2, 1)
    assert rep.passed
    assert rep.get("D additivity: D([P,eps]^n) = n*D(P)").lhs == F(3, 2)
    assert rep.get("R additivity: R([P,eps]^n) = n*R(P)").lhs == F(3, 2)


def test_additivity_n1_is_trivial(and2):
    rep = check_additivity(and2, F(1, 8), 1, 2)
    assert rep.passed
    assert rep.measurements["D_product"] == rep.measurements["D_single_T"]


def test_additivity_and2_zero_error(and2):
    rep = check_additivity(and2, 0, 2, 2, randomized=False)
    assert rep.passed and rep.measurements["D_product"] == 3


def test_continuity_bit(bit):
    rep = check_continuity(bit, [F(1, 25)], 1)
    assert rep.passed
    c = rep.get("filter inequality eps=1/25")
    assert (c.lhs, c.rhs) == (1, F(28, 25))


def test_continuity_degenerate_alpha(and2):
    rep = check_continuity(and2, [F(1, 25)], 2, alpha=F(1, 25), construct=False)
    c = rep.get("filter inequality eps=1/25")
    assert c.holds and c.lhs == rep.get("filter inequality eps=1/25").lhs


def test_continuity_skips_large_eps(bit):
    rep = check_continuity(bit, [F(1, 4), F(1, 3)], 1)
    assert rep.get("filter inequality eps=1/4").holds is None
    assert rep.get("filter inequality eps=1/3").holds is None
    assert rep.status == PASS  # the structural and mixing claims still hold


def test_minimax_examples(bit, noisy, and2):
    assert check_minimax(bit, 0, 1).passed
    assert check_minimax(noisy, F(1, 4), 2).passed
    rep = check_minimax(and2, F(1, 10), 2)
    assert rep.passed and rep.measurements["primal"] == F(8, 5)


def test_minimax_infeasible_reports_both_sides(noisy):
    rep = check_minimax(noisy, 0, 3)
    assert rep.passed and "infeasible" in rep.measurements


def test_direct_sum_bit(bit):
    rep = check_direct_sum(bit, F(1, 8), 2, 1)
    assert rep.passed
    assert rep.get("(a) n*C(eps) <= C([P,eps]^n)").lhs == F(3, 2)
    assert rep.get("(c) C([P^n,eps]) <= n*C(eps/n)").rhs == F(7, 4)


def test_direct_sum_n1(bit):
    rep = check_direct_sum(bit, F(1, 8), 1, 1)
    assert rep.passed
    a = rep.get("(a) C([P,eps]^n) <= C([P^n,eps])")
    assert a.lhs == a.rhs


def test_direct_sum_randomized(bit):
    rep = check_direct_sum(bit, F(1, 1024), 2, 1, kind="randomized")
    assert rep.passed
    lo = rep.get("(d) c0*n*C(0) <= n*C(eps)")
    assert lo.lhs == 1


def test_direct_sum_preconditions(bit):
    assert check_direct_sum(bit, F(1, 4), 2, 1).status == SKIP
    assert check_direct_sum(bit, F(1, 8), 2, 1, kind="randomized").status == SKIP
    assert check_direct_sum(bit.with_prior([1, 0]), F(1, 8), 2, 1).status == SKIP
    with pytest.raises(PreconditionError):
        check_direct_sum(bit, F(1, 8), 2, 1, kind="quantum")


def test_truncation_and2(and2):
    rep = check_truncation(and2, AND2_OPT, 4, F(1, 4))
    assert rep.passed and rep.measurements["budget"] == 8


def test_truncation_alpha_one(and2):
    rep = check_truncation(and2, AND2_OPT, 2, 1)
    assert rep.passed and rep.measurements["k"] == 1


def test_truncation_noisy_majority(noisy):
    rep = check_truncation(noisy, sample(3), 3, F(1, 9))
    assert rep.passed and rep.measurements["tail_mass"] == 0 and rep.measurements["budget"] == 9


def test_truncation_randomized(noisy):
    rep = check_truncation(noisy.with_prior(None), sample(3), 2, F(1, 4))
    assert rep.passed and rep.theorem.endswith("(randomized)")


def test_derandomization():
    for f in (AND(2), XOR(2)):
        rep = check_derandomization(f, F(1, 5))
        assert rep.passed and rep.measurements["R_eps"] == rep.measurements["R_zero"] == 2
    assert check_derandomization(AND(2), 0).passed
    assert check_derandomization(AND(2), F(1, 4)).status == SKIP


def test_reports_are_reproducible(bit):
    a = check_direct_sum(bit, F(1, 8), 2, 1).to_dict()
    b = check_direct_sum(bit, F(1, 8), 2, 1).to_dict()
    assert a == b
