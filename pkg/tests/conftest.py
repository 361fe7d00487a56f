from fractions import Fraction as F

import pytest

from oracle_complexity.instances import and2_problem, bit_problem, noisy_problem, xor2_problem
from oracle_complexity.model import DUMMY_INPUT
from oracle_complexity.strategy import Leaf, Query

L0, L1 = Leaf("0"), Leaf("1")

# read bit 1; on 0 answer 0, else read bit 2 and echo it
AND2_OPT = Query("1", (L0, Query("2", (L0, L1))))
BIT_QUERY = Query(DUMMY_INPUT, (L0, L1))


def sample(depth: int, votes=()):
    """Fixed-length majority vote on the sampling oracle: ``depth`` samples, ties to "0"."""
    if depth == 0:
        return L1 if sum(votes) * 2 > len(votes) else L0
    return Query(DUMMY_INPUT, (sample(depth - 1, votes + (0,)), sample(depth - 1, votes + (1,))))


def early_majority(votes=()):
    """Two-of-three majority that stops once two samples agree."""
    if votes.count(0) == 2:
        return L0
    if votes.count(1) == 2:
        return L1
    return Query(DUMMY_INPUT, (early_majority(votes + (0,)), early_majority(votes + (1,))))


@pytest.fixture
def bit():
    return bit_problem()


@pytest.fixture
def noisy():
    return noisy_problem(F(1, 4))


@pytest.fixture
def and2():
    return and2_problem()


@pytest.fixture
def xor2():
    return xor2_problem()
