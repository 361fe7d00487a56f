"""Small built-in problems used throughout the tests and the CLI."""

from __future__ import annotations

from fractions import Fraction

from .exact import frac
from .model import Problem, make_estimation_problem, make_pac_problem, make_query_problem


def truth_table(fn, ell: int) -> dict[str, str]:
    table = {}
    for k in range(2 ** ell):
        s = format(k, f"0{ell}b")
        table[s] = str(int(fn(tuple(int(c) for c in s))))
    return table


def AND(ell: int = 2) -> dict[str, str]:
    return truth_table(all, ell)


def OR(ell: int = 2) -> dict[str, str]:
    return truth_table(any, ell)


def XOR(ell: int = 2) -> dict[str, str]:
    return truth_table(lambda bits: sum(bits) % 2, ell)


def noisy_problem(flip="1/4") -> Problem:
    """Identify a bit from one sample that is flipped with probability ``flip``."""
    q = frac(flip)
    kernels = {"0": (1 - q, q), "1": (q, 1 - q)}
    return make_estimation_problem(kernels, {"0": {"0"}, "1": {"1"}}, answers=("0", "1"),
                                   outcomes=("0", "1"))


def bit_problem() -> Problem:
    """Noiseless identification of a uniform bit: one query reveals it."""
    return noisy_problem(Fraction(0))


def and2_problem() -> Problem:
    return make_query_problem(AND(2))


def xor2_problem() -> Problem:
    return make_query_problem(XOR(2))


def or3_problem() -> Problem:
    return make_query_problem(OR(3))


def coin_bias_problem() -> Problem:
    """Three hypotheses on a coin's bias, one flip per call."""
    kernels = {"1/4": ("3/4", "1/4"), "1/2": ("1/2", "1/2"), "3/4": ("1/4", "3/4")}
    targets = {t: {t} for t in kernels}
    return make_estimation_problem(kernels, targets, answers=("T", "H"))


def pac_dictators_problem(delta="0") -> Problem:
    """Two dictator concepts on X = {a, b} under the uniform distribution."""
    return make_pac_problem(
        ("a", "b"),
        {"x_a": {"a": 1, "b": 0}, "x_b": {"a": 0, "b": 1}},
        {"uniform": {"a": "1/2", "b": "1/2"}},
        delta,
    )


BUILTINS = {
    "bit": bit_problem,
    "noisy": noisy_problem,
    "and2": and2_problem,
    "xor2": xor2_problem,
    "or3": or3_problem,
    "coin": coin_bias_problem,
    "pac": pac_dictators_problem,
}
