import json
from fractions import Fraction as F

import pytest

from conftest import AND2_OPT
from oracle_complexity.errors import FormatError, ProblemError
from oracle_complexity.formats import (
    dumps,
    frontier_csv,
    game_to_json,
    loads,
    problem_from_json,
    problem_to_json,
    strategy_from_json,
    strategy_to_json,
)
from oracle_complexity.instances import BUILTINS
from oracle_complexity.model import product_problem
from oracle_complexity.solver import matrix_game, randomized_value
from oracle_complexity.strategy import Leaf, RandomizedStrategy, evaluate


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_problem_round_trip(name):
    p = BUILTINS[name]()
    q = problem_from_json(loads(dumps(problem_to_json(p))))
    assert (q.theta, q.inputs, q.answers, q.outcomes.labels) == (p.theta, p.inputs, p.answers, p.outcomes.labels)
    assert q.oracle.kernel == p.oracle.kernel and q.target.accept == p.target.accept and q.prior == p.prior


def test_product_round_trip(and2):
    p = product_problem(and2.with_prior(["1/2", "1/4", "1/8", "1/8"]), 2, "per-coordinate")
    q = problem_from_json(loads(dumps(problem_to_json(p))))
    assert q.theta == p.theta and q.semantics == p.semantics and q.prior == p.prior
    doc = problem_to_json(p)
    assert "prior" not in doc and doc["product"]["n"] == 2


def test_fraction_strings_are_the_wire_format(noisy):
    doc = problem_to_json(noisy)
    assert doc["kernel"]["0"]["⊥"] == ["3/4", "1/4"]
    doc["kernel"]["0"]["⊥"] = [0.75, 0.25]
    with pytest.raises(FormatError):
        problem_from_json(doc)


@pytest.mark.parametrize("mutate, err", [
    (lambda d: d.pop("kernel"), FormatError),
    (lambda d: d["kernel"].pop("1"), FormatError),
    (lambda d: d["kernel"]["1"].__setitem__("⊥", ["1/2", "1/3"]), ProblemError),
    (lambda d: d["target"].__setitem__("1", ["7"]), ProblemError),
    (lambda d: d.__setitem__("prior", ["1/2", "x"]), FormatError),
])
def test_bad_problem_documents(bit, mutate, err):
    doc = problem_to_json(bit)
    mutate(doc)
    with pytest.raises(err):
        problem_from_json(doc)


def test_strategy_round_trip(and2):
    s = RandomizedStrategy.of([(F(2, 3), AND2_OPT), (F(1, 3), Leaf("0"))])
    doc = strategy_to_json(s)
    assert doc["atoms"][0]["weight"] == "2/3"
    back = strategy_from_json(loads(dumps(doc)))
    assert evaluate(and2, back) == evaluate(and2, s)
    assert strategy_from_json(strategy_to_json(AND2_OPT)) == AND2_OPT


def test_tuple_labels_survive(bit):
    p = product_problem(bit, 2)
    t = Leaf(("0", "1"))
    assert strategy_from_json(json.loads(json.dumps(strategy_to_json(t)))) == t


@pytest.mark.parametrize("doc", [[], {"query": "1"}, {"atoms": [{"weight": "1/2"}]},
                                 {"atoms": [{"weight": "1/2", "tree": {"leaf": "0"}}]}, {"nope": 1}])
def test_bad_strategy_documents(doc):
    with pytest.raises(FormatError):
        strategy_from_json(doc)


def test_frontier_csv():
    assert frontier_csv(((F(0), F(1)), (F(1, 2), F(0)))) == "epsilon,expected_cost\n0,1\n1/2,0\n"
    assert frontier_csv(((F(0), F(3, 2)),), decimal=2) == "epsilon,expected_cost\n0.00,1.50\n"


def test_game_json_is_sorted_and_exact(and2):
    text = dumps(game_to_json(randomized_value(and2, 2, F(1, 8))))
    doc = json.loads(text)
    assert doc["primal_value"] == "3/2" and doc["gap"] == "0"
    assert list(doc) == sorted(doc)
    assert game_to_json(matrix_game([[3, 1], [2, 4]]))["dual_prior"] == ["3/4", "1/4"]


def test_invalid_json():
    with pytest.raises(FormatError):
        loads("{")
