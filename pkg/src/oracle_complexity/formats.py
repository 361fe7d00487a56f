"""File formats: problems and strategies as JSON, frontiers as CSV, reports as JSON.

Probabilities travel as fraction strings ("3/4"). Labels are JSON strings or
numbers; tuple labels (PAC parameters, product outcomes) are JSON lists. Maps
keyed by a label use the label's key form, with tuple parts joined by ",".
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Mapping

from .errors import FormatError, ProblemError
from .exact import Surd, fmt, fmt_decimal, frac
from .model import (
    SINGLE_KIND,
    OutcomeSpace,
    Oracle,
    Prior,
    Problem,
    Semantics,
    TargetFunction,
    ensure_valid,
    product_problem,
)
from .strategy import Evaluation, Leaf, Query, RandomizedStrategy, Strategy, as_strategy

# -- labels ---------------------------------------------------------------------------------


def label_out(v) -> Any:
    if isinstance(v, tuple):
        return [label_out(x) for x in v]
    return v


def label_in(v) -> Any:
    if isinstance(v, list):
        return tuple(label_in(x) for x in v)
    if isinstance(v, (str, int)) and not isinstance(v, bool):
        return v
    raise FormatError(f"unsupported label {v!r}")


def label_key(v) -> str:
    if isinstance(v, tuple):
        return ",".join(label_key(x) for x in v)
    return str(v)


def _fraction(v, what: str) -> Fraction:
    try:
        return frac(v)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"{what}: {exc}") from None


def _lookup(mapping: Mapping, label, what: str):
    key = label_key(label)
    if key not in mapping:
        raise FormatError(f"{what} has no entry for {key!r}")
    return mapping[key]


# -- problems ----------------------------------------------------------------------------------


def problem_to_json(p: Problem) -> dict:
    if p.base is not None:
        out = {"product": {"base": problem_to_json(p.base), "n": p.semantics.n,
                           "semantics": p.semantics.kind}}
        default = product_problem(p.base, p.semantics.n, p.semantics).prior
        if p.prior != default:
            out["prior"] = None if p.prior is None else [fmt(w) for w in p.prior]
        return out
    rank = p.outcome_index
    out = {
        "theta": [label_out(t) for t in p.theta],
        "inputs": [label_out(x) for x in p.inputs],
        "answers": [label_out(y) for y in p.answers],
        "outcomes": [label_out(o) for o in p.outcomes.labels],
        "kernel": {
            label_key(t): {label_key(x): [fmt(v) for v in row] for x, row in zip(p.inputs, rows)}
            for t, rows in zip(p.theta, p.oracle.kernel)
        },
        "target": {
            label_key(t): [label_out(o) for o in sorted(acc, key=lambda o: (rank.get(o, len(rank)), repr(o)))]
            for t, acc in zip(p.theta, p.target.accept)
        },
        "semantics": p.semantics.kind,
    }
    if p.prior is not None:
        out["prior"] = [fmt(w) for w in p.prior]
    return out


def problem_from_json(d: Mapping) -> Problem:
    if not isinstance(d, Mapping):
        raise FormatError("problem document must be an object")
    if "product" in d:
        spec = d["product"]
        try:
            base = problem_from_json(spec["base"])
            p = product_problem(base, int(spec["n"]), spec.get("semantics", "joint"))
        except KeyError as exc:
            raise FormatError(f"product is missing {exc}") from None
        if "prior" in d:
            p = p.with_prior(None if d["prior"] is None else
                             [_fraction(w, "prior") for w in d["prior"]])
        return ensure_valid(p)
    missing = [k for k in ("theta", "inputs", "answers", "outcomes", "kernel", "target") if k not in d]
    if missing:
        raise FormatError(f"problem is missing field {missing[0]!r}")
    theta = tuple(label_in(t) for t in d["theta"])
    inputs = tuple(label_in(x) for x in d["inputs"])
    answers = tuple(label_in(y) for y in d["answers"])
    outcomes = tuple(label_in(o) for o in d["outcomes"])
    kernel = []
    for t in theta:
        rows = _lookup(d["kernel"], t, "kernel")
        if not isinstance(rows, Mapping):
            raise FormatError(f"kernel entry for {label_key(t)!r} must map inputs to probability lists")
        kernel.append(tuple(tuple(_fraction(v, "kernel") for v in _lookup(rows, x, f"kernel[{label_key(t)}]"))
                            for x in inputs))
    accept = tuple(frozenset(label_in(o) for o in _lookup(d["target"], t, "target")) for t in theta)
    prior = d.get("prior")
    if prior is not None:
        prior = Prior(tuple(_fraction(w, "prior") for w in prior))
    semantics = Semantics.parse(d.get("semantics", SINGLE_KIND))
    if semantics.kind != SINGLE_KIND:
        raise FormatError("only single-instance problems are given directly; use a product block")
    p = Problem(theta, Oracle(inputs, answers, tuple(kernel)), OutcomeSpace(outcomes),
                TargetFunction(accept), prior, infeasible_at_zero=any(not a for a in accept))
    return ensure_valid(p)


# -- strategies ------------------------------------------------------------------------------


def tree_to_json(t) -> dict:
    if isinstance(t, Leaf):
        return {"leaf": label_out(t.out)}
    return {"query": label_out(t.x), "children": [tree_to_json(c) for c in t.children]}


def tree_from_json(d):
    if not isinstance(d, Mapping):
        raise FormatError("strategy node must be an object")
    if "leaf" in d:
        return Leaf(label_in(d["leaf"]))
    if "query" in d:
        kids = d.get("children")
        if not isinstance(kids, list) or not kids:
            raise FormatError("query node needs a nonempty children list")
        return Query(label_in(d["query"]), tuple(tree_from_json(c) for c in kids))
    raise FormatError("strategy node needs 'leaf' or 'query'")


def strategy_to_json(s: Strategy) -> dict:
    if isinstance(s, (Leaf, Query)):
        return tree_to_json(s)
    return {"atoms": [{"weight": fmt(w), "tree": tree_to_json(t)} for w, t in s.atoms]}


def strategy_from_json(d) -> Strategy:
    if isinstance(d, Mapping) and "atoms" in d:
        atoms = []
        for a in d["atoms"]:
            if "weight" not in a or "tree" not in a:
                raise FormatError("mixture atoms need 'weight' and 'tree'")
            atoms.append((_fraction(a["weight"], "atom weight"), tree_from_json(a["tree"])))
        try:
            return RandomizedStrategy.of(atoms)
        except (ValueError, ProblemError) as exc:
            raise FormatError(str(exc)) from None
    return tree_from_json(d)


# -- results ------------------------------------------------------------------------------------


def _num(v, decimal: int | None = None) -> str:
    if isinstance(v, float):
        return repr(v)
    if decimal is not None:
        return fmt_decimal(v, decimal)
    return fmt(v)


def frontier_csv(vertices, decimal: int | None = None) -> str:
    lines = ["epsilon,expected_cost"]
    lines += [f"{_num(e, decimal)},{_num(c, decimal)}" for e, c in vertices]
    return "\n".join(lines) + "\n"


def evaluation_to_json(p: Problem, ev: Evaluation) -> dict:
    out = {
        "theta": [label_out(t) for t in p.theta],
        "error": [[fmt(v) for v in comp] if ev.per_coordinate else fmt(comp[0])
                  for comp in ev.components],
        "cost_mean": [fmt(v) for v in ev.cost_mean],
        "cost_dist": [[fmt(v) for v in d] for d in ev.cost_dist],
        "depth": ev.depth,
        "max_error": fmt(ev.max_error),
        "max_expected_cost": fmt(max(ev.cost_mean)),
    }
    if p.prior is not None:
        from .strategy import mu_aggregates

        agg = mu_aggregates(p, ev)
        out["prior"] = {
            "error": [fmt(v) for v in agg.error] if ev.per_coordinate else fmt(agg.error),
            "expectation": fmt(agg.expectation),
            "variance": fmt(agg.variance),
        }
    return out


def game_to_json(g) -> dict:
    def show(v):
        return _num(v) if isinstance(v, (int, float, Fraction, Surd)) else v

    prior = g.dual_prior.weights if isinstance(g.dual_prior, Prior) else g.dual_prior
    mixture = (strategy_to_json(g.primal_mixture) if isinstance(g.primal_mixture, RandomizedStrategy)
               else [show(v) for v in g.primal_mixture])
    return {
        "primal_value": show(g.primal_value),
        "dual_value": show(g.dual_value),
        "gap": show(g.gap),
        "epsilon": None if g.epsilon is None else fmt(g.epsilon),
        "depth": g.depth,
        "exact": g.exact,
        "certified": g.certified,
        "dual_prior": [show(v) for v in prior],
        "primal_mixture": mixture,
    }


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from None


def read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return loads(fh.read())
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None


def load_problem(path: str) -> Problem:
    return problem_from_json(read_json(path))


def load_strategy(path: str) -> Strategy:
    return strategy_from_json(read_json(path))
