"""Finite oracle problems: parameter sets, stochastic oracles, targets, priors."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .errors import PreconditionError, ProblemError
from .exact import frac

Label = Hashable

DUMMY_INPUT = "⊥"

SINGLE_KIND = "single"
PER_COORDINATE = "per-coordinate"
JOINT = "joint"


@dataclass(frozen=True)
class Semantics:
    """How errors are counted: one instance, or n instances per coordinate / jointly."""

    kind: str = SINGLE_KIND
    n: int = 1

    @classmethod
    def parse(cls, value) -> "Semantics":
        if isinstance(value, Semantics):
            return value
        if isinstance(value, Mapping):
            return cls(str(value["kind"]), int(value.get("n", 1)))
        text = str(value).lower().replace("_", "-")
        aliases = {"single": SINGLE_KIND, "per-coordinate": PER_COORDINATE,
                   "percoordinate": PER_COORDINATE, "coordinate": PER_COORDINATE,
                   "joint": JOINT}
        if text not in aliases:
            raise ProblemError(f"unknown error semantics {value!r}")
        return cls(aliases[text])

    @property
    def per_coordinate(self) -> bool:
        return self.kind == PER_COORDINATE


SINGLE = Semantics()


def PerCoordinate(n: int) -> Semantics:
    return Semantics(PER_COORDINATE, n)


def Joint(n: int) -> Semantics:
    return Semantics(JOINT, n)


@dataclass(frozen=True)
class OutcomeSpace:
    labels: tuple
    values: tuple | None = None

    def __len__(self):
        return len(self.labels)


@dataclass(frozen=True, eq=False)
class Oracle:
    """Stochastic oracle; ``kernel[t][x][y]`` is p_theta(y | x) by position."""

    inputs: tuple
    answers: tuple
    kernel: tuple

    @cached_property
    def deterministic(self) -> bool:
        return all(p in (0, 1) for rows in self.kernel for row in rows for p in row)


@dataclass(frozen=True, eq=False)
class TargetFunction:
    """Accepted outcome labels per parameter, by parameter position."""

    accept: tuple


@dataclass(frozen=True)
class Prior:
    weights: tuple

    @classmethod
    def uniform(cls, size: int) -> "Prior":
        return cls(tuple(Fraction(1, size) for _ in range(size)))

    @classmethod
    def point_mass(cls, size: int, index: int) -> "Prior":
        return cls(tuple(Fraction(int(i == index)) for i in range(size)))

    @classmethod
    def of(cls, weights: Iterable) -> "Prior":
        return cls(tuple(frac(w) for w in weights))

    def __len__(self):
        return len(self.weights)

    def __getitem__(self, i):
        return self.weights[i]

    def __iter__(self):
        return iter(self.weights)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, w in enumerate(self.weights) if w > 0)

    @property
    def mu_min(self) -> Fraction:
        return min(w for w in self.weights if w > 0)

    @property
    def nontrivial(self) -> bool:
        return max(self.weights) < 1


@dataclass(frozen=True, eq=False)
class Problem:
    theta: tuple
    oracle: Oracle
    outcomes: OutcomeSpace
    target: TargetFunction
    prior: Prior | None = None
    semantics: Semantics = SINGLE
    base: "Problem | None" = field(default=None, repr=False)
    infeasible_at_zero: bool = False

    # -- index maps -------------------------------------------------------
    @cached_property
    def theta_index(self) -> dict:
        return {t: i for i, t in enumerate(self.theta)}

    @cached_property
    def input_index(self) -> dict:
        return {x: i for i, x in enumerate(self.oracle.inputs)}

    @cached_property
    def answer_index(self) -> dict:
        return {y: i for i, y in enumerate(self.oracle.answers)}

    @cached_property
    def outcome_index(self) -> dict:
        return {o: i for i, o in enumerate(self.outcomes.labels)}

    @property
    def inputs(self) -> tuple:
        return self.oracle.inputs

    @property
    def answers(self) -> tuple:
        return self.oracle.answers

    @property
    def n_components(self) -> int:
        """Number of error components per parameter (n for per-coordinate products)."""
        return self.semantics.n if self.semantics.per_coordinate else 1

    @cached_property
    def theta_parts(self) -> tuple:
        """For products, the base parameter positions of each product parameter."""
        if self.base is None:
            return tuple((i,) for i in range(len(self.theta)))
        m = len(self.base.theta)
        return tuple(itertools.product(range(m), repeat=self.semantics.n))

    @cached_property
    def outcome_parts(self) -> tuple:
        if self.base is None:
            return tuple((i,) for i in range(len(self.outcomes.labels)))
        m = len(self.base.outcomes.labels)
        return tuple(itertools.product(range(m), repeat=self.semantics.n))

    @cached_property
    def wrong(self) -> tuple:
        """``wrong[t][o]``: 0/1 error indicator per component for outcome o at theta t."""
        labels = self.outcomes.labels
        if self.semantics.per_coordinate:
            base = self.base
            base_wrong = [[int(lab not in base.target.accept[t]) for lab in base.outcomes.labels]
                          for t in range(len(base.theta))]
            return tuple(
                tuple(tuple(base_wrong[tp[c]][op[c]] for c in range(len(tp)))
                      for op in self.outcome_parts)
                for tp in self.theta_parts
            )
        return tuple(
            tuple((int(lab not in self.target.accept[t]),) for lab in labels)
            for t in range(len(self.theta))
        )

    @property
    def mu_min(self) -> Fraction:
        if self.prior is None:
            raise PreconditionError("problem has no prior")
        return self.prior.mu_min

    def with_prior(self, prior: Prior | Iterable | None) -> "Problem":
        if prior is not None and not isinstance(prior, Prior):
            prior = Prior.of(prior)
        return Problem(self.theta, self.oracle, self.outcomes, self.target, prior,
                       self.semantics, self.base, self.infeasible_at_zero)

    def with_semantics(self, semantics) -> "Problem":
        """Reinterpret a product's errors (per-coordinate <-> joint)."""
        semantics = Semantics.parse(semantics)
        if self.base is None:
            raise PreconditionError("only product problems switch error semantics")
        semantics = Semantics(semantics.kind, self.semantics.n)
        return Problem(self.theta, self.oracle, self.outcomes, self.target, self.prior,
                       semantics, self.base, self.infeasible_at_zero)

    def __repr__(self):
        return (f"Problem(|theta|={len(self.theta)}, |X|={len(self.inputs)}, "
                f"|Y|={len(self.answers)}, |O|={len(self.outcomes)}, "
                f"semantics={self.semantics.kind}/{self.semantics.n})")


@dataclass
class ValidationReport:
    issues: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def __bool__(self):
        return self.ok

    def __iter__(self):
        return iter(self.issues)


def _distinct(labels) -> bool:
    return len(set(labels)) == len(labels)


def validate_problem(p: Problem) -> ValidationReport:
    """List every violated structural invariant; an empty report means well-formed."""
    report = ValidationReport()
    add = report.issues.append
    n_theta, inputs, answers = len(p.theta), p.oracle.inputs, p.oracle.answers
    if n_theta == 0:
        add("theta is empty")
    if not _distinct(p.theta):
        add("theta labels are not distinct")
    if not p.outcomes.labels:
        add("outcome space is empty")
    if not _distinct(p.outcomes.labels):
        add("outcome labels are not distinct")
    if p.outcomes.values is not None:
        vals = p.outcomes.values
        dims = {len(v) for v in vals}
        if len(vals) != len(p.outcomes.labels):
            add("outcome values do not match labels")
        elif len(dims) > 1 or (dims and min(dims) < 1):
            add("outcome value vectors must share a dimension d >= 1")
    if not inputs or not _distinct(inputs):
        add("oracle inputs must be nonempty and distinct")
    if not answers or not _distinct(answers):
        add("oracle answers must be nonempty and distinct")

    kernel = p.oracle.kernel
    if len(kernel) != n_theta:
        add(f"kernel has {len(kernel)} parameter blocks, expected {n_theta}")
    else:
        for t, rows in enumerate(kernel):
            if len(rows) != len(inputs):
                add(f"kernel block for theta {p.theta[t]!r} has {len(rows)} rows, expected {len(inputs)}")
                continue
            for x, row in enumerate(rows):
                where = f"theta {p.theta[t]!r}, input {inputs[x]!r}"
                if len(row) != len(answers):
                    add(f"kernel row at {where} has length {len(row)}, expected {len(answers)}")
                    continue
                if not all(isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in row):
                    add(f"kernel row at {where} has non-exact entries")
                    continue
                if any(v < 0 or v > 1 for v in row):
                    add(f"kernel row at {where} has entries outside [0, 1]")
                if sum(row) != 1:
                    add(f"row sum ≠ 1 at {where} (sum {sum(row)})")

    accept = p.target.accept
    known = set(p.outcomes.labels)
    if len(accept) != n_theta:
        add(f"target has {len(accept)} entries, expected {n_theta}")
    else:
        for t, acc in enumerate(accept):
            unknown = [lab for lab in acc if lab not in known]
            if unknown:
                add(f"unknown outcome label {unknown[0]!r} in target of theta {p.theta[t]!r}")
            if not acc and not p.infeasible_at_zero:
                add(f"empty target for theta {p.theta[t]!r} without the infeasible-at-zero flag")

    if p.prior is not None:
        w = p.prior.weights
        if len(w) != n_theta:
            add(f"prior has {len(w)} weights, expected {n_theta}")
        elif not all(isinstance(v, (int, Fraction)) for v in w):
            add("prior has non-exact weights")
        else:
            if any(v < 0 for v in w):
                add("prior has negative weights")
            if sum(w) != 1:
                add(f"prior weights sum to {sum(w)}, not 1")
            if not any(v > 0 for v in w):
                add("prior support is empty")

    sem = p.semantics
    if sem.kind not in (SINGLE_KIND, PER_COORDINATE, JOINT):
        add(f"unknown semantics {sem.kind!r}")
    elif sem.kind == SINGLE_KIND:
        if p.base is not None or sem.n != 1:
            add("single semantics cannot carry a product structure")
    else:
        if p.base is None:
            add("per-coordinate/joint semantics require a product built by product_problem")
        elif sem.n < 1 or len(p.base.theta) ** sem.n != n_theta:
            add("product structure does not match |theta|")
    return report


def ensure_valid(p: Problem) -> Problem:
    report = validate_problem(p)
    if not report.ok:
        raise ProblemError("; ".join(report.issues))
    return p


# -- constructions ---------------------------------------------------------

def product_problem(p: Problem, n: int, semantics=JOINT) -> Problem:
    """n independent copies of ``p``; inputs are tagged ``(coordinate, x)`` with coordinates 1..n."""
    semantics = Semantics.parse(semantics)
    if semantics.kind == SINGLE_KIND:
        raise PreconditionError("product semantics must be per-coordinate or joint")
    if p.semantics.kind != SINGLE_KIND:
        raise PreconditionError("product_problem takes a single-instance problem")
    if n < 1:
        raise PreconditionError(f"product needs n >= 1, got {n}")
    ensure_valid(p)
    m = len(p.theta)
    parts = list(itertools.product(range(m), repeat=n))
    theta = tuple(tuple(p.theta[i] for i in tp) for tp in parts)
    inputs = tuple((c + 1, x) for c in range(n) for x in p.oracle.inputs)
    n_x = len(p.oracle.inputs)
    kernel = tuple(
        tuple(p.oracle.kernel[tp[c]][xi] for c in range(n) for xi in range(n_x))
        for tp in parts
    )
    labels = tuple(itertools.product(p.outcomes.labels, repeat=n))
    values = None
    if p.outcomes.values is not None:
        values = tuple(tuple(v for comp in combo for v in comp)
                       for combo in itertools.product(p.outcomes.values, repeat=n))
    accept = tuple(frozenset(itertools.product(*(sorted(p.target.accept[i], key=repr) for i in tp)))
                   for tp in parts)
    prior = None
    if p.prior is not None:
        w = p.prior.weights
        weights = []
        for tp in parts:
            x = Fraction(1)
            for i in tp:
                x *= w[i]
            weights.append(x)
        prior = Prior(tuple(weights))
    return Problem(
        theta=theta,
        oracle=Oracle(inputs, p.oracle.answers, kernel),
        outcomes=OutcomeSpace(labels, values),
        target=TargetFunction(accept),
        prior=prior,
        semantics=Semantics(semantics.kind, n),
        base=p,
        infeasible_at_zero=p.infeasible_at_zero,
    )


def smooth_prior(mu: Prior, delta) -> Prior:
    """Mix ``mu`` with the uniform prior: (1 - delta/2) mu + (delta/2) U."""
    delta = frac(delta)
    if not 0 < delta < 1:
        raise PreconditionError(f"delta must lie in (0, 1), got {delta}")
    k = len(mu.weights)
    if k == 0:
        raise PreconditionError("cannot smooth a prior on an empty parameter set")
    keep, spread = 1 - delta / 2, delta / 2 / k
    return Prior(tuple(keep * w + spread for w in mu.weights))


def _bits(ell: int) -> list[str]:
    return ["".join(b) for b in itertools.product("01", repeat=ell)]


def make_query_problem(f: Mapping | Callable, ell: int | None = None,
                       promise: Iterable[str] | None = None, prior="uniform") -> Problem:
    """Query problem for ``f`` on ``{0,1}^ell``; parameters are bitstrings like ``"01"``.

    ``f`` is a truth table (bitstring -> value) or a callable on a tuple of bits.
    Reading input ``i`` (1-based label ``"i"``) returns bit ``x_i`` with certainty.
    """
    if isinstance(f, Mapping):
        table = {str(k): v for k, v in f.items()}
        if ell is None:
            ell = len(next(iter(table)))
        lookup = lambda s: table[s]
    else:
        if ell is None:
            raise PreconditionError("ell is required when f is a callable")
        lookup = lambda s: f(tuple(int(c) for c in s))
    if ell < 1:
        raise PreconditionError("query problems need ell >= 1")
    if promise is None:
        theta = _bits(ell)
    else:
        theta = [str(s) for s in promise]
        if not theta:
            raise PreconditionError("promise set is empty")
        bad = [s for s in theta if len(s) != ell or set(s) - {"0", "1"}]
        if bad:
            raise ProblemError(f"promise element {bad[0]!r} is not an {ell}-bit string")
    values = [str(lookup(s)) for s in theta]
    outcome_labels = ("0", "1") if set(values) <= {"0", "1"} else tuple(sorted(set(values)))
    inputs = tuple(str(i + 1) for i in range(ell))
    kernel = tuple(
        tuple((Fraction(int(s[i] == "0")), Fraction(int(s[i] == "1"))) for i in range(ell))
        for s in theta
    )
    target = TargetFunction(tuple(frozenset([v]) for v in values))
    pr = Prior.uniform(len(theta)) if prior == "uniform" else (
        None if prior is None else Prior.of(prior))
    return Problem(tuple(theta), Oracle(inputs, ("0", "1"), kernel),
                   OutcomeSpace(outcome_labels), target, pr)


def _kernel_row(k, answers: Sequence) -> tuple:
    if isinstance(k, Mapping):
        extra = set(k) - set(answers)
        if extra:
            raise ProblemError(f"kernel mentions unknown answer {sorted(extra, key=repr)[0]!r}")
        return tuple(frac(k.get(y, 0)) for y in answers)
    row = tuple(frac(v) for v in k)
    if len(row) != len(answers):
        raise ProblemError(f"kernel row {row} does not match {len(answers)} answers")
    return row


def make_estimation_problem(kernels: Mapping, targets: Mapping, answers: Sequence,
                            outcomes: Sequence | None = None, prior="uniform") -> Problem:
    """Sampling oracle with one dummy input; ``kernels[theta]`` is the law of the sample."""
    theta = tuple(kernels)
    answers = tuple(answers)
    rows = []
    for t in theta:
        row = _kernel_row(kernels[t], answers)
        if any(v < 0 or v > 1 for v in row) or sum(row) != 1:
            raise ProblemError(f"kernel for theta {t!r} is not a probability vector (row sum ≠ 1)")
        rows.append((row,))
    accept = tuple(frozenset(targets[t]) for t in theta)
    if outcomes is None:
        seen = []
        for acc in accept:
            for lab in sorted(acc, key=repr):
                if lab not in seen:
                    seen.append(lab)
        outcomes = seen
    pr = Prior.uniform(len(theta)) if prior == "uniform" else (
        None if prior is None else Prior.of(prior))
    p = Problem(theta, Oracle((DUMMY_INPUT,), answers, tuple(rows)),
                OutcomeSpace(tuple(outcomes)), TargetFunction(accept), pr,
                infeasible_at_zero=any(not a for a in accept))
    return ensure_valid(p)


def make_pac_problem(instances: Sequence, concepts: Mapping, distributions: Mapping, delta,
                     prior="uniform") -> Problem:
    """PAC learning as an oracle problem over (concept, distribution) pairs.

    ``concepts[name]`` maps each instance to a bit (a mapping or a sequence aligned
    with ``instances``); ``distributions[name]`` gives instance weights likewise.
    The oracle emits a labeled sample ``(x, h(x))`` with ``x ~ D``.
    """
    X = tuple(instances)
    if not X or not concepts or not distributions:
        raise PreconditionError("instance space, concept class and distribution family must be nonempty")
    delta = frac(delta)

    def aligned(m, name):
        if isinstance(m, Mapping):
            return tuple(m[x] for x in X)
        m = tuple(m)
        if len(m) != len(X):
            raise ProblemError(f"{name} is not aligned with the instance space")
        return m

    C = {c: tuple(int(b) for b in aligned(v, f"concept {c!r}")) for c, v in concepts.items()}
    D = {d: tuple(frac(w) for w in aligned(v, f"distribution {d!r}")) for d, v in distributions.items()}
    for d, w in D.items():
        if any(v < 0 for v in w) or sum(w) != 1:
            raise ProblemError(f"distribution {d!r} is not a probability vector (row sum ≠ 1)")
    answers = tuple((x, str(b)) for x in X for b in (0, 1))
    theta, rows, accept = [], [], []
    for h, hv in C.items():
        for d, w in D.items():
            theta.append((h, d))
            rows.append((tuple(w[i] if hv[i] == b else Fraction(0)
                               for i in range(len(X)) for b in (0, 1)),))
            accept.append(frozenset(
                c for c, cv in C.items()
                if sum((w[i] for i in range(len(X)) if cv[i] != hv[i]), Fraction(0)) <= delta
            ))
    pr = Prior.uniform(len(theta)) if prior == "uniform" else (
        None if prior is None else Prior.of(prior))
    p = Problem(tuple(theta), Oracle((DUMMY_INPUT,), answers, tuple(rows)),
                OutcomeSpace(tuple(C)), TargetFunction(tuple(accept)), pr,
                infeasible_at_zero=any(not a for a in accept))
    return ensure_valid(p)
