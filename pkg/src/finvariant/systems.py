"""Finite descriptions of measure-preserving free-group actions.

Five kinds of system are supported, each with a canonical finite generating
partition:

* FiniteActionSpec -- a finite point set with one mass-preserving bijection
  per generator; canonical partition is the point partition (or a generating
  user coarsening).
* BernoulliSpec -- product measure on A^G with the identity-coordinate
  partition.
* MarkovSpec -- a shift-invariant measure whose pattern probabilities factor
  over prefix-tree edges (g, g*s) through per-letter transition matrices.
  Validity requires row-stochasticity, stationarity (pi P_s = pi) and
  adjointness (pi(a) P_s(a,b) = pi(b) P_{s^-1}(b,a)); these are exactly the
  conditions making the tree measure well-defined and shift-invariant.
* HiddenMarkovSpec -- a letter-by-letter factor of a Markov or Bernoulli
  system; the observed pattern law is the fiber sum of the inner law.
* CosetBernoulliSpec -- independent coordinates indexed by the left cosets
  g<t> of a marked generator; the identity-coset partition is fixed by t.
* DirectSumSpec -- a convex combination of systems living on disjoint
  labeled copies, with the separating partition available as the invariant
  partition for relative entropies.

validate() returns a per-violation report; computations require a clean
report and raise InvalidSystem otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import words
from .errors import InvalidDistribution, InvalidSystem
from .prob import FLOAT_NORMALIZATION_TOL, RATIONAL, FiniteDistribution

Matrix = tuple[tuple[object, ...], ...]


@dataclass(frozen=True)
class BernoulliSpec:
    rank: int
    base: FiniteDistribution

    kind = "bernoulli"


@dataclass(frozen=True)
class MarkovSpec:
    rank: int
    alphabet: tuple[str, ...]
    stationary: tuple
    transitions: tuple[Matrix, ...]  # one row-stochastic matrix per letter index

    kind = "markov"


@dataclass(frozen=True)
class HiddenMarkovSpec:
    inner: object  # MarkovSpec or BernoulliSpec
    letter_map: tuple[tuple[str, str], ...]  # (inner label, observed label) pairs

    kind = "hidden-markov"

    @property
    def rank(self) -> int:
        return self.inner.rank


@dataclass(frozen=True)
class CosetBernoulliSpec:
    rank: int
    base: FiniteDistribution
    marked: int  # generator index in [0, rank)

    kind = "coset-bernoulli"


@dataclass(frozen=True)
class FiniteActionSpec:
    rank: int
    points: tuple[str, ...]
    mass: FiniteDistribution
    generator_maps: tuple[tuple[int, ...], ...]  # images by point index, one per generator
    labels: tuple[str, ...] | None = None  # optional coarsening; None = point partition

    kind = "finite-action"


@dataclass(frozen=True)
class DirectSumSpec:
    rank: int
    components: tuple[tuple[object, object], ...]  # (weight, spec) pairs

    kind = "direct-sum"

    def weights(self) -> FiniteDistribution:
        return FiniteDistribution({i: w for i, (w, _) in enumerate(self.components)})


SystemSpec = (
    BernoulliSpec,
    MarkovSpec,
    HiddenMarkovSpec,
    CosetBernoulliSpec,
    FiniteActionSpec,
    DirectSumSpec,
)


@dataclass
class Violation:
    path: str
    message: str

    def __str__(self):
        return f"{self.path}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, path: str, message: str):
        self.violations.append(Violation(path, message))

    def __str__(self):
        if self.ok:
            return "valid"
        return "; ".join(str(v) for v in self.violations)


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def numeric_mode(spec) -> str:
    """RATIONAL when every weight in the description is exact, else FLOAT."""
    values = list(_all_weights(spec))
    if all(_is_exact(v) for v in values):
        return RATIONAL
    return FLOAT


def _all_weights(spec):
    if isinstance(spec, (BernoulliSpec, CosetBernoulliSpec)):
        yield from (v for _, v in spec.base.pairs)
    elif isinstance(spec, MarkovSpec):
        yield from spec.stationary
        for m in spec.transitions:
            for row in m:
                yield from row
    elif isinstance(spec, HiddenMarkovSpec):
        yield from _all_weights(spec.inner)
    elif isinstance(spec, FiniteActionSpec):
        yield from (v for _, v in spec.mass.pairs)
    elif isinstance(spec, DirectSumSpec):
        for w, comp in spec.components:
            yield w
            yield from _all_weights(comp)
    else:
        raise TypeError(f"not a system spec: {spec!r}")


def _check_distribution(report, path, dist):
    try:
        dist.check()
    except InvalidDistribution as exc:
        report.add(path, str(exc))
        return False
    return True


def _row_sums_ok(row, mode) -> bool:
    total = sum(row)
    if mode == RATIONAL:
        return total == 1
    return abs(total - 1.0) <= FLOAT_NORMALIZATION_TOL


def _close(a, b, mode) -> bool:
    if mode == RATIONAL:
        return a == b
    return abs(a - b) <= FLOAT_NORMALIZATION_TOL


def validate(spec) -> ValidationReport:
    """Check every invariant of the description; never raises."""
    report = ValidationReport()
    if isinstance(spec, BernoulliSpec):
        _check_distribution(report, "base", spec.base)
    elif isinstance(spec, MarkovSpec):
        _validate_markov(spec, report)
    elif isinstance(spec, HiddenMarkovSpec):
        _validate_hidden(spec, report)
    elif isinstance(spec, CosetBernoulliSpec):
        _check_distribution(report, "base", spec.base)
        if not (0 <= spec.marked < spec.rank):
            report.add("marked", f"marked generator {spec.marked} outside [0, {spec.rank})")
    elif isinstance(spec, FiniteActionSpec):
        _validate_finite_action(spec, report)
    elif isinstance(spec, DirectSumSpec):
        _validate_direct_sum(spec, report)
    else:
        report.add("", f"unknown system kind {type(spec).__name__}")
    if not (1 <= getattr(spec, "rank", 0) <= 26):
        report.add("rank", f"rank must be in [1, 26], got {getattr(spec, 'rank', None)}")
    return report


def _validate_markov(spec: MarkovSpec, report: ValidationReport):
    mode = numeric_mode(spec)
    n = len(spec.alphabet)
    if len(set(spec.alphabet)) != n:
        report.add("alphabet", "duplicate labels")
    pi = spec.stationary
    if len(pi) != n:
        report.add("stationary", f"expected {n} weights, got {len(pi)}")
        return
    if not _check_distribution(report, "stationary", FiniteDistribution(dict(zip(range(n), pi)))):
        return
    if len(spec.transitions) != 2 * spec.rank:
        report.add("transitions", f"expected {2 * spec.rank} matrices, got {len(spec.transitions)}")
        return
    for letter, m in enumerate(spec.transitions):
        name = words.letter_name(letter)
        if len(m) != n or any(len(row) != n for row in m):
            report.add(f"transitions[{name}]", f"matrix must be {n}x{n}")
            return
        for a, row in enumerate(m):
            if any(v < 0 for v in row):
                report.add(f"transitions[{name}]", f"negative entry in row {a}")
            if not _row_sums_ok(row, mode):
                report.add(f"transitions[{name}]", f"row {a} is not stochastic (sums to {sum(row)})")
    # stationarity: pi P_s = pi for every letter s
    for letter, m in enumerate(spec.transitions):
        name = words.letter_name(letter)
        for b in range(n):
            lhs = sum(pi[a] * m[a][b] for a in range(n))
            if not _close(lhs, pi[b], mode):
                report.add(f"transitions[{name}]", f"stationarity fails at column {b}: pi*P = {lhs} != {pi[b]}")
                break
    # adjointness ties each letter to its inverse
    for letter in range(0, 2 * spec.rank, 2):
        m, minv = spec.transitions[letter], spec.transitions[letter + 1]
        name = words.letter_name(letter)
        ok = all(
            _close(pi[a] * m[a][b], pi[b] * minv[b][a], mode)
            for a in range(n)
            for b in range(n)
        )
        if not ok:
            report.add(f"transitions[{name}]", "adjointness fails: pi(a)P_s(a,b) != pi(b)P_s^-1(b,a)")


def _validate_hidden(spec: HiddenMarkovSpec, report: ValidationReport):
    if not isinstance(spec.inner, (MarkovSpec, BernoulliSpec)):
        report.add("inner", f"inner system must be markov or bernoulli, got {getattr(spec.inner, 'kind', '?')}")
        return
    inner_report = validate(spec.inner)
    for v in inner_report.violations:
        report.add(f"inner.{v.path}", v.message)
    inner_alphabet = canonical_labels(spec.inner)
    mapped = dict(spec.letter_map)
    missing = [l for l in inner_alphabet if l not in mapped]
    if missing:
        report.add("letter_map", f"inner labels without image: {missing}")
    extra = [l for l in mapped if l not in inner_alphabet]
    if extra:
        report.add("letter_map", f"unknown inner labels: {extra}")


def _validate_finite_action(spec: FiniteActionSpec, report: ValidationReport):
    n = len(spec.points)
    if len(set(spec.points)) != n:
        report.add("points", "duplicate point names")
    if set(spec.mass.labels()) != set(spec.points):
        report.add("mass", "mass must assign a weight to exactly the points")
        return
    _check_distribution(report, "mass", spec.mass)
    if len(spec.generator_maps) != spec.rank:
        report.add("maps", f"expected {spec.rank} generator maps, got {len(spec.generator_maps)}")
        return
    for i, perm in enumerate(spec.generator_maps):
        name = words.letter_name(2 * i)
        if sorted(perm) != list(range(n)):
            report.add(f"maps[{name}]", "not a bijection of the points")
            continue
        for x, y in enumerate(perm):
            if spec.mass.weight(spec.points[x]) != spec.mass.weight(spec.points[y]):
                report.add(
                    f"maps[{name}]",
                    f"mass mismatch: {spec.points[x]} (mass {spec.mass.weight(spec.points[x])})"
                    f" -> {spec.points[y]} (mass {spec.mass.weight(spec.points[y])})",
                )
    if spec.labels is not None:
        if len(spec.labels) != n:
            report.add("labels", f"expected {n} labels, got {len(spec.labels)}")
        elif not partition_is_generating(spec):
            report.add("labels", "user partition is not generating (orbit refinement does not separate positive-mass points)")


def _validate_direct_sum(spec: DirectSumSpec, report: ValidationReport):
    if not spec.components:
        report.add("components", "empty direct sum")
        return
    _check_distribution(report, "weights", spec.weights())
    for i, (_, comp) in enumerate(spec.components):
        if getattr(comp, "rank", None) != spec.rank:
            report.add(f"components[{i}]", f"rank {getattr(comp, 'rank', None)} differs from sum rank {spec.rank}")
        sub = validate(comp)
        for v in sub.violations:
            report.add(f"components[{i}].{v.path}", v.message)


def require_valid(spec):
    report = validate(spec)
    if not report.ok:
        raise InvalidSystem(report)
    return spec


def act_letter(spec: FiniteActionSpec, letter: int, point_index: int) -> int:
    """Apply one letter of the action to a point (by index)."""
    if letter & 1:
        return _inverse_perm(spec, letter >> 1)[point_index]
    return spec.generator_maps[letter >> 1][point_index]


def _inverse_perm(spec: FiniteActionSpec, gen: int) -> tuple[int, ...]:
    perm = spec.generator_maps[gen]
    inv = [0] * len(perm)
    for x, y in enumerate(perm):
        inv[y] = x
    return tuple(inv)


def act_word(spec: FiniteActionSpec, w: words.Word, point_index: int) -> int:
    """Apply a group element: letters act right-to-left, (uv).x = u.(v.x)."""
    for letter in reversed(w):
        point_index = act_letter(spec, letter, point_index)
    return point_index


def point_label(spec: FiniteActionSpec, point_index: int) -> str:
    if spec.labels is None:
        return spec.points[point_index]
    return spec.labels[point_index]


def partition_is_generating(spec: FiniteActionSpec) -> bool:
    """Orbit-refinement closure: refine by every s·α until stable, then check
    that positive-mass points are pairwise separated."""
    n = len(spec.points)
    labeling = [point_label(spec, x) for x in range(n)]
    letters = list(range(2 * spec.rank))
    while True:
        refined = [
            (labeling[x], tuple(labeling[act_letter(spec, l ^ 1, x)] for l in letters))
            for x in range(n)
        ]
        canon = {lab: i for i, lab in enumerate(sorted(set(refined), key=repr))}
        new = [canon[r] for r in refined]
        if len(set(new)) == len(set(labeling)):
            break
        labeling = new
    positive = [x for x in range(n) if spec.mass.weight(spec.points[x]) > 0]
    seen = {}
    for x in positive:
        if labeling[x] in seen:
            return False
        seen[labeling[x]] = x
    return True


def canonical_labels(spec) -> tuple:
    """Label alphabet of the canonical generating partition."""
    if isinstance(spec, (BernoulliSpec, CosetBernoulliSpec)):
        return spec.base.labels()
    if isinstance(spec, MarkovSpec):
        return spec.alphabet
    if isinstance(spec, HiddenMarkovSpec):
        mapped = dict(spec.letter_map)
        seen: list = []
        for l in canonical_labels(spec.inner):
            o = mapped[l]
            if o not in seen:
                seen.append(o)
        return tuple(seen)
    if isinstance(spec, FiniteActionSpec):
        labs: list = []
        for x in range(len(spec.points)):
            l = point_label(spec, x)
            if l not in labs:
                labs.append(l)
        return tuple(labs)
    if isinstance(spec, DirectSumSpec):
        out: list = []
        for i, (_, comp) in enumerate(spec.components):
            out.extend((i, l) for l in canonical_labels(comp))
        return tuple(out)
    raise TypeError(f"not a system spec: {spec!r}")


@dataclass
class PartitionInfo:
    """Symbolic description of the canonical partition used by all formulas."""

    kind: str
    labels: tuple
    description: str


def canonical_partition(spec) -> PartitionInfo:
    require_valid(spec)
    labels = canonical_labels(spec)
    if isinstance(spec, FiniteActionSpec):
        what = "point partition" if spec.labels is None else "user partition of the points"
    elif isinstance(spec, DirectSumSpec):
        what = "component tag joined with the component partition"
    elif isinstance(spec, HiddenMarkovSpec):
        what = "observed letter at the identity coordinate"
    elif isinstance(spec, CosetBernoulliSpec):
        what = "letter at the identity-coset coordinate"
    else:
        what = "letter at the identity coordinate"
    return PartitionInfo(spec.kind, labels, what)


def base_entropy(spec):
    """H(α) of the canonical partition (used by the decay formula)."""
    require_valid(spec)
    from .patterns import set_entropy  # deferred: avoids an import cycle

    return set_entropy(spec, (words.EMPTY,))


def spec_to_float(spec):
    """Same system with every weight converted to float."""
    if isinstance(spec, BernoulliSpec):
        return BernoulliSpec(spec.rank, spec.base.to_float())
    if isinstance(spec, CosetBernoulliSpec):
        return CosetBernoulliSpec(spec.rank, spec.base.to_float(), spec.marked)
    if isinstance(spec, MarkovSpec):
        return MarkovSpec(
            spec.rank,
            spec.alphabet,
            tuple(float(v) for v in spec.stationary),
            tuple(tuple(tuple(float(v) for v in row) for row in m) for m in spec.transitions),
        )
    if isinstance(spec, HiddenMarkovSpec):
        return HiddenMarkovSpec(spec_to_float(spec.inner), spec.letter_map)
    if isinstance(spec, FiniteActionSpec):
        return FiniteActionSpec(spec.rank, spec.points, spec.mass.to_float(), spec.generator_maps, spec.labels)
    if isinstance(spec, DirectSumSpec):
        return DirectSumSpec(
            spec.rank, tuple((float(w), spec_to_float(c)) for w, c in spec.components)
        )
    raise TypeError(f"not a system spec: {spec!r}")
