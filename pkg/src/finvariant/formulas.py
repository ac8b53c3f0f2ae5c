"""The f-invariant entropy formulas and their truncated evaluations.

Routes implemented, all generic over the supported system kinds and over an
optional invariant partition (the component partition of a direct sum):

* ball_functional -- the defining functional
  F(n) = (1 - 2r)·H(B_n·α / Σ) + Σ_{s in S} H(sB_n·α ∨ B_n·α / Σ),
  non-increasing in n with limit f.
* sphere_functional -- the simplified functional
  F'(n) = (1 - r)·H(B_n·α / Σ) + (1/2)·H(B_{n+1}·α / B_n·α ∨ Σ),
  with F'(n) <= F(n).
* delta / decay_report -- independence decay
  δ(g) = H(s^-1 g·α / Pre(s^-1 g)·α ∨ Σ) - H(g·α / Pre(g)·α ∨ Σ)
  (s the leading letter of g) and the series value
  H(α/Σ) - (1/2)·Σ_{g != 1} δ(g) truncated to a ball.  The truncation
  telescopes to F'(R-1) exactly, so it is an upper bound on f and is exact
  as soon as the δ tail vanishes structurally.
* atomic_value -- the purely atomic closed form -(r-1)·H(μ).
* direct_sum_report -- f(μ) = Σ p_i f(ν_i) - (r-1)·H(τ) for direct sums,
  asserting the relative identity f(μ/ξ) = Σ p_i f(ν_i) internally.
* growth_profile -- the sphere-increment diagnostic whose n-th roots tend to
  2r - 1 exactly when f is finite on a non-atomic part.
* ks_truncated -- truncated relative Kolmogorov-Sinai entropy of a cyclic
  subgroup, H(B_n·α / ∨_{m=1..k} g^-m B_n·α ∨ Σ), non-increasing in k.
* rformula_check -- compares F(n) against
  (1 - r)·H(B_n·α/Σ) + Σ_{s in S} h_<s>(B_n·α) with the h-terms truncated
  until stabilization.

Truncation semantics are explicit in every report: finite-radius ball and
decay values are upper bounds on f, and the ``exact`` flag is set only when
a structural argument closes the tail (Markov-type systems at sufficient
radius, finite actions, direct sums of such).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import words
from .errors import FInvariantError, RouteDisagreement, WordError
from .exactlog import LogValue
from .patterns import DEFAULT_OPTIONS, EngineOptions, resolve_mode, set_entropy
from .prob import RATIONAL
from .systems import (
    BernoulliSpec,
    CosetBernoulliSpec,
    DirectSumSpec,
    FiniteActionSpec,
    HiddenMarkovSpec,
    MarkovSpec,
    require_valid,
)

#: Distinguished value for the degenerate case; unreachable for finite
#: descriptions but kept so report consumers handle it uniformly.
MINUS_INFINITY = float("-inf")

AGREEMENT_TOL = 1e-9


@dataclass
class EntropyReport:
    """Result of one f-computation route with truncation metadata.

    trace rows are (label, term, cumulative); for ball/sphere routes the
    cumulative column repeats the term, for the decay route it is the
    running series value.
    """

    route: str
    value: object
    exact: bool
    truncation: dict
    trace: tuple = ()
    notes: tuple = ()

    def value_float(self) -> float:
        return float(self.value)


def _zero(spec, opts):
    return LogValue.zero() if resolve_mode(spec, opts) == RATIONAL else 0.0


def _sigma_of(spec, relative: bool):
    return "components" if relative and isinstance(spec, DirectSumSpec) else None


def _ball(spec, n, opts):
    return words.ball(spec.rank, n, opts.order, opts.ball_cap)


def ball_functional(spec, n: int, opts: EngineOptions = DEFAULT_OPTIONS, sigma: str | None = None):
    """F(n): the defining functional evaluated on the radius-n ball."""
    require_valid(spec)
    r = spec.rank
    ball = _ball(spec, n, opts)
    base = set(ball.elements)
    total = (1 - 2 * r) * set_entropy(spec, base, opts, sigma)
    for gen in range(r):
        s = (2 * gen,)
        union = base | {words.multiply(s, g) for g in ball.elements}
        total = total + set_entropy(spec, union, opts, sigma)
    return total


def sphere_functional(spec, n: int, opts: EngineOptions = DEFAULT_OPTIONS, sigma: str | None = None):
    """F'(n) = (1-r)·H(B_n·α/Σ) + ½·H(B_{n+1}·α / B_n·α ∨ Σ)."""
    require_valid(spec)
    h_n = set_entropy(spec, set(_ball(spec, n, opts).elements), opts, sigma)
    h_next = set_entropy(spec, set(_ball(spec, n + 1, opts).elements), opts, sigma)
    return (1 - spec.rank) * h_n + Fraction(1, 2) * (h_next - h_n)


def _segment_increments(spec, R: int, opts: EngineOptions, sigma: str | None):
    """H(g·α / Pre(g)·α ∨ Σ) for every g in B_R, by one ≼ sweep.

    Initial segments of the ordered ball are prefix-closed, so each segment
    entropy is a cheap set entropy; the increment at position i is
    H(first i+1) - H(first i).
    """
    ball = _ball(spec, R, opts)
    increments = []
    prev = _zero(spec, opts)
    for i in range(len(ball.elements)):
        cur = set_entropy(spec, ball.elements[: i + 1], opts, sigma)
        increments.append(cur - prev)
        prev = cur
    return ball, increments


def delta(spec, g: words.Word, opts: EngineOptions = DEFAULT_OPTIONS, sigma: str | None = None):
    """Independence decay at g (nonnegative); g must not be the identity."""
    require_valid(spec)
    if not g:
        raise WordError("independence decay is undefined at the identity")
    ball = _ball(spec, len(g), opts)

    def increment(h):
        """H(h·α / Pre(h)·α ∨ Σ), via prefix-closed initial segments."""
        pre = ball.pre(h)
        if not pre:
            return set_entropy(spec, {h}, opts, sigma)
        return set_entropy(spec, set(pre) | {h}, opts, sigma) - set_entropy(spec, set(pre), opts, sigma)

    return increment(g[1:]) - increment(g)


def decay_report(spec, R: int, opts: EngineOptions = DEFAULT_OPTIONS, sigma: str | None = None) -> EntropyReport:
    """The decay-series route truncated to B_R: H(α/Σ) - ½·Σ_{1 != g in B_R} δ(g).

    δ ≥ 0 makes every truncation an upper bound on f; the report is exact
    when the tail vanishes structurally.
    """
    require_valid(spec)
    if R < 1:
        raise FInvariantError("decay truncation radius must be >= 1")
    ball, increments = _segment_increments(spec, R, opts, sigma)
    base = increments[0]  # H(α/Σ): the identity is the first element
    half = Fraction(1, 2)
    running = base
    trace = []
    tail_sphere = _zero(spec, opts)
    for i, g in enumerate(ball.elements):
        if not g:
            continue
        parent_idx = ball.index[g[1:]]
        d = increments[parent_idx] - increments[i]
        running = running - half * d
        trace.append((words.word_to_str(g), d, running))
        if len(g) == R:
            tail_sphere = tail_sphere + d
    return EntropyReport(
        route="decay-series",
        value=running,
        exact=_decay_exact(spec, R),
        truncation={"radius": R, "last_sphere_half_sum": half * tail_sphere},
        trace=tuple(trace),
        notes=(
            "truncated value is an upper bound on f (delta >= 0)",
            "last_sphere_half_sum is a heuristic tail indicator, not a bound",
        ),
    )


def _decay_exact(spec, R: int) -> bool:
    """Structural tail-vanishing: when the series is exact at radius R."""
    if isinstance(spec, FiniteActionSpec):
        return R >= 1
    if isinstance(spec, (BernoulliSpec, MarkovSpec, CosetBernoulliSpec)):
        return R >= 2
    if isinstance(spec, DirectSumSpec):
        return all(_decay_exact(c, R) for _, c in spec.components)
    return False


def _ball_exact(spec) -> bool:
    if isinstance(spec, (FiniteActionSpec, BernoulliSpec, MarkovSpec, CosetBernoulliSpec)):
        return True
    if isinstance(spec, DirectSumSpec):
        return all(_ball_exact(c) for _, c in spec.components)
    return False


def ball_report(spec, n: int, opts: EngineOptions = DEFAULT_OPTIONS, sigma: str | None = None) -> EntropyReport:
    trace = []
    value = None
    for k in range(n + 1):
        value = ball_functional(spec, k, opts, sigma)
        trace.append((str(k), value, value))
    return EntropyReport(
        route="ball-limit",
        value=value,
        exact=_ball_exact(spec),
        truncation={"radius": n},
        trace=tuple(trace),
        notes=("terms are non-increasing in n; each is an upper bound on f",),
    )


def sphere_report(spec, n: int, opts: EngineOptions = DEFAULT_OPTIONS, sigma: str | None = None) -> EntropyReport:
    trace = []
    value = None
    for k in range(n + 1):
        value = sphere_functional(spec, k, opts, sigma)
        trace.append((str(k), value, value))
    return EntropyReport(
        route="sphere-formula",
        value=value,
        exact=_ball_exact(spec),
        truncation={"radius": n},
        trace=tuple(trace),
    )


def atomic_value(spec: FiniteActionSpec, opts: EngineOptions = DEFAULT_OPTIONS):
    """Closed form for purely atomic systems: -(r-1)·H(μ)."""
    require_valid(spec)
    if not isinstance(spec, FiniteActionSpec):
        raise FInvariantError("the atomic closed form needs a finite action")
    from .prob import shannon

    mass = spec.mass if resolve_mode(spec, opts) == RATIONAL else spec.mass.to_float()
    return (1 - spec.rank) * shannon(mass)


def atomic_report(spec: FiniteActionSpec, opts: EngineOptions = DEFAULT_OPTIONS) -> EntropyReport:
    value = atomic_value(spec, opts)
    return EntropyReport(
        route="atomic-closed-form",
        value=value,
        exact=True,
        truncation={},
        trace=((("-(r-1)H(mu)"), value, value),),
    )


def growth_profile(spec, N: int, opts: EngineOptions = DEFAULT_OPTIONS, sigma: str | None = None):
    """Diagnostic rows (n, H(B_{n+1}·α / B_n·α ∨ Σ), n-th root of the increment).

    Desk truncations assert nothing about convergence; the root column is
    None at n = 0.
    """
    require_valid(spec)
    rows = []
    prev = set_entropy(spec, set(_ball(spec, 0, opts).elements), opts, sigma)
    for n in range(N + 1):
        cur = set_entropy(spec, set(_ball(spec, n + 1, opts).elements), opts, sigma)
        inc = cur - prev
        root = float(inc) ** (1.0 / n) if n >= 1 and float(inc) > 0 else None
        rows.append((n, inc, root))
        prev = cur
    return rows


def ks_truncated(spec, g: words.Word, n: int, k: int, opts: EngineOptions = DEFAULT_OPTIONS, sigma: str | None = None):
    """H(B_n·α / ∨_{m=1..k} g^-m B_n·α ∨ Σ): depth-k term of h_<g>(X, μ/Σ, B_n·α)."""
    require_valid(spec)
    if not g:
        raise WordError("cyclic-subgroup entropy needs a non-identity element")
    if k < 1:
        raise FInvariantError("depth must be >= 1")
    ball_elements = _ball(spec, n, opts).elements
    conditioning: set = set()
    for m in range(1, k + 1):
        shift = words.word_power(g, -m)
        conditioning |= {words.multiply(shift, h) for h in ball_elements}
    full = conditioning | set(ball_elements)
    return set_entropy(spec, full, opts, sigma) - set_entropy(spec, conditioning, opts, sigma)


def ks_trace(spec, g: words.Word, n: int, depth: int, opts: EngineOptions = DEFAULT_OPTIONS, sigma: str | None = None):
    return [(k, ks_truncated(spec, g, n, k, opts, sigma)) for k in range(1, depth + 1)]


@dataclass
class RFormulaResult:
    left: object  # F(n)
    right: object | None  # (1-r)H(B_n·α/Σ) + Σ_s h_s, None if not stabilized
    per_generator: tuple  # (letter name, values by depth, stabilized, interval)
    stabilized: bool


def rformula_check(
    spec,
    n: int,
    opts: EngineOptions = DEFAULT_OPTIONS,
    sigma: str | None = None,
    depth_cap: int = 6,
    stabilization_tol: float = 1e-12,
) -> RFormulaResult:
    """Both sides of the truncated cyclic-subgroup identity at radius n.

    Each h-term is deepened until two successive depths agree (exactly in
    rational mode, within the stabilization tolerance in float mode); a
    non-stabilized term is reported as its last bracketing interval and
    leaves the right side undefined.
    """
    require_valid(spec)
    left = ball_functional(spec, n, opts, sigma)
    h_n = set_entropy(spec, set(_ball(spec, n, opts).elements), opts, sigma)
    right = (1 - spec.rank) * h_n
    per_gen = []
    all_stable = True
    for gen in range(spec.rank):
        s = (2 * gen,)
        values = [ks_truncated(spec, s, n, 1, opts, sigma)]
        stabilized = False
        for k in range(2, depth_cap + 1):
            values.append(ks_truncated(spec, s, n, k, opts, sigma))
            a, b = values[-2], values[-1]
            if (a == b) if isinstance(a, LogValue) and isinstance(b, LogValue) else abs(float(a) - float(b)) < stabilization_tol:
                stabilized = True
                break
        interval = None if stabilized else (values[-1], values[-2])
        if stabilized:
            right = right + values[-1]
        else:
            all_stable = False
        per_gen.append((words.letter_name(2 * gen), tuple(values), stabilized, interval))
    return RFormulaResult(left, right if all_stable else None, tuple(per_gen), all_stable)


# ---------------------------------------------------------------------------
# direct sums and the route dispatcher


def component_value(spec, opts: EngineOptions = DEFAULT_OPTIONS, radius: int = 2):
    """(value, exact) for one system by its best structural route."""
    if isinstance(spec, FiniteActionSpec):
        return atomic_value(spec, opts), True
    if isinstance(spec, DirectSumSpec):
        rep = direct_sum_report(spec, opts)
        return rep.value, rep.exact
    rep = decay_report(spec, max(radius, 2), opts)
    return rep.value, rep.exact


def direct_sum_report(spec: DirectSumSpec, opts: EngineOptions = DEFAULT_OPTIONS, radius: int = 2) -> EntropyReport:
    """f(μ) = Σ p_i f(ν_i) - (r-1)·H(τ), checked against the relative route.

    The relative identity f(μ / ξ) = Σ p_i f(ν_i) is evaluated on the sum
    system with ξ the component partition and asserted internally.
    """
    require_valid(spec)
    if not isinstance(spec, DirectSumSpec):
        raise FInvariantError("direct-sum route needs a direct-sum system")
    from .prob import shannon

    mode = resolve_mode(spec, opts)
    mixture = _zero(spec, opts)
    exact = True
    trace = []
    for i, (w, comp) in enumerate(spec.components):
        value, comp_exact = component_value(comp, opts, radius)
        exact = exact and comp_exact
        weight = w if mode == RATIONAL else float(w)
        mixture = mixture + weight * value
        trace.append((f"component {i} (weight {w})", value, mixture))
    tau = spec.weights() if mode == RATIONAL else spec.weights().to_float()
    h_tau = shannon(tau)
    value = mixture - (spec.rank - 1) * h_tau

    relative = decay_report(spec, max(radius, 2), opts, sigma="components")
    if exact and relative.exact and isinstance(mixture, LogValue) and isinstance(relative.value, LogValue):
        agreed = relative.value == mixture
    else:
        agreed = abs(float(relative.value) - float(mixture)) <= AGREEMENT_TOL
    if not agreed:
        raise RouteDisagreement(
            f"relative identity violated: f(mu/xi) = {float(relative.value)!r} "
            f"but sum of weighted component values is {float(mixture)!r}"
        )
    return EntropyReport(
        route="direct-sum",
        value=value,
        exact=exact,
        truncation={"component_radius": max(radius, 2)},
        trace=tuple(trace),
        notes=(f"H(tau) = {float(h_tau)!r}", "relative identity f(mu/xi) = sum p_i f(nu_i) verified"),
    )


def f_routes(spec, opts: EngineOptions = DEFAULT_OPTIONS, radius: int = 1) -> list[EntropyReport]:
    """All applicable routes for one system, for side-by-side comparison."""
    require_valid(spec)
    reports = []
    if isinstance(spec, FiniteActionSpec):
        reports.append(atomic_report(spec, opts))
    if isinstance(spec, DirectSumSpec):
        reports.append(direct_sum_report(spec, opts, max(radius + 1, 2)))
    reports.append(ball_report(spec, radius, opts))
    reports.append(sphere_report(spec, radius, opts))
    reports.append(decay_report(spec, radius + 1, opts))
    return reports


def route_agreement(reports, tol: float = AGREEMENT_TOL):
    """Pairs of routes that must agree, with observed disagreement.

    Exact reports must all agree; the sphere formula at n and the decay
    series at n+1 agree identically for every system (the series telescopes
    to the sphere functional), so that pair is always checked.
    """
    failures = []
    exact_reports = [r for r in reports if r.exact]
    for i in range(1, len(exact_reports)):
        a, b = exact_reports[0], exact_reports[i]
        if isinstance(a.value, LogValue) and isinstance(b.value, LogValue):
            ok = a.value == b.value
        else:
            ok = abs(float(a.value) - float(b.value)) <= tol
        if not ok:
            failures.append((a.route, b.route, abs(float(a.value) - float(b.value))))
    by_route = {r.route: r for r in reports}
    sphere = by_route.get("sphere-formula")
    decay = by_route.get("decay-series")
    if sphere is not None and decay is not None and decay.truncation["radius"] == sphere.truncation["radius"] + 1:
        a, b = sphere.value, decay.value
        if isinstance(a, LogValue) and isinstance(b, LogValue):
            ok = a == b
        else:
            ok = abs(float(a) - float(b)) <= tol
        if not ok:
            failures.append(("sphere-formula", "decay-series", abs(float(a) - float(b))))
    return failures
