"""Finite distributions, labeled partitions, and Shannon entropy.

Distributions carry either exact rational weights (Fractions) or floats;
the numeric mode is inferred from the weights and decides how entropies are
represented: LogValue (exact) in rational mode, compensated floats in float
mode.  All entropies are in nats; 0*log(0) is 0 throughout.

Conditioning on an invariant partition follows the disintegration reading:
H(α / ξ) = Σ_C μ(C) · H_{μ_C}(α) over the positive-mass blocks C of ξ.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Hashable, Mapping

from .errors import InvalidDistribution
from .exactlog import LogValue

FLOAT_NORMALIZATION_TOL = 1e-12

RATIONAL = "rational"
FLOAT = "float"


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


class FiniteDistribution:
    """Probability vector over a finite label set.

    Weights are Fractions (rational mode) or floats (float mode); zero-weight
    labels may be present and are ignored by entropy.  Iteration order is the
    canonical sorted label order, so float accumulations are deterministic.
    """

    __slots__ = ("pairs", "mode")

    def __init__(self, weights: Mapping[Hashable, object]):
        pairs = tuple(sorted(weights.items(), key=lambda kv: _label_key(kv[0])))
        if not pairs:
            raise InvalidDistribution("empty distribution")
        if all(_is_exact(v) for _, v in pairs):
            mode = RATIONAL
            pairs = tuple((k, Fraction(v)) for k, v in pairs)
        elif all(isinstance(v, float) or _is_exact(v) for _, v in pairs):
            mode = FLOAT
            pairs = tuple((k, float(v)) for k, v in pairs)
        else:
            raise InvalidDistribution("weights must be rationals or floats")
        self.pairs = pairs
        self.mode = mode

    @classmethod
    def uniform(cls, labels) -> "FiniteDistribution":
        labels = list(labels)
        w = Fraction(1, len(labels))
        return cls({l: w for l in labels})

    def labels(self) -> tuple:
        return tuple(k for k, _ in self.pairs)

    def weight(self, label):
        for k, v in self.pairs:
            if k == label:
                return v
        raise KeyError(label)

    def as_dict(self) -> dict:
        return dict(self.pairs)

    def check(self) -> None:
        """Raise InvalidDistribution on negative weights or bad normalization."""
        if any(v < 0 for _, v in self.pairs):
            raise InvalidDistribution("negative weight")
        total = sum(v for _, v in self.pairs)
        if self.mode == RATIONAL:
            if total != 1:
                raise InvalidDistribution(f"weights sum to {total}, not 1")
        elif abs(total - 1.0) > FLOAT_NORMALIZATION_TOL:
            raise InvalidDistribution(f"weights sum to {total!r}, not 1 within {FLOAT_NORMALIZATION_TOL}")

    def to_float(self) -> "FiniteDistribution":
        return FiniteDistribution({k: float(v) for k, v in self.pairs})

    def __eq__(self, other):
        return isinstance(other, FiniteDistribution) and self.pairs == other.pairs

    def __hash__(self):
        return hash(self.pairs)

    def __repr__(self):
        body = ", ".join(f"{k!r}: {v}" for k, v in self.pairs)
        return f"FiniteDistribution({{{body}}})"


def _label_key(label):
    return (type(label).__name__, repr(label))


def entropy_of_weights(weights, mode: str):
    """H = Σ -p log p over positive weights; LogValue or float per mode."""
    if mode == RATIONAL:
        grouped: dict[Fraction, int] = {}
        for p in weights:
            if p:
                grouped[p] = grouped.get(p, 0) + 1
        total = LogValue.zero()
        for p in sorted(grouped):
            total = total + LogValue.nlogn_term(p) * grouped[p]
        return total
    return math.fsum(-p * math.log(p) for p in weights if p > 0.0)


def shannon(dist: FiniteDistribution):
    """Shannon entropy of a validated distribution, in nats."""
    dist.check()
    return entropy_of_weights((v for _, v in dist.pairs), dist.mode)


class LabeledPartition:
    """Partition of a finite sample space, given as point -> block label."""

    __slots__ = ("labeling",)

    def __init__(self, labeling: Mapping[Hashable, Hashable]):
        self.labeling = dict(labeling)

    @classmethod
    def trivial(cls, points) -> "LabeledPartition":
        return cls({x: 0 for x in points})

    @classmethod
    def discrete(cls, points) -> "LabeledPartition":
        return cls({x: x for x in points})

    def label(self, point):
        return self.labeling[point]

    def points(self):
        return self.labeling.keys()

    def join(self, other: "LabeledPartition") -> "LabeledPartition":
        _check_same_space(self, other)
        return LabeledPartition({x: (l, other.labeling[x]) for x, l in self.labeling.items()})

    def blocks(self) -> dict:
        out: dict = {}
        for x, l in self.labeling.items():
            out.setdefault(l, []).append(x)
        return out

    def __eq__(self, other):
        return isinstance(other, LabeledPartition) and self.labeling == other.labeling


def _check_same_space(*parts, mu: FiniteDistribution | None = None):
    spaces = [frozenset(p.labeling) for p in parts]
    if mu is not None:
        spaces.append(frozenset(mu.labels()))
    if any(s != spaces[0] for s in spaces[1:]):
        raise InvalidDistribution("partitions/measure are over different sample spaces")


def _pushforward(alpha: LabeledPartition, mu: FiniteDistribution) -> dict:
    masses: dict = {}
    for x, w in mu.pairs:
        l = alpha.labeling[x]
        masses[l] = masses.get(l, w * 0) + w
    return masses


def partition_entropy(alpha: LabeledPartition, mu: FiniteDistribution):
    """H(α) under μ."""
    _check_same_space(alpha, mu=mu)
    mu.check()
    masses = _pushforward(alpha, mu)
    values = [masses[k] for k in sorted(masses, key=_label_key)]
    return entropy_of_weights(values, mu.mode)


def joint_entropy(alpha: LabeledPartition, beta: LabeledPartition, mu: FiniteDistribution):
    """H(α ∨ β)."""
    return partition_entropy(alpha.join(beta), mu)


def conditional_entropy(alpha: LabeledPartition, beta: LabeledPartition, mu: FiniteDistribution):
    """H(α / β) = H(α ∨ β) - H(β); nonnegative."""
    return joint_entropy(alpha, beta, mu) - partition_entropy(beta, mu)


def conditional_on_invariant(alpha: LabeledPartition, xi: LabeledPartition, mu: FiniteDistribution):
    """H(α / ξ) by disintegration: Σ_C μ(C)·H_{μ_C}(α), zero-mass blocks skipped."""
    _check_same_space(alpha, xi, mu=mu)
    mu.check()
    total = LogValue.zero() if mu.mode == RATIONAL else 0.0
    blocks = xi.blocks()
    for label in sorted(blocks, key=_label_key):
        points = blocks[label]
        mass = sum(mu.weight(x) for x in points)
        if not mass:
            continue
        cond = {x: mu.weight(x) / mass for x in points}
        inner: dict = {}
        for x, w in cond.items():
            l = alpha.labeling[x]
            inner[l] = inner.get(l, w * 0) + w
        values = [inner[k] for k in sorted(inner, key=_label_key)]
        total = total + entropy_of_weights(values, mu.mode) * mass
    return total
