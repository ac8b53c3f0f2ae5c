"""Exact f-invariant entropy of measure-preserving free-group actions.

The package computes the invariant for finitely describable systems by
several independent routes (the defining ball functional, the sphere
formula, the independence-decay series, closed forms for purely atomic
systems, and the ergodic-decomposition identity) and cross-validates them.
"""

from .errors import (
    BallCapExceeded,
    CapExceeded,
    DisconnectedSet,
    FInvariantError,
    InvalidDistribution,
    InvalidSystem,
    PatternCapExceeded,
    RouteDisagreement,
    WordError,
)
from .exactlog import LogValue
from .prob import (
    FiniteDistribution,
    LabeledPartition,
    conditional_entropy,
    conditional_on_invariant,
    joint_entropy,
    partition_entropy,
    shannon,
)
from .systems import (
    BernoulliSpec,
    CosetBernoulliSpec,
    DirectSumSpec,
    FiniteActionSpec,
    HiddenMarkovSpec,
    MarkovSpec,
    canonical_partition,
    validate,
)
from .patterns import (
    EngineOptions,
    PatternDistribution,
    conditional_between,
    entropy_of,
    marginal,
    marginal_restricted,
    oracle_marginal,
    set_entropy,
)

__version__ = "0.1.0"
