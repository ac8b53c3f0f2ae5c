"""Exact joint laws of the canonical partition over finite pattern sets.

A pattern set F is a finite set of group elements containing the identity;
the pattern law is the joint distribution of the partition labels read at
the coordinates F (left-action convention: the label of x at g is the label
of g^-1 x, which for shift systems is the coordinate x(g)).

Tree-factorized systems (Bernoulli, Markov, coset-Bernoulli, and their
letter-map factors) have pattern laws that factor over prefix-tree edges
(g, g*s), so the engines here require F to be prefix-closed; sets that are
not are rejected with the prefix closure as a hull suggestion, or handled by
marginalizing the law on the hull.  Balls, ≼-initial segments of balls, and
B_n ∪ sB_n are all prefix-closed, so the entropy formulas never pay for
hulling.

Three independent evaluation paths coexist and are cross-checked by tests:

* ``marginal`` materializes the law by dynamic programming over the prefix
  tree (sparse dicts in rational mode, dense tensors in float mode);
* ``oracle_marginal`` enumerates every label assignment naively with no
  incremental reuse;
* ``set_entropy`` computes joint entropies; for prefix-closed sets on
  identity-map systems it uses the exact tree chain rule (root marginal
  entropy plus one conditional row-entropy term per node), for hidden-Markov
  systems it materializes or, beyond the materialization cap in float mode,
  streams the pattern space in deterministic blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from . import sums, words
from .errors import DisconnectedSet, FInvariantError, PatternCapExceeded
from .exactlog import LogValue
from .prob import FLOAT, RATIONAL, entropy_of_weights
from .systems import (
    BernoulliSpec,
    CosetBernoulliSpec,
    DirectSumSpec,
    FiniteActionSpec,
    HiddenMarkovSpec,
    MarkovSpec,
    act_letter,
    act_word,
    canonical_labels,
    numeric_mode,
    point_label,
    require_valid,
)

#: Materialized pattern spaces are refused beyond this bound.
DEFAULT_PATTERN_CAP = 1 << 20
#: In auto mode, rational arithmetic is used up to this many patterns.
RATIONAL_AUTO_MAX = 1 << 16
#: Float-mode entropies may stream pattern spaces up to this bound.
DEFAULT_STREAM_CAP = 1 << 27
#: Dense block size for streamed entropy evaluation.
STREAM_BLOCK = 1 << 20
#: oracle_marginal refuses beyond this many enumerated inner patterns.
DEFAULT_ORACLE_CAP = 1 << 20


@dataclass(frozen=True)
class EngineOptions:
    """Numeric mode, size caps, ≼ letter order, and block-thread count."""

    mode: str = "auto"  # auto | rational | float
    pattern_cap: int = DEFAULT_PATTERN_CAP
    stream_cap: int = DEFAULT_STREAM_CAP
    oracle_cap: int = DEFAULT_ORACLE_CAP
    ball_cap: int = words.DEFAULT_BALL_CAP
    order: words.LetterOrder | None = None
    threads: int = 1


DEFAULT_OPTIONS = EngineOptions()


def resolve_mode(spec, opts: EngineOptions) -> str:
    spec_mode = numeric_mode(spec)
    if opts.mode == "auto":
        return spec_mode
    if opts.mode == RATIONAL:
        if spec_mode != RATIONAL:
            raise FInvariantError("rational mode requires a system with exact rational weights")
        return RATIONAL
    if opts.mode == FLOAT:
        return FLOAT
    raise FInvariantError(f"unknown numeric mode {opts.mode!r}")


class PatternDistribution:
    """Sparse joint law of the partition labels over a finite support set.

    ``probs`` maps tuples of label indices (aligned with ``support``, which
    is ≼-sorted) to probabilities; zero-probability patterns are never
    stored.
    """

    __slots__ = ("support", "labels", "probs", "mode")

    def __init__(self, support, labels, probs, mode):
        self.support = tuple(support)
        self.labels = tuple(labels)
        self.probs = probs
        self.mode = mode

    def total(self):
        return sum(self.probs.values())

    def prob(self, pattern: tuple) -> object:
        zero = Fraction(0) if self.mode == RATIONAL else 0.0
        return self.probs.get(tuple(pattern), zero)

    def marginalize(self, subset) -> "PatternDistribution":
        """Restriction of the law to a subset of the support."""
        subset = tuple(subset)
        positions = []
        index = {w: i for i, w in enumerate(self.support)}
        for w in subset:
            if w not in index:
                raise FInvariantError(f"{words.word_to_str(w)} is not in the support")
            positions.append(index[w])
        out: dict = {}
        for key in sorted(self.probs):
            sub = tuple(key[p] for p in positions)
            out[sub] = out.get(sub, 0) + self.probs[key]
        return PatternDistribution(subset, self.labels, out, self.mode)

    def entropy(self):
        """Direct pattern-space summation (independent of the tree engines)."""
        if self.mode == RATIONAL:
            return entropy_of_weights(self.probs.values(), RATIONAL)
        values = np.fromiter(
            (self.probs[k] for k in sorted(self.probs)), dtype=np.float64, count=len(self.probs)
        )
        return sums.entropy_nats(values)

    def label_string(self, key) -> str:
        names = [str(self.labels[i]) for i in key]
        if all(len(n) == 1 for n in names):
            return "".join(names)
        return ",".join(names)

    def dump_lines(self) -> list[str]:
        """One line per pattern: "<label-string> <probability>", sorted."""
        rows = []
        for key, p in self.probs.items():
            text = str(p) if self.mode == RATIONAL else repr(p)
            rows.append((self.label_string(key), text))
        rows.sort()
        return [f"{lab} {p}" for lab, p in rows]

    def __len__(self):
        return len(self.probs)


def entropy_of(pd: PatternDistribution):
    return pd.entropy()


def conditional_between(pd: PatternDistribution, subset):
    """H(F·α / F'·α) = H(F·α) - H(F'·α) for F' a subset of the support."""
    return pd.entropy() - pd.marginalize(subset).entropy()


# ---------------------------------------------------------------------------
# prefix-tree factor structure


@dataclass
class TreeFactors:
    """Per-node factorization of a pattern law over the prefix tree.

    nodes are in DFS order (identity first); node i's factor is a vector
    when dep[i] is None and otherwise a matrix whose rows are indexed by the
    label of the earlier node dep[i].  obs_of maps inner labels to observed
    labels (identity for non-factor systems).
    """

    nodes: tuple
    dep: tuple
    mats: tuple
    inner_labels: tuple
    obs_of: tuple | None
    obs_labels: tuple

    @property
    def identity_map(self) -> bool:
        return self.obs_of is None

    def children(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in self.nodes]
        for i, d in enumerate(self.dep):
            if d is not None:
                out[d].append(i)
        return out


def _dfs_nodes(F) -> list[words.Word]:
    children: dict[words.Word, list[words.Word]] = {w: [] for w in F}
    for w in F:
        if w:
            children[w[:-1]].append(w)
    for lst in children.values():
        lst.sort()
    out: list[words.Word] = []
    stack = [words.EMPTY]
    while stack:
        w = stack.pop()
        out.append(w)
        stack.extend(reversed(children[w]))
    return out


def _coset_representative(w: words.Word, marked: int) -> words.Word:
    lo, hi = 2 * marked, 2 * marked + 1
    while w and w[-1] in (lo, hi):
        w = w[:-1]
    return w


def _tree_factors(spec, F, as_float: bool) -> TreeFactors:
    """Factor structure for a prefix-closed pattern set."""
    nodes = _dfs_nodes(F)
    pos = {w: i for i, w in enumerate(nodes)}
    conv = float if as_float else (lambda x: x)

    inner = spec.inner if isinstance(spec, HiddenMarkovSpec) else spec
    inner_labels = canonical_labels(inner)
    n = len(inner_labels)

    dep: list = []
    mats: list = []
    if isinstance(inner, BernoulliSpec):
        base = tuple(conv(inner.base.weight(l)) for l in inner_labels)
        dep = [None] * len(nodes)
        mats = [base] * len(nodes)
    elif isinstance(inner, MarkovSpec):
        pi = tuple(conv(v) for v in inner.stationary)
        trans = [tuple(tuple(conv(v) for v in row) for row in m) for m in inner.transitions]
        for w in nodes:
            if not w:
                dep.append(None)
                mats.append(pi)
            else:
                dep.append(pos[w[:-1]])
                mats.append(trans[w[-1]])
    elif isinstance(inner, CosetBernoulliSpec):
        base = tuple(conv(inner.base.weight(l)) for l in inner_labels)
        one, zero = (1.0, 0.0) if as_float else (Fraction(1), Fraction(0))
        eye = tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))
        for w in nodes:
            rep = _coset_representative(w, inner.marked)
            if rep == w:
                dep.append(None)
                mats.append(base)
            else:
                dep.append(pos[rep])
                mats.append(eye)
    else:
        raise FInvariantError(f"no tree factorization for {type(inner).__name__}")

    if isinstance(spec, HiddenMarkovSpec):
        obs_labels = canonical_labels(spec)
        obs_index = {l: i for i, l in enumerate(obs_labels)}
        mapped = dict(spec.letter_map)
        obs_of = tuple(obs_index[mapped[l]] for l in inner_labels)
    else:
        obs_labels = inner_labels
        obs_of = None
    return TreeFactors(tuple(nodes), tuple(dep), tuple(mats), inner_labels, obs_of, obs_labels)


# ---------------------------------------------------------------------------
# exact tree chain rule (identity-map systems, prefix-closed sets)


def _row_entropy_terms(spec, mode: str) -> dict[int, object]:
    """c_t = Σ_a π(a)·H(P_t(a,·)) for each letter t of a Markov system."""
    out = {}
    for letter, m in enumerate(spec.transitions):
        total = LogValue.zero() if mode == RATIONAL else 0.0
        for a, pi_a in enumerate(spec.stationary):
            if not pi_a:
                continue
            row = m[a] if mode == RATIONAL else tuple(float(v) for v in m[a])
            total = total + entropy_of_weights(row, mode) * (pi_a if mode == RATIONAL else float(pi_a))
        out[letter] = total
    return out


def _chain_rule_entropy(spec, F, mode: str):
    if isinstance(spec, BernoulliSpec):
        weights = [v for _, v in spec.base.pairs]
        if mode == FLOAT:
            weights = [float(v) for v in weights]
        h = entropy_of_weights(weights, mode)
        return h * len(F) if mode == RATIONAL else h * float(len(F))
    if isinstance(spec, MarkovSpec):
        pi = spec.stationary if mode == RATIONAL else tuple(float(v) for v in spec.stationary)
        total = entropy_of_weights(pi, mode)
        c = _row_entropy_terms(spec, mode)
        for w in sorted(F):
            if w:
                total = total + c[w[-1]]
        return total
    if isinstance(spec, CosetBernoulliSpec):
        weights = [v for _, v in spec.base.pairs]
        if mode == FLOAT:
            weights = [float(v) for v in weights]
        h = entropy_of_weights(weights, mode)
        classes = {_coset_representative(w, spec.marked) for w in F}
        return h * len(classes) if mode == RATIONAL else h * float(len(classes))
    raise FInvariantError(f"no chain rule for {type(spec).__name__}")


# ---------------------------------------------------------------------------
# materializing DP engines


def _dict_patterns_identity(factors: TreeFactors, cap: int):
    """Sparse rational DP for identity-map systems; keys follow DFS order."""
    states: dict[tuple, Fraction] = {(): Fraction(1)}
    for i in range(len(factors.nodes)):
        mat, d = factors.mats[i], factors.dep[i]
        new: dict[tuple, Fraction] = {}
        for key, p in states.items():
            row = mat if d is None else mat[key[d]]
            for b, wgt in enumerate(row):
                if wgt:
                    new[key + (b,)] = p * wgt
        states = new
        if len(states) > cap:
            raise PatternCapExceeded(f"{len(states)} patterns exceed the pattern cap {cap}")
    return states


def _dict_patterns_hidden(factors: TreeFactors, cap: int):
    """Sparse rational DP for letter-map factors.

    Keys are (observed pattern, open inner labels); a node's inner label
    stays open until its last dependent is processed, then merges out.
    """
    children = factors.children()
    last_use = [max(ch) if ch else -1 for ch in children]
    close_after: list[list[int]] = [[] for _ in factors.nodes]
    for v, last in enumerate(last_use):
        if last >= 0:
            close_after[last].append(v)
    slots: dict[int, int] = {}
    states: dict[tuple, Fraction] = {((), ()): Fraction(1)}
    for i in range(len(factors.nodes)):
        mat, d = factors.mats[i], factors.dep[i]
        keep = bool(children[i])
        new: dict[tuple, Fraction] = {}
        for (obs, inner), p in states.items():
            row = mat if d is None else mat[inner[slots[d]]]
            for b, wgt in enumerate(row):
                if not wgt:
                    continue
                key = (obs + (factors.obs_of[b],), inner + (b,) if keep else inner)
                new[key] = new.get(key, Fraction(0)) + p * wgt
        if keep:
            slots[i] = len(slots)
        for v in close_after[i]:
            j = slots.pop(v)
            slots = {u: (s if s < j else s - 1) for u, s in slots.items()}
            merged: dict[tuple, Fraction] = {}
            for (obs, inner), p in new.items():
                key = (obs, inner[:j] + inner[j + 1 :])
                merged[key] = merged.get(key, Fraction(0)) + p
            new = merged
        states = new
        if len(states) > cap:
            raise PatternCapExceeded(f"{len(states)} states exceed the pattern cap {cap}")
    return {obs: p for (obs, _), p in states.items()}


def _array_patterns_identity(factors: TreeFactors) -> np.ndarray:
    """Dense float DP for identity-map systems; axis i = node i (DFS order)."""
    n = len(factors.inner_labels)
    arr = np.array(1.0)
    for i in range(len(factors.nodes)):
        mat, d = factors.mats[i], factors.dep[i]
        if d is None:
            fac = np.asarray(mat, dtype=np.float64).reshape((1,) * i + (n,))
        else:
            fac = np.asarray(mat, dtype=np.float64).reshape(
                tuple(n if ax == d else 1 for ax in range(i)) + (n,)
            )
        arr = arr[..., None] * fac
    return arr


def _hidden_block_dp(factors: TreeFactors, fixed: tuple) -> np.ndarray:
    """Float sum-product over the prefix tree with leading observed labels fixed.

    The state is a (P, M) array: P indexes observed patterns of the free
    nodes processed so far (first processed = most significant digit) and M
    indexes inner labels of the open slots (insertion order, most significant
    first).  A node's inner slot opens while it still has unprocessed
    dependents and is summed out right after its last dependent.  With
    ``fixed = ()`` this materializes the whole observed law.
    """
    n_a = len(factors.inner_labels)
    n_o = len(factors.obs_labels)
    children = factors.children()
    close_after: list[list[int]] = [[] for _ in factors.nodes]
    for v, ch in enumerate(children):
        if ch:
            close_after[max(ch)].append(v)
    mmap = np.zeros((n_a, n_o))
    for a, o in enumerate(factors.obs_of):
        mmap[a, o] = 1.0

    arr = np.ones((1, 1))
    slots: dict[int, int] = {}
    for i in range(len(factors.nodes)):
        d = factors.dep[i]
        keep = bool(children[i])
        mat = np.asarray(factors.mats[i], dtype=np.float64)
        p_dim, m_dim = arr.shape
        if d is None:
            w = mat[:, None] * mmap  # (A, O)
            if i < len(fixed):
                col = w[:, fixed[i]]
                if keep:
                    arr = (arr[:, :, None] * col).reshape(p_dim, m_dim * n_a)
                else:
                    arr = arr * col.sum()
            else:
                if keep:
                    arr = np.einsum("pm,ao->poma", arr, w).reshape(p_dim * n_o, m_dim * n_a)
                else:
                    arr = np.einsum("pm,o->pom", arr, w.sum(axis=0)).reshape(p_dim * n_o, m_dim)
        else:
            j = slots[d]
            m1 = n_a**j
            m2 = m_dim // (m1 * n_a)
            view = arr.reshape(p_dim, m1, n_a, m2)
            w3 = mat[:, :, None] * mmap[None, :, :]  # (A_dep, A, O)
            if i < len(fixed):
                sel = w3[:, :, fixed[i]]  # (A_dep, A)
                if keep:
                    out = np.einsum("pxay,ab->pxayb", view, sel)
                    arr = out.reshape(p_dim, m_dim * n_a)
                else:
                    out = np.einsum("pxay,a->pxay", view, sel.sum(axis=1))
                    arr = out.reshape(p_dim, m_dim)
            else:
                if keep:
                    out = np.einsum("pxay,abo->poxayb", view, w3)
                    arr = out.reshape(p_dim * n_o, m_dim * n_a)
                else:
                    out = np.einsum("pxay,ao->poxay", view, w3.sum(axis=1))
                    arr = out.reshape(p_dim * n_o, m_dim)
        if keep:
            slots[i] = len(slots)
        for v in close_after[i]:
            j = slots.pop(v)
            slots = {u: (s if s < j else s - 1) for u, s in slots.items()}
            p_dim, m_dim = arr.shape
            m1 = n_a**j
            m2 = m_dim // (m1 * n_a)
            arr = arr.reshape(p_dim, m1, n_a, m2).sum(axis=2).reshape(p_dim, m1 * m2)
    return arr.reshape(-1)


def _hidden_float_entropy(factors: TreeFactors, opts: EngineOptions) -> float:
    n_obs = len(factors.obs_labels)
    total = n_obs ** len(factors.nodes)
    if total > opts.stream_cap:
        raise PatternCapExceeded(f"{total} patterns exceed the stream cap {opts.stream_cap}")
    fixed_count = 0
    block = total
    while block > STREAM_BLOCK:
        block //= n_obs
        fixed_count += 1

    def partial(block_index: int) -> float:
        digits = []
        rem = block_index
        for _ in range(fixed_count):
            digits.append(rem % n_obs)
            rem //= n_obs
        fixed = tuple(reversed(digits))
        return sums.entropy_nats(_hidden_block_dp(factors, fixed))

    n_blocks = n_obs**fixed_count
    return sums.combine_blocks(partial, n_blocks, opts.threads)


# ---------------------------------------------------------------------------
# public operations


def _check_pattern_set(F) -> tuple[words.Word, ...]:
    F = set(F)
    if words.EMPTY not in F:
        raise DisconnectedSet(
            "the pattern set must contain the identity", hull=words.prefix_closure(F)
        )
    if not words.is_prefix_closed(F):
        hull = words.prefix_closure(F)
        missing = sorted(hull - F, key=words.sort_key)
        raise DisconnectedSet(
            "pattern set is not prefix-closed (tree factorization needs the "
            f"connected hull; add {', '.join(words.word_to_str(w) for w in missing)})",
            hull=hull,
        )
    return words.sorted_words(F)


def _dense_size(n_labels: int, n_nodes: int) -> int:
    return n_labels**n_nodes


def _materialize_mode(spec, n_labels: int, n_nodes: int, opts: EngineOptions) -> str:
    mode = resolve_mode(spec, opts)
    dense = _dense_size(n_labels, n_nodes)
    if dense > opts.pattern_cap:
        raise PatternCapExceeded(
            f"|labels|^|F| = {dense} exceeds the pattern cap {opts.pattern_cap}"
        )
    if mode == RATIONAL and opts.mode == "auto" and dense > RATIONAL_AUTO_MAX:
        return FLOAT
    return mode


def _pd_from_dict(spec, support, nodes, probs, mode) -> PatternDistribution:
    """Re-key a DFS-ordered pattern dict onto the ≼-sorted support."""
    pos = {w: i for i, w in enumerate(nodes)}
    perm = [pos[w] for w in support]
    labels = canonical_labels(spec)
    out = {tuple(key[p] for p in perm): v for key, v in probs.items()}
    return PatternDistribution(support, labels, out, mode)


def _marginal_tree(spec, support, opts: EngineOptions) -> PatternDistribution:
    n_labels = len(canonical_labels(spec))
    mode = _materialize_mode(spec, n_labels, len(support), opts)
    factors = _tree_factors(spec, support, as_float=(mode == FLOAT))
    nodes = list(factors.nodes)
    if mode == RATIONAL:
        if factors.identity_map:
            probs = _dict_patterns_identity(factors, opts.pattern_cap)
        else:
            probs = _dict_patterns_hidden(factors, opts.pattern_cap)
        return _pd_from_dict(spec, support, nodes, probs, RATIONAL)
    if factors.identity_map:
        arr = _array_patterns_identity(factors).reshape(-1)
    else:
        arr = _hidden_block_dp(factors, ())
    n = n_labels
    probs = {}
    nz = np.nonzero(arr)[0]
    width = len(nodes)
    for flat in nz:
        key = []
        rem = int(flat)
        for _ in range(width):
            key.append(rem % n)
            rem //= n
        probs[tuple(reversed(key))] = float(arr[flat])
    return _pd_from_dict(spec, support, nodes, probs, FLOAT)


def _marginal_finite_action(spec: FiniteActionSpec, support, mode) -> PatternDistribution:
    labels = canonical_labels(spec)
    index = {l: i for i, l in enumerate(labels)}
    probs: dict = {}
    for x in range(len(spec.points)):
        w = spec.mass.weight(spec.points[x])
        if mode == FLOAT:
            w = float(w)
        if not w:
            continue
        key = tuple(
            index[point_label(spec, act_word(spec, words.inverse(g), x))] for g in support
        )
        probs[key] = probs.get(key, 0) + w
    return PatternDistribution(support, labels, probs, mode)


def _marginal_direct_sum(spec: DirectSumSpec, support, opts: EngineOptions) -> PatternDistribution:
    labels = canonical_labels(spec)
    index = {l: i for i, l in enumerate(labels)}
    mode = resolve_mode(spec, opts)
    child_opts = replace(opts, mode=mode)
    probs: dict = {}
    for i, (w, comp) in enumerate(spec.components):
        sub = marginal(comp, support, child_opts)
        if mode == FLOAT:
            w = float(w)
        for key, p in sub.probs.items():
            tagged = tuple(index[(i, sub.labels[b])] for b in key)
            probs[tagged] = w * p
    return PatternDistribution(support, labels, probs, mode)


def marginal(spec, F, opts: EngineOptions = DEFAULT_OPTIONS) -> PatternDistribution:
    """Exact joint law of the canonical partition over a prefix-closed set F.

    Rejects sets missing the identity or not prefix-closed (the exception
    carries the hull); use ``marginal_restricted`` to compute on the hull and
    restrict.
    """
    require_valid(spec)
    support = _check_pattern_set(F)
    if isinstance(spec, FiniteActionSpec):
        return _marginal_finite_action(spec, support, resolve_mode(spec, opts))
    if isinstance(spec, DirectSumSpec):
        return _marginal_direct_sum(spec, support, opts)
    return _marginal_tree(spec, support, opts)


def marginal_restricted(spec, F, opts: EngineOptions = DEFAULT_OPTIONS) -> PatternDistribution:
    """Joint law over an arbitrary finite set: hull, materialize, restrict."""
    F = list(F)
    hull = words.prefix_closure(F)
    return marginal(spec, hull, opts).marginalize(words.sorted_words(F))


def oracle_marginal(spec, F, opts: EngineOptions = DEFAULT_OPTIONS) -> PatternDistribution:
    """Same contract as marginal(), by brute-force enumeration.

    Every label assignment over F is enumerated and its probability computed
    from scratch (parents re-derived by word slicing, hidden labels pushed
    through the letter map), with no tree factorization or incremental reuse.
    """
    import itertools

    require_valid(spec)
    support = _check_pattern_set(F)
    mode = resolve_mode(spec, opts)

    if isinstance(spec, FiniteActionSpec):
        labels = canonical_labels(spec)
        index = {l: i for i, l in enumerate(labels)}
        probs: dict = {}
        for x in range(len(spec.points)):
            w = spec.mass.weight(spec.points[x])
            if mode == FLOAT:
                w = float(w)
            if not w:
                continue
            key = []
            for g in support:
                y = x
                for letter in reversed(words.inverse(g)):
                    y = act_letter(spec, letter, y)
                key.append(index[point_label(spec, y)])
            key = tuple(key)
            probs[key] = probs.get(key, 0) + w
        return PatternDistribution(support, labels, probs, mode)

    if isinstance(spec, DirectSumSpec):
        labels = canonical_labels(spec)
        index = {l: i for i, l in enumerate(labels)}
        child_opts = replace(opts, mode=mode)
        probs = {}
        for i, (w, comp) in enumerate(spec.components):
            sub = oracle_marginal(comp, support, child_opts)
            if mode == FLOAT:
                w = float(w)
            for key, p in sub.probs.items():
                tagged = tuple(index[(i, sub.labels[b])] for b in key)
                probs[tagged] = w * p
        return PatternDistribution(support, labels, probs, mode)

    inner = spec.inner if isinstance(spec, HiddenMarkovSpec) else spec
    inner_labels = canonical_labels(inner)
    n_inner = len(inner_labels)
    total = n_inner ** len(support)
    if total > opts.oracle_cap:
        raise PatternCapExceeded(
            f"oracle enumeration of {total} inner patterns exceeds the cap {opts.oracle_cap}"
        )
    conv = float if mode == FLOAT else (lambda v: v)
    pos = {w: i for i, w in enumerate(support)}

    def inner_probability(assign) -> object:
        if isinstance(inner, BernoulliSpec):
            p = conv(Fraction(1)) if mode == RATIONAL else 1.0
            for b in assign:
                p = p * conv(inner.base.weight(inner_labels[b]))
            return p
        if isinstance(inner, MarkovSpec):
            p = conv(inner.stationary[assign[pos[words.EMPTY]]])
            for w in support:
                if w:
                    row = inner.transitions[w[-1]][assign[pos[w[:-1]]]]
                    p = p * conv(row[assign[pos[w]]])
            return p
        if isinstance(inner, CosetBernoulliSpec):
            p = conv(Fraction(1)) if mode == RATIONAL else 1.0
            seen: dict = {}
            for w in support:
                rep = _coset_representative(w, inner.marked)
                b = assign[pos[w]]
                if rep in seen:
                    if seen[rep] != b:
                        return None
                else:
                    seen[rep] = b
                    p = p * conv(inner.base.weight(inner_labels[b]))
            return p
        raise FInvariantError(f"oracle cannot enumerate {type(inner).__name__}")

    if isinstance(spec, HiddenMarkovSpec):
        obs_labels = canonical_labels(spec)
        obs_index = {l: i for i, l in enumerate(obs_labels)}
        mapped = dict(spec.letter_map)
        push = [obs_index[mapped[l]] for l in inner_labels]
    else:
        obs_labels = inner_labels
        push = list(range(n_inner))

    probs = {}
    for assign in itertools.product(range(n_inner), repeat=len(support)):
        p = inner_probability(assign)
        if p is None or not p:
            continue
        key = tuple(push[b] for b in assign)
        probs[key] = probs.get(key, 0) + p
    return PatternDistribution(support, obs_labels, probs, mode)


# ---------------------------------------------------------------------------
# joint entropies of pattern sets

_ENTROPY_CACHE: dict = {}


def set_entropy(spec, F, opts: EngineOptions = DEFAULT_OPTIONS, sigma: str | None = None):
    """H(F·α) (or H(F·α / ξ) with sigma="components" on a direct sum).

    Prefix-closed sets on identity-map systems use the exact tree chain
    rule; hidden-Markov sets materialize below the pattern cap and stream in
    deterministic float blocks above it; everything else materializes on the
    prefix closure and restricts.
    """
    require_valid(spec)
    if sigma not in (None, "components"):
        raise FInvariantError(f"unknown invariant partition {sigma!r}")
    if sigma == "components" and not isinstance(spec, DirectSumSpec):
        raise FInvariantError("sigma=components needs a direct-sum system")
    F = frozenset(F)
    key = (spec, F, opts.mode, opts.pattern_cap, opts.stream_cap, sigma)
    cached = _ENTROPY_CACHE.get(key)
    if cached is not None:
        return cached
    value = _set_entropy_uncached(spec, F, opts, sigma)
    _ENTROPY_CACHE[key] = value
    return value


def _set_entropy_uncached(spec, F, opts: EngineOptions, sigma: str | None):
    if isinstance(spec, DirectSumSpec):
        mode = resolve_mode(spec, opts)
        mix = LogValue.zero() if mode == RATIONAL else 0.0
        for w, comp in spec.components:
            h = set_entropy(comp, F, opts)
            mix = mix + h * (w if mode == RATIONAL else float(w))
        if sigma == "components":
            return mix
        tau = [w for w, _ in spec.components]
        if mode == FLOAT:
            tau = [float(w) for w in tau]
        return entropy_of_weights(tau, mode) + mix

    if isinstance(spec, FiniteActionSpec):
        mode = resolve_mode(spec, opts)
        pd = _marginal_finite_action(spec, words.sorted_words(F), mode)
        return pd.entropy()

    if not (words.EMPTY in F and words.is_prefix_closed(F)):
        return marginal_restricted(spec, F, opts).entropy()

    support = words.sorted_words(F)
    mode = resolve_mode(spec, opts)
    if not isinstance(spec, HiddenMarkovSpec):
        return _chain_rule_entropy(spec, F, mode)

    n_labels = len(canonical_labels(spec))
    dense = _dense_size(n_labels, len(support))
    if mode == RATIONAL and dense > opts.pattern_cap:
        if opts.mode == RATIONAL:
            raise PatternCapExceeded(
                f"|labels|^|F| = {dense} exceeds the pattern cap {opts.pattern_cap} in rational mode"
            )
        mode = FLOAT
    if mode == RATIONAL and opts.mode == "auto" and dense > RATIONAL_AUTO_MAX:
        mode = FLOAT
    if mode == RATIONAL:
        factors = _tree_factors(spec, support, as_float=False)
        probs = _dict_patterns_hidden(factors, opts.pattern_cap)
        return entropy_of_weights(probs.values(), RATIONAL)
    factors = _tree_factors(spec, support, as_float=True)
    return _hidden_float_entropy(factors, opts)


def joint_set_entropy(spec, *sets, opts: EngineOptions = DEFAULT_OPTIONS, sigma: str | None = None):
    """H((F_1 ∪ ... ∪ F_k)·α [/ ξ]) -- the entropy of a join of translates."""
    union: set = set()
    for s in sets:
        union |= set(s)
    return set_entropy(spec, union, opts, sigma)
