"""Reduced-word algebra for the rank-r free group.

Words are stored as packed tuples of letter indices.  Letter ``2*i`` is the
i-th generator and letter ``2*i + 1`` is its inverse, so inversion flips the
low bit and the canonical total order on letters is ascending index
(s_1 < s_1^-1 < s_2 < s_2^-1 < ...).  The well-ordering on the group compares
word length first and breaks ties lexicographically with respect to a letter
order, which may be any permutation of the letters.

Two tree structures on the group coexist and both are used downstream:

* the left Cayley tree (edges g -- s*g), whose ``parent`` strips the leading
  letter; this is the tree underlying the well-ordering machinery and
  geodesics, and
* the prefix tree (edges g -- g*s), whose ``prefix_parent`` strips the
  trailing letter; shift-invariant tree-factorized measures factor over this
  tree, so pattern sets handed to the marginal engines must be prefix-closed.

Balls and ≼-initial segments of balls are closed for both trees.

ASCII serialization uses 'a', 'b', 'c', ... for generators with capitals for
inverses; the empty word serializes as "e".
"""

from __future__ import annotations

from .errors import BallCapExceeded, WordError

Word = tuple[int, ...]
LetterOrder = tuple[int, ...]

EMPTY: Word = ()

#: Hard cap on enumerated ball sizes; guards accidental blowup.
DEFAULT_BALL_CAP = 10**6

_MAX_RANK = 26  # one latin letter per generator


def inverse_letter(letter: int) -> int:
    return letter ^ 1


def letter_name(letter: int) -> str:
    """ASCII name of a letter: 'a' for s_1, 'A' for s_1^-1, 'b' for s_2, ..."""
    ch = chr(ord("a") + (letter >> 1))
    return ch.upper() if letter & 1 else ch


def parse_letter(ch: str, rank: int) -> int:
    low = ch.lower()
    if len(ch) != 1 or not ("a" <= low <= "z"):
        raise WordError(f"invalid letter {ch!r}")
    index = (ord(low) - ord("a")) << 1
    if ch.isupper():
        index |= 1
    if index >= 2 * rank:
        raise WordError(f"letter {ch!r} is outside rank {rank}")
    return index


def word_to_str(w: Word) -> str:
    return "e" if not w else "".join(letter_name(l) for l in w)


def word_from_str(text: str, rank: int) -> Word:
    """Parse an ASCII word and reduce it ("e" or "" is the identity)."""
    if text in ("e", ""):
        return EMPTY
    w: Word = EMPTY
    for ch in text:
        w = multiply(w, (parse_letter(ch, rank),))
    return w


def is_reduced(letters) -> bool:
    return all(letters[i] ^ 1 != letters[i + 1] for i in range(len(letters) - 1))


def multiply(u: Word, v: Word) -> Word:
    """Reduced product of two reduced words (cancellation at the junction)."""
    i = len(u)
    j = 0
    while i > 0 and j < len(v) and u[i - 1] == v[j] ^ 1:
        i -= 1
        j += 1
    return u[:i] + v[j:]


def inverse(w: Word) -> Word:
    return tuple(l ^ 1 for l in reversed(w))


def word_power(w: Word, n: int) -> Word:
    if n < 0:
        return word_power(inverse(w), -n)
    out = EMPTY
    for _ in range(n):
        out = multiply(out, w)
    return out


def identity_order(rank: int) -> LetterOrder:
    return tuple(range(2 * rank))


def check_order(order: LetterOrder, rank: int) -> LetterOrder:
    if sorted(order) != list(range(2 * rank)):
        raise WordError(f"letter order {order!r} is not a permutation of the {2 * rank} letters")
    return tuple(order)


def _letter_ranks(order: LetterOrder | None, rank: int) -> list[int]:
    if order is None:
        return list(range(2 * rank))
    ranks = [0] * (2 * rank)
    for pos, letter in enumerate(order):
        ranks[letter] = pos
    return ranks


def sort_key(w: Word, order: LetterOrder | None = None):
    """Sort key realizing the well-ordering: length, then letter ranks."""
    if order is None:
        return (len(w), w)
    ranks = _letter_ranks(order, max(order) // 2 + 1)
    return (len(w), tuple(ranks[l] for l in w))


def compare(u: Word, v: Word, order: LetterOrder | None = None) -> int:
    """Total order on reduced words: -1, 0 or 1."""
    ku, kv = sort_key(u, order), sort_key(v, order)
    return (ku > kv) - (ku < kv)


def ball_size(rank: int, n: int) -> int:
    """|B_n| in closed form: 1 + 2r((2r-1)^n - 1)/(2r-2) for r >= 2, 2n+1 for r = 1."""
    if rank == 1:
        return 2 * n + 1
    q = 2 * rank - 1
    return 1 + 2 * rank * (q**n - 1) // (q - 1)


class OrderedBall:
    """Ball of radius n, sorted by the well-ordering, with position lookup.

    ``elements[:index[g]]`` is exactly Pre(g) for any g in the ball.
    """

    __slots__ = ("rank", "radius", "order", "elements", "index")

    def __init__(self, rank: int, radius: int, order: LetterOrder | None, elements: tuple[Word, ...]):
        self.rank = rank
        self.radius = radius
        self.order = order
        self.elements = elements
        self.index = {w: i for i, w in enumerate(elements)}

    def sphere(self, n: int | None = None) -> tuple[Word, ...]:
        n = self.radius if n is None else n
        lo = ball_size(self.rank, n - 1) if n > 0 else 0
        return self.elements[lo:ball_size(self.rank, n)]

    def pre(self, g: Word) -> tuple[Word, ...]:
        return self.elements[: self.index[g]]

    def __len__(self) -> int:
        return len(self.elements)


_BALL_CACHE: dict[tuple[int, int, LetterOrder | None], OrderedBall] = {}


def ball(rank: int, n: int, order: LetterOrder | None = None, cap: int = DEFAULT_BALL_CAP) -> OrderedBall:
    """All reduced words of length <= n, sorted by the well-ordering.

    Memoized per (rank, radius, letter order).  Raises BallCapExceeded when
    the closed-form size is beyond ``cap`` before enumerating anything.
    """
    if rank < 1 or rank > _MAX_RANK:
        raise WordError(f"rank must be in [1, {_MAX_RANK}], got {rank}")
    if n < 0:
        raise WordError(f"radius must be nonnegative, got {n}")
    if order is not None:
        order = check_order(order, rank)
    size = ball_size(rank, n)
    if size > cap:
        raise BallCapExceeded(f"|B_{n}| = {size} exceeds the ball cap {cap}")
    key = (rank, n, order)
    cached = _BALL_CACHE.get(key)
    if cached is not None:
        return cached

    letters = list(order) if order is not None else list(range(2 * rank))
    elements: list[Word] = [EMPTY]
    layer: list[Word] = [EMPTY]
    for _ in range(n):
        nxt: list[Word] = []
        for w in layer:
            last = w[-1] if w else None
            for l in letters:
                if last is None or l != last ^ 1:
                    nxt.append(w + (l,))
        elements.extend(nxt)
        layer = nxt
    out = OrderedBall(rank, n, order, tuple(elements))
    _BALL_CACHE[key] = out
    return out


def sphere(rank: int, n: int, order: LetterOrder | None = None, cap: int = DEFAULT_BALL_CAP) -> tuple[Word, ...]:
    return ball(rank, n, order, cap).sphere()


def pre_set(rank: int, g: Word, order: LetterOrder | None = None, cap: int = DEFAULT_BALL_CAP) -> tuple[Word, ...]:
    """Pre(g): every word strictly below g in the well-ordering."""
    return ball(rank, len(g), order, cap).pre(g)


def parent(g: Word) -> tuple[int, Word]:
    """Leading letter s and p = s^-1 g, the left-Cayley-tree parent of g."""
    if not g:
        raise WordError("the identity has no parent")
    return g[0], g[1:]


def prefix_parent(g: Word) -> tuple[Word, int]:
    """Prefix p = g minus its trailing letter t, so g = p * t (prefix tree)."""
    if not g:
        raise WordError("the identity has no prefix parent")
    return g[:-1], g[-1]


def geodesic(u: Word, v: Word) -> list[Word]:
    """Vertices of the unique reduced left-Cayley path from u to v.

    Consecutive vertices differ by one left letter; the path descends from u
    to the longest common suffix and climbs back up to v.
    """
    common = 0
    while (
        common < len(u)
        and common < len(v)
        and u[len(u) - 1 - common] == v[len(v) - 1 - common]
    ):
        common += 1
    path = [u[i:] for i in range(len(u) - common + 1)]
    for i in range(len(v) - common - 1, -1, -1):
        path.append(v[i:])
    return path


def left_translate(g: Word, words) -> list[Word]:
    return [multiply(g, w) for w in words]


def prefix_closure(words) -> set[Word]:
    """Smallest prefix-closed superset (always contains the identity)."""
    out: set[Word] = {EMPTY}
    for w in words:
        for i in range(1, len(w) + 1):
            out.add(w[:i])
    return out


def is_prefix_closed(words) -> bool:
    pool = set(words)
    return EMPTY in pool and all(w[:-1] in pool for w in pool if w)


def sorted_words(words, order: LetterOrder | None = None) -> tuple[Word, ...]:
    return tuple(sorted(words, key=lambda w: sort_key(w, order)))
