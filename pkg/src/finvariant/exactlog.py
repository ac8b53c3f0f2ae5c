"""Exact values in the rational span of logarithms of primes.

Every probability handled in rational mode is a positive Fraction, so every
Shannon entropy (and every linear combination of entropies appearing in the
entropy formulas) lies in the Q-vector space spanned by {log p : p prime}.
LogValue stores such an element canonically as a prime -> coefficient map,
which makes equality of entropy expressions decidable: two values are equal
exactly when their coefficient maps coincide.  This is what "exact in
rational mode" means throughout the package.

Ordering of unequal values is decided numerically at high precision
(mpmath); exact equality is always tested first, so the comparison never
misreads a true tie.
"""

from __future__ import annotations

import math
from fractions import Fraction

_FACTOR_CACHE: dict[int, dict[int, int]] = {}
_SMALL_PRIMES: list[int] = []


def _small_primes() -> list[int]:
    if not _SMALL_PRIMES:
        limit = 10000
        sieve = bytearray([1]) * (limit + 1)
        sieve[0:2] = b"\x00\x00"
        for p in range(2, int(limit**0.5) + 1):
            if sieve[p]:
                sieve[p * p :: p] = b"\x00" * len(sieve[p * p :: p])
        _SMALL_PRIMES.extend(i for i in range(limit + 1) if sieve[i])
    return _SMALL_PRIMES


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of a positive integer.

    Trial division covers products of small primes (the common case: pattern
    probabilities are products of user-supplied fractions); sympy's factorint
    is the fallback for any stubborn cofactor.
    """
    if n <= 0:
        raise ValueError("can only factor positive integers")
    cached = _FACTOR_CACHE.get(n)
    if cached is not None:
        return cached
    m = n
    out: dict[int, int] = {}
    for p in _small_primes():
        if p * p > m:
            break
        while m % p == 0:
            out[p] = out.get(p, 0) + 1
            m //= p
    if m > 1:
        if m < 10**8:
            out[m] = out.get(m, 0) + 1
        else:
            from sympy import factorint  # deferred: slow import, rare path

            for p, e in factorint(m).items():
                out[int(p)] = out.get(int(p), 0) + int(e)
    _FACTOR_CACHE[n] = out
    return out


class LogValue:
    """An exact rational combination of logarithms of primes (in nats)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict[int, Fraction] | None = None):
        self.coeffs = {p: c for p, c in (coeffs or {}).items() if c}

    @classmethod
    def zero(cls) -> "LogValue":
        return cls()

    @classmethod
    def log(cls, q) -> "LogValue":
        """log(q) for a positive rational q."""
        q = Fraction(q)
        if q <= 0:
            raise ValueError("log of a nonpositive rational")
        coeffs: dict[int, Fraction] = {}
        for p, e in factorize(q.numerator).items():
            coeffs[p] = coeffs.get(p, Fraction(0)) + e
        for p, e in factorize(q.denominator).items():
            coeffs[p] = coeffs.get(p, Fraction(0)) - e
        return cls(coeffs)

    @classmethod
    def nlogn_term(cls, p) -> "LogValue":
        """The entropy term -p*log(p) for a rational p in (0, 1]."""
        p = Fraction(p)
        return cls.log(p) * (-p)

    def __add__(self, other):
        if isinstance(other, LogValue):
            coeffs = dict(self.coeffs)
            for p, c in other.coeffs.items():
                coeffs[p] = coeffs.get(p, Fraction(0)) + c
            return LogValue(coeffs)
        if isinstance(other, (int, Fraction)) and other == 0:
            return self
        if isinstance(other, float):
            return float(self) + other
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return LogValue({p: -c for p, c in self.coeffs.items()})

    def __sub__(self, other):
        if isinstance(other, LogValue):
            return self + (-other)
        if isinstance(other, (int, Fraction)) and other == 0:
            return self
        if isinstance(other, float):
            return float(self) - other
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (int, Fraction)) and other == 0:
            return -self
        if isinstance(other, float):
            return other - float(self)
        return NotImplemented

    def __mul__(self, scalar):
        if isinstance(scalar, (int, Fraction)):
            if scalar == 0:
                return LogValue.zero()
            return LogValue({p: c * scalar for p, c in self.coeffs.items()})
        if isinstance(scalar, float):
            return float(self) * scalar
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (Fraction(1) / Fraction(scalar)) if isinstance(scalar, (int, Fraction)) else NotImplemented

    def __float__(self) -> float:
        return math.fsum(float(c) * math.log(p) for p, c in sorted(self.coeffs.items()))

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, LogValue):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)) and other == 0:
            return not self.coeffs
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def _cmp_key(self, other) -> int:
        """Sign of self - other; exact-zero is detected before evaluating."""
        if isinstance(other, float):
            mine = float(self)
            return (mine > other) - (mine < other)
        if isinstance(other, LogValue):
            diff = self - other
        elif isinstance(other, (int, Fraction)) and other == 0:
            diff = self
        else:
            raise TypeError(f"cannot compare LogValue with {other!r}")
        if not diff.coeffs:
            return 0
        import mpmath

        with mpmath.workdps(60):
            val = mpmath.fsum(
                mpmath.mpf(c.numerator) / c.denominator * mpmath.log(p)
                for p, c in sorted(diff.coeffs.items())
            )
        return 1 if val > 0 else -1

    def __lt__(self, other):
        return self._cmp_key(other) < 0

    def __le__(self, other):
        return self._cmp_key(other) <= 0

    def __gt__(self, other):
        return self._cmp_key(other) > 0

    def __ge__(self, other):
        return self._cmp_key(other) >= 0

    def __repr__(self) -> str:
        if not self.coeffs:
            return "LogValue(0)"
        parts = [f"{c}*log({p})" for p, c in sorted(self.coeffs.items())]
        return f"LogValue({' + '.join(parts)})"


ZERO = LogValue.zero()


def as_float(value) -> float:
    """Uniform float view of a float / LogValue / exact-zero value."""
    return float(value)
