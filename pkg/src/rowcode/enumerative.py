"""Enumerative coding of constant-weight binary words.

Two codecs share one ranking scheme (lexicographic, ones first):

* the exact codec uses true binomial coefficients;
* the fast codec replaces each binomial by ``ibinom(k, c)``, the ceiling of a
  short product/quotient of low-precision floats (``SoftFloat``) taken from two
  look-up tables, scaled down by ``f(c) = 1 - (32 c + 16) / 2**mu`` so that the
  recursion never runs out of codewords.

Words are tuples of 0/1 ints.  Internally the coders work on the positions of
the ones.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


class SoftFloat:
    """Positive float ``a * 2**b`` with ``2**mu <= a < 2**(mu+1)``.

    Rounding is half-up on the mantissa after normalization.
    """

    __slots__ = ("a", "b", "mu", "eps")

    def __init__(self, a: int, b: int, mu: int = 24, eps: int = 32):
        if not (1 << mu) <= a < (1 << (mu + 1)):
            raise ValueError(f"mantissa {a} not normalized for mu={mu}")
        if not -(1 << (eps - 1)) <= b < (1 << (eps - 1)):
            raise OverflowError(f"exponent {b} does not fit in {eps} bits")
        self.a, self.b, self.mu, self.eps = a, b, mu, eps

    @classmethod
    def _normalized(cls, x: int, shift: int, mu: int, eps: int) -> "SoftFloat":
        # value = x * 2**shift, x > 0 integer
        s = x.bit_length() - (mu + 1)
        if s > 0:
            x = (x + (1 << (s - 1))) >> s
            if x >> (mu + 1):
                x >>= 1
                s += 1
        else:
            x <<= -s
        return cls(x, shift + s, mu, eps)

    @classmethod
    def from_int(cls, x: int, mu: int = 24, eps: int = 32) -> "SoftFloat":
        if x <= 0:
            raise ValueError("only positive values are representable")
        return cls._normalized(x, 0, mu, eps)

    @classmethod
    def from_fraction(cls, x: Fraction, mu: int = 24, eps: int = 32) -> "SoftFloat":
        x = Fraction(x)
        if x <= 0:
            raise ValueError("only positive values are representable")
        k = mu - (x.numerator.bit_length() - x.denominator.bit_length())
        while x * Fraction(2) ** k < (1 << mu):
            k += 1
        while x * Fraction(2) ** k >= (1 << (mu + 1)):
            k -= 1
        q = math.floor(x * Fraction(2) ** k + Fraction(1, 2))
        if q >> (mu + 1):
            q >>= 1
            k -= 1
        return cls(q, -k, mu, eps)

    def __mul__(self, other: "SoftFloat") -> "SoftFloat":
        return SoftFloat._normalized(self.a * other.a, self.b + other.b, self.mu, self.eps)

    def __truediv__(self, other: "SoftFloat") -> "SoftFloat":
        mu = self.mu
        k = mu if self.a >= other.a else mu + 1
        q = _div_round(self.a << k, other.a)
        return SoftFloat._normalized(q, self.b - other.b - k, mu, self.eps)

    def ceil(self) -> int:
        if self.b >= 0:
            return self.a << self.b
        return -((-self.a) >> -self.b)

    def to_fraction(self) -> Fraction:
        return Fraction(self.a) * Fraction(2) ** self.b

    def __float__(self) -> float:
        return math.ldexp(self.a, self.b)

    def __eq__(self, other) -> bool:
        return isinstance(other, SoftFloat) and (self.a, self.b) == (other.a, other.b)

    def __hash__(self) -> int:
        return hash((self.a, self.b))

    def __repr__(self) -> str:
        return f"SoftFloat({self.a}, {self.b})"


def _div_round(num: int, den: int) -> int:
    return (2 * num + den) // (2 * den)


def correction_factor(chi: int, mu: int) -> Fraction:
    """``f(chi) = 1 - (32 chi + 16) / 2**mu``."""
    return 1 - Fraction(32 * chi + 16, 1 << mu)


class EnumTables:
    """Look-up tables for the fast codec: floats of ``k!`` and of ``f(c)``.

    Also caches prefix sums of ``ibinom`` down each column, which turn the
    linear scan of the encoder into a binary search.
    """

    def __init__(self, n_max: int, delta_max: int | None = None, mu: int = 24, eps: int = 32):
        if delta_max is None:
            delta_max = n_max
        if mu < 10:
            raise ValueError("mantissa must have at least 10 bits")
        if correction_factor(delta_max, mu) < Fraction(1, 2):
            raise ValueError(f"mu={mu} too small for weights up to {delta_max}")
        self.n_max, self.delta_max, self.mu, self.eps = n_max, delta_max, mu, eps
        facts = []
        x = 1
        for k in range(n_max + 1):
            if k:
                x *= k
            facts.append(SoftFloat.from_int(x, mu, eps))
        self.factorials = facts
        self.corrections = [
            SoftFloat.from_fraction(correction_factor(c, mu), mu, eps) for c in range(delta_max + 1)
        ]
        self.columns = _Columns(self._build_column)

    def f_binom(self, kappa: int, chi: int) -> SoftFloat:
        fa = self.factorials
        return (fa[kappa] * self.corrections[chi]) / (fa[chi] * fa[kappa - chi])

    def ibinom(self, kappa: int, chi: int) -> int:
        if not 0 <= chi <= kappa:
            raise ValueError(f"need 0 <= chi <= kappa, got ({kappa}, {chi})")
        if kappa > self.n_max or chi > self.delta_max:
            raise IndexError(f"({kappa}, {chi}) exceeds table sizes ({self.n_max}, {self.delta_max})")
        return self.f_binom(kappa, chi).ceil()

    def prefix(self, chi: int) -> list[int]:
        """``col[x] = sum(ibinom(k, chi) for chi <= k <= x)`` for every ``x <= n_max``."""
        return self.columns[chi]

    def _build_column(self, chi: int) -> list[int]:
        col, s = [], 0
        for k in range(self.n_max + 1):
            if k >= chi:
                s += self.ibinom(k, chi)
            col.append(s)
        return col


class _Columns(dict):
    """Lazily built prefix-sum columns, keyed by weight."""

    def __init__(self, build):
        super().__init__()
        self._build = build

    def __missing__(self, chi):
        col = self[chi] = self._build(chi)
        return col


def soft_binom(kappa: int, chi: int, tables: EnumTables) -> int:
    return tables.ibinom(kappa, chi)


def exact_binom(n: int, k: int) -> int:
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got ({n}, {k})")
    return math.comb(n, k)


class _HockeyStick:
    __slots__ = ("chi",)

    def __init__(self, chi: int):
        self.chi = chi

    def __getitem__(self, x: int) -> int:
        return math.comb(x + 1, self.chi + 1)


def _encode_ones(n: int, delta: int, psi: int, columns) -> list[int]:
    # Each iteration places one '1'.  Skipping iota-1 zeros costs the sum of
    # count(n - i, delta - 1) for i < iota, which is a difference of two prefix
    # sums; the first iota whose block contains psi is found by bisection.
    ones = []
    end = n  # word length; n counts the positions still free
    while delta:
        delta -= 1
        col = columns[delta]
        y = col[n - 1] - psi
        n = bisect_left(col, y, 0, n - 1)
        ones.append(end - n - 1)
        psi = col[n] - y
    return ones


def _decode_ones(n: int, delta: int, ones: Sequence[int], columns) -> int:
    psi = 0
    end = n
    for p in ones:
        delta -= 1
        col = columns[delta]
        m = end - p - 1
        psi += col[n - 1] - col[m]
        n = m
    return psi


def _word(n: int, ones: Sequence[int]) -> tuple[int, ...]:
    w = [0] * n
    for p in ones:
        w[p] = 1
    return tuple(w)


def _ones(word: Sequence[int]) -> list[int]:
    return [i for i, b in enumerate(word) if b]


class ExactCodec:
    """Lexicographic ranking of weight-``delta`` words with true binomials."""

    columns = _Columns(_HockeyStick)

    def count(self, n: int, delta: int) -> int:
        return exact_binom(n, delta)

    def encode_ones(self, n: int, delta: int, psi: int) -> list[int]:
        if not 0 <= psi < self.count(n, delta):
            raise ValueError(f"psi={psi} out of range for ({n}, {delta})")
        return _encode_ones(n, delta, psi, self.columns)

    def decode_ones(self, n: int, delta: int, ones: Sequence[int]) -> int:
        return _decode_ones(n, delta, ones, self.columns)

    def encode(self, n: int, delta: int, psi: int) -> tuple[int, ...]:
        return _word(n, self.encode_ones(n, delta, psi))

    def decode(self, word: Sequence[int]) -> int:
        ones = _ones(word)
        return self.decode_ones(len(word), len(ones), ones)


class FastCodec:
    """Enumerative codec driven by ``ibinom`` from :class:`EnumTables`."""

    def __init__(self, tables: EnumTables):
        self.tables = tables

    @classmethod
    def for_size(cls, n_max: int, mu: int = 24, eps: int = 32) -> "FastCodec":
        return cls(EnumTables(n_max, n_max, mu, eps))

    def count(self, n: int, delta: int) -> int:
        return self.tables.ibinom(n, delta)

    def encode_ones(self, n: int, delta: int, psi: int) -> list[int]:
        if not 0 <= psi < self.count(n, delta):
            raise ValueError(f"psi={psi} out of range for ({n}, {delta})")
        return _encode_ones(n, delta, psi, self.tables.columns)

    def decode_ones(self, n: int, delta: int, ones: Sequence[int]) -> int:
        return _decode_ones(n, delta, ones, self.tables.columns)

    def encode(self, n: int, delta: int, psi: int) -> tuple[int, ...]:
        return _word(n, self.encode_ones(n, delta, psi))

    def decode(self, n: int, delta: int, word: Sequence[int]) -> int:
        ones = _ones(word)
        if len(word) != n or len(ones) != delta:
            raise ValueError("word does not have the stated length and weight")
        return self.decode_ones(n, delta, ones)


def exact_encode(n: int, delta: int, psi: int) -> tuple[int, ...]:
    return ExactCodec().encode(n, delta, psi)


def exact_decode(word: Sequence[int]) -> int:
    return ExactCodec().decode(word)


def fast_encode(n: int, delta: int, psi: int, tables: EnumTables) -> tuple[int, ...]:
    return FastCodec(tables).encode(n, delta, psi)


def fast_decode(n: int, delta: int, word: Sequence[int], tables: EnumTables) -> int:
    return FastCodec(tables).decode(n, delta, word)


def enum_encode_scan(n: int, delta: int, psi: int, count) -> tuple[int, ...]:
    """Direct transcription of the scanning encoder, for cross-checking.

    ``count(k, c)`` is the binomial-like function in use.
    """
    out: list[int] = []
    while True:
        if delta == 0:
            return tuple(out + [0] * n)
        for iota in range(1, n - delta + 2):
            c = count(n - iota, delta - 1)
            if psi >= c:
                psi -= c
            else:
                out += [0] * (iota - 1) + [1]
                n, delta = n - iota, delta - 1
                break
        else:
            raise ValueError("ran off the end of the word; psi out of range")


@dataclass(frozen=True)
class BinomBounds:
    lower: Fraction
    upper: Fraction


def roundoff_bounds(n: int, delta: int, mu: int) -> BinomBounds:
    """Interval guaranteed to contain the float binomial before the ceiling."""
    c = exact_binom(n, delta)
    return BinomBounds(
        lower=c * (1 - Fraction(32 * (delta + 1), 1 << mu)),
        upper=c * (1 - Fraction(32 * delta, 1 << mu)),
    )
