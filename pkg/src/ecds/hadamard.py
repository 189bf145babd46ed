"""Hadamard-code structures: 2-probe inner products, majority
amplification, and the 1-probe equality scheme.

The length-2^s Hadamard encoding of x lists x.y mod 2 for every y in
{0,1}^s; position j holds the product with the y whose value is j-1.
Reading positions z and z^y and XORing recovers x.y through any
corruption that misses both probes, so the decoding error is at most
twice the corrupted fraction, for every flip pattern.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import numpy as np

from .bits import BitString, dot_mod2
from .errors import InfeasibleSizeError, ParameterError
from .oracle import Codeword, CorruptionPattern, ProbeOracle, Scheme

MAX_EXPONENT = 26  # 2^26 bits = 8 MiB packed; beyond that, refuse


class HadamardCode:
    """The [2^s, s] Hadamard code with 1-based positions."""

    def __init__(self, s: int):
        if s < 1:
            raise ParameterError("need s >= 1")
        if s > MAX_EXPONENT:
            raise InfeasibleSizeError("2^%d positions is beyond desk scale" % s)
        self.s = s
        self.length = 1 << s

    def encode_value(self, xv: int) -> np.ndarray:
        """Encoding of the message with value xv, as a 0/1 uint8 array."""
        if not 0 <= xv < self.length:
            raise ParameterError("message value out of range")
        vals = np.arange(self.length, dtype=np.uint64)
        return (np.bitwise_count(vals & np.uint64(xv)) & 1).astype(np.uint8)

    def encode(self, x: BitString) -> BitString:
        if x.n != self.s:
            raise ParameterError("message length does not match s")
        return BitString.from_bit_array(self.encode_value(x.value))

    def position_of(self, z: int) -> int:
        """Codeword position holding the product with value-z queries."""
        if not 0 <= z < self.length:
            raise ParameterError("query value out of range")
        return z + 1

    def query_of_position(self, pos: int) -> BitString:
        if not 1 <= pos <= self.length:
            raise ParameterError("position out of range")
        return BitString.from_int(self.s, pos - 1)

    def min_distance(self) -> int:
        # every nonzero message hits exactly half the positions
        return self.length // 2


def ip_with_coin(oracle: ProbeOracle, y: BitString, z: int) -> int:
    """Two-probe inner-product decode using the fixed offset z."""
    return oracle.probe(z + 1) ^ oracle.probe((z ^ y.value) + 1)


def decode_ip(oracle: ProbeOracle, y: BitString, rng) -> int:
    """Randomized 2-probe decode of x.y from a (corrupted) encoding of x."""
    return ip_with_coin(oracle, y, rng.randrange(1 << y.n))


def decode_bit(oracle: ProbeOracle, s: int, i: int, rng) -> int:
    """Recover bit i of the encoded message; the i-th unit query."""
    return decode_ip(oracle, BitString.unit(s, i), rng)


class HadamardIp(Scheme):
    """Encoded instance answering inner-product queries y -> x.y mod 2."""

    name = "hadamard-ip"

    def __init__(self, x: BitString):
        self.x = x
        self.code = HadamardCode(x.n)
        self._codeword = Codeword(self.code.encode(x))

    @property
    def codeword(self) -> Codeword:
        return self._codeword

    def probe_budget(self, query) -> int:
        return 2

    def coin_count(self, query) -> int:
        return self.code.length

    def coin_from_index(self, query, idx: int) -> int:
        return idx

    def decode_with_coins(self, oracle, query: BitString, coins: int) -> int:
        return ip_with_coin(oracle, query, coins)

    def truth(self, query: BitString) -> int:
        return dot_mod2(self.x, query)

    def queries(self):
        return (BitString.from_int(self.x.n, v) for v in range(self.code.length))

    def params(self) -> Dict[str, object]:
        return {"s": self.x.n, "x": self.x.to01()}


def pairwise_error_counts(
    s: int, pattern: CorruptionPattern, block: int = 1 << 12
) -> np.ndarray:
    """For each query value y: how many offsets z decode x.y wrongly.

    A coin z fails exactly when one of the positions z+1, (z^y)+1 is
    flipped and the other is not, independent of x.  Entry y of the
    returned int64 array counts failing coins; dividing by 2^s gives the
    exact error probability of the 2-probe decoder at query y.
    """
    n = 1 << s
    flipped = np.zeros(n, dtype=np.uint8)
    for pos in pattern.flips:
        if not 1 <= pos <= n:
            raise ValueError("flip position beyond codeword length")
        flipped[pos - 1] = 1
    z = np.arange(n, dtype=np.uint32)
    out = np.empty(n, dtype=np.int64)
    for start in range(0, n, block):
        ys = np.arange(start, min(start + block, n), dtype=np.uint32)
        out[start : start + len(ys)] = (
            flipped[z[None, :]] ^ flipped[ys[:, None] ^ z[None, :]]
        ).sum(axis=1)
    return out


class MajorityAmplified(Scheme):
    """Runs an inner bit-valued scheme t times and takes the majority.

    Coins are t-tuples of inner coins; the probe budget scales by t.
    """

    def __init__(self, inner: Scheme, t: int):
        if t < 1 or t % 2 == 0:
            raise ParameterError("repetition count must be odd and positive")
        self.inner = inner
        self.t = t
        self.name = inner.name + "-maj%d" % t

    @property
    def codeword(self) -> Codeword:
        return self.inner.codeword

    def probe_budget(self, query) -> int:
        return self.t * self.inner.probe_budget(query)

    def coin_count(self, query) -> int:
        return self.inner.coin_count(query) ** self.t

    def coin_from_index(self, query, idx: int) -> tuple:
        base = self.inner.coin_count(query)
        coins = []
        for _ in range(self.t):
            idx, rem = divmod(idx, base)
            coins.append(self.inner.coin_from_index(query, rem))
        return tuple(coins)

    def sample_coins(self, query, rng) -> tuple:
        return tuple(self.inner.sample_coins(query, rng) for _ in range(self.t))

    def decode_with_coins(self, oracle, query, coins) -> int:
        votes = sum(
            self.inner.decode_with_coins(oracle, query, c) for c in coins
        )
        return int(votes * 2 > self.t)

    def truth(self, query):
        return self.inner.truth(query)

    def queries(self):
        return self.inner.queries()

    def params(self) -> Dict[str, object]:
        out = dict(self.inner.params())
        out["t"] = self.t
        return out


def majority_error(p: Fraction, t: int) -> Fraction:
    """Exact probability that a majority of t iid Bernoulli(p) votes is wrong."""
    if t < 1 or t % 2 == 0:
        raise ParameterError("repetition count must be odd and positive")
    p = Fraction(p)
    q = 1 - p
    return sum(
        math.comb(t, k) * p**k * q ** (t - k) for k in range((t + 1) // 2, t + 1)
    )


# -- equality ---------------------------------------------------------


class RandomLinearCode:
    """A random linear [length, s] code with exhaustively measured distance.

    gamma is the defect 1/2 - dmin/length, clamped at zero; the equality
    scheme's error bound degrades by 2*gamma/3 relative to a perfectly
    balanced code.
    """

    def __init__(
        self,
        s: int,
        length: int,
        rng=None,
        rows: Optional[Sequence[BitString]] = None,
        distance_limit: int = 1 << 20,
    ):
        if s < 1 or length < 1:
            raise ParameterError("need s >= 1 and length >= 1")
        if (1 << s) > distance_limit:
            raise InfeasibleSizeError("distance check enumerates 2^s messages")
        self.s = s
        self.length = length
        if rows is not None:
            if len(rows) != s or any(row.n != length for row in rows):
                raise ParameterError("need s generator rows of the code length")
            self.rows = list(rows)
        elif rng is not None:
            self.rows = [BitString.random(length, rng) for _ in range(s)]
        else:
            raise ParameterError("need an rng or explicit rows")
        self._cols = self._column_masks()
        self.dmin = self._min_distance()

    def _column_masks(self) -> List[int]:
        cols = [0] * self.length
        for i, row in enumerate(self.rows):
            bit = 1 << (self.s - 1 - i)
            for j in row.support():
                cols[j - 1] |= bit
        return cols

    def _min_distance(self) -> int:
        best = self.length
        for v in range(1, 1 << self.s):
            w = sum((col & v).bit_count() & 1 for col in self._cols)
            best = min(best, w)
        return best

    @property
    def gamma(self) -> Fraction:
        return max(Fraction(0), Fraction(1, 2) - Fraction(self.dmin, self.length))

    def encode(self, x: BitString) -> BitString:
        if x.n != self.s:
            raise ParameterError("message length mismatch")
        out = BitString.zeros(self.length)
        for i in x.support():
            out = out ^ self.rows[i - 1]
        return out

    def bit_of(self, x: BitString, j: int) -> int:
        return (self._cols[j - 1] & x.value).bit_count() & 1

    def describe(self) -> Dict[str, object]:
        return {"kind": "random-linear", "s": self.s, "length": self.length}


class HadamardEqualityCode:
    """Hadamard code viewed through the interface equality needs."""

    def __init__(self, s: int):
        self.inner = HadamardCode(s)
        self.s = s
        self.length = self.inner.length
        self.dmin = self.inner.min_distance()

    @property
    def gamma(self) -> Fraction:
        return Fraction(0)

    def encode(self, x: BitString) -> BitString:
        return self.inner.encode(x)

    def bit_of(self, x: BitString, j: int) -> int:
        return (x.value & (j - 1)).bit_count() & 1

    def describe(self) -> Dict[str, object]:
        return {"kind": "hadamard", "s": self.s, "length": self.length}


class EqualityScheme(Scheme):
    """One-probe equality test: store a codeword of x, compare one position.

    The balanced variant answers 1 only with probability 2/3 even on
    agreement, equalizing the two error sides: both are at most
    1/3 + 2*(delta + gamma)/3 at noise rate delta.  The raw variant
    answers the agreement indicator; its error on x != y can reach
    1/2 + gamma + delta.
    """

    def __init__(self, x: BitString, code=None, balanced: bool = True):
        self.x = x
        self.code = code if code is not None else HadamardEqualityCode(x.n)
        if getattr(self.code, "s", x.n) != x.n:
            raise ParameterError("code message length does not match x")
        self.balanced = balanced
        self._codeword = Codeword(self.code.encode(x))
        self.name = "equality-balanced" if balanced else "equality-raw"

    @property
    def codeword(self) -> Codeword:
        return self._codeword

    @property
    def gamma(self) -> Fraction:
        return self.code.gamma

    def probe_budget(self, query) -> int:
        return 1

    def coin_count(self, query) -> int:
        return 3 * self.code.length if self.balanced else self.code.length

    def coin_from_index(self, query, idx: int):
        if self.balanced:
            j, c = divmod(idx, 3)
            return (j + 1, c)
        return (idx + 1, None)

    def decode_with_coins(self, oracle, query: BitString, coins) -> int:
        j, c = coins
        agree = oracle.probe(j) == self.code.bit_of(query, j)
        if not self.balanced:
            return int(agree)
        return int(agree and c < 2)

    def truth(self, query: BitString) -> int:
        if query.n != self.x.n:
            raise ParameterError("query length mismatch")
        return int(query == self.x)

    def params(self) -> Dict[str, object]:
        return {
            "x": self.x.to01(),
            "balanced": self.balanced,
            "code": self.code.describe(),
            "gamma": float(self.gamma),
        }
