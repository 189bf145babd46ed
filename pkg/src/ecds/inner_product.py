"""Structures answering inner products x.y mod 2 for low-weight y,
and substring extraction; three routes with different probe/length
trade-offs.

TableIp stores the answer for every query piece of weight <= ceil(r/p)
and reads p table cells.  PolySharedIp additively shares the evaluation
point of a degree-(p-1) polynomial whose value at a query's
characteristic point is the answer; each of p blocks tabulates one
share's worth, and corrupting a delta_j fraction of block j adds at most
delta_j to the error, so the total is at most p*delta.  SubstringHadamard
concatenates per-chunk Hadamard encodings and recovers each requested bit
with 2 probes (times an odd repetition factor under majority voting).
"""

from __future__ import annotations

import math
from itertools import combinations, islice, product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .bits import (
    BitString,
    BoundedWeightSpace,
    ball_size,
    dot_mod2,
    extract_substring,
    split_query,
)
from .errors import InfeasibleSizeError, ParameterError
from .hadamard import MAX_EXPONENT, HadamardCode, ip_with_coin
from .oracle import Codeword, Scheme

# -- plain table ------------------------------------------------------


def table_ip_length(n: int, r: int, p: int = 1) -> int:
    """Length of the p-probe table structure: one bit per piece of
    weight <= ceil(r/p)."""
    if p < 1:
        raise ParameterError("need p >= 1")
    if not 0 <= r <= n:
        raise ParameterError("need 0 <= r <= n")
    return ball_size(n, math.ceil(r / p))


class TableIp(Scheme):
    """Table of x.z for every z of weight <= ceil(r/p); p-probe decode.

    The decoder splits y into p pieces of weight <= ceil(r/p), reads the
    table cell of each piece, and XORs.  It is deterministic: the coin
    space is a single point.
    """

    name = "ip-table"

    def __init__(self, x: BitString, r: int, p: int = 1):
        self.x = x
        self.r = r
        self.p = p
        self.space = BoundedWeightSpace(x.n, math.ceil(r / p))
        if self.space.size() > (1 << MAX_EXPONENT):
            raise InfeasibleSizeError("table would exceed desk scale")
        self._codeword = Codeword(self._build_table())

    def _build_table(self) -> BitString:
        if self.x.n <= 63:
            vals = np.fromiter(
                (z.value for z in self.space), dtype=np.uint64, count=self.space.size()
            )
            bits = (np.bitwise_count(vals & np.uint64(self.x.value)) & 1).astype(
                np.uint8
            )
            return BitString.from_bit_array(bits)
        return BitString.from_bit_array(
            np.fromiter((dot_mod2(self.x, z) for z in self.space), dtype=np.uint8)
        )

    @property
    def codeword(self) -> Codeword:
        return self._codeword

    def probe_budget(self, query) -> int:
        return self.p

    def coin_count(self, query) -> int:
        return 1

    def coin_from_index(self, query, idx: int):
        return None

    def probe_positions(self, query: BitString) -> List[int]:
        return [self.space.rank(piece) + 1 for piece in split_query(query, self.p)]

    def decode_with_coins(self, oracle, query: BitString, coins) -> int:
        self._check(query)
        out = 0
        for pos in self.probe_positions(query):
            out ^= oracle.probe(pos)
        return out

    def _check(self, query: BitString) -> None:
        if query.n != self.x.n:
            raise ParameterError("query length mismatch")
        if query.weight > self.r:
            raise ParameterError("query weight exceeds r")

    def truth(self, query: BitString) -> int:
        self._check(query)
        return dot_mod2(self.x, query)

    def queries(self):
        return iter(BoundedWeightSpace(self.x.n, self.r))

    def params(self) -> Dict[str, object]:
        return {"n": self.x.n, "r": self.r, "p": self.p, "x": self.x.to01()}


# -- substring via concatenated Hadamard pieces -----------------------


def substring_length(n: int, r: int) -> int:
    if not 1 <= r <= n:
        raise ParameterError("need 1 <= r <= n")
    return r * (1 << math.ceil(n / r))


class SubstringHadamard(Scheme):
    """Answers x restricted to the one-positions of y, weight(y) <= r.

    x is cut into r chunks of c = ceil(n/r) bits (the last zero-padded)
    and each chunk is Hadamard-encoded.  A requested bit i lives in chunk
    (i-1)//c + 1 and is read with the 2-probe unit-query decode on that
    piece, repeated t times under majority when t > 1.  Flipping a
    quarter of one piece already drives two of its bits to error 1/2, so
    per-bit guarantees die at delta = 1/(4r) no matter the repetition.
    """

    name = "substring-hadamard"

    def __init__(self, x: BitString, r: int, t: int = 1):
        if t < 1 or t % 2 == 0:
            raise ParameterError("repetition count must be odd and positive")
        if not 1 <= r <= x.n:
            raise ParameterError("need 1 <= r <= n")
        self.x = x
        self.r = r
        self.t = t
        self.chunk = math.ceil(x.n / r)
        if self.chunk > MAX_EXPONENT:
            raise InfeasibleSizeError("piece length 2^%d is beyond desk scale" % self.chunk)
        self.code = HadamardCode(self.chunk)
        self.piece_len = self.code.length
        self._codeword = Codeword(BitString.concat(self._pieces()))

    def _pieces(self) -> List[BitString]:
        out = []
        for k in range(self.r):
            start = k * self.chunk + 1
            length = min(self.chunk, self.x.n - start + 1)
            if length <= 0:
                # chunks can overshoot n; spare pieces encode zero
                msg = BitString.zeros(self.chunk)
            else:
                msg = self.x.segment(start, length)
                # zero-pad the trailing chunk on the right
                msg = BitString.from_int(
                    self.chunk, msg.value << (self.chunk - length)
                )
            out.append(self.code.encode(msg))
        return out

    @property
    def codeword(self) -> Codeword:
        return self._codeword

    def bit_location(self, i: int) -> Tuple[int, int]:
        """Piece index (1-based) and local bit index of message bit i."""
        if not 1 <= i <= self.x.n:
            raise ParameterError("bit index out of range")
        return (i - 1) // self.chunk + 1, (i - 1) % self.chunk + 1

    def piece_offset(self, k: int) -> int:
        """Codeword positions of piece k start at piece_offset(k) + 1."""
        if not 1 <= k <= self.r:
            raise ParameterError("piece index out of range")
        return (k - 1) * self.piece_len

    def _check(self, query: BitString) -> None:
        if query.n != self.x.n:
            raise ParameterError("query length mismatch")
        if query.weight > self.r:
            raise ParameterError("query weight exceeds r")

    def probe_budget(self, query) -> int:
        self._check(query)
        return 2 * self.t * query.weight

    def coin_count(self, query) -> int:
        self._check(query)
        return self.piece_len ** (self.t * query.weight)

    def coin_from_index(self, query, idx: int) -> Tuple[int, ...]:
        draws = self.t * query.weight
        coins = []
        for _ in range(draws):
            idx, rem = divmod(idx, self.piece_len)
            coins.append(rem)
        return tuple(coins)

    def sample_coins(self, query, rng) -> Tuple[int, ...]:
        draws = self.t * query.weight
        return tuple(rng.randrange(self.piece_len) for _ in range(draws))

    def decode_with_coins(self, oracle, query: BitString, coins) -> BitString:
        self._check(query)
        out = 0
        for w, i in enumerate(query.support()):
            k, e = self.bit_location(i)
            base = self.piece_offset(k)
            unit = 1 << (self.chunk - e)
            votes = 0
            for z in coins[w * self.t : (w + 1) * self.t]:
                votes += oracle.probe(base + z + 1) ^ oracle.probe(
                    base + (z ^ unit) + 1
                )
            out = (out << 1) | int(votes * 2 > self.t)
        return BitString.from_int(query.weight, out)

    def truth(self, query: BitString) -> BitString:
        self._check(query)
        return extract_substring(self.x, query)

    def queries(self):
        return iter(BoundedWeightSpace(self.x.n, self.r))

    def params(self) -> Dict[str, object]:
        return {"n": self.x.n, "r": self.r, "t": self.t, "x": self.x.to01()}


# -- polynomial secret sharing ----------------------------------------


def _poly_m(n: int, d: int) -> int:
    """Smallest m with (m-1)^d < d^d * n <= m^d, i.e. ceil(d * n^(1/d))."""
    m = max(d, math.ceil(d * n ** (1.0 / d)))
    while (m - 1) ** d >= d**d * n:
        m -= 1
    while m**d < d**d * n:
        m += 1
    return m


def poly_ip_geometry(n: int, r: int, p: int) -> Dict[str, int]:
    """Degree, variable count, block length and total length of the
    p-block shared-polynomial structure."""
    if p < 2:
        raise ParameterError("need p >= 2")
    if not 1 <= r <= n:
        raise ParameterError("need 1 <= r <= n")
    d = p - 1
    m = _poly_m(n, d)
    if math.comb(m, d) < n:
        raise InfeasibleSizeError("not enough degree-%d monomials over %d variables" % (d, m))
    exp = (p - 1) * r * m
    return {
        "d": d,
        "m": m,
        "exponent": exp,
        "block_length": 1 << exp,
        "length": p * (1 << exp),
    }


def poly_ip_length(n: int, r: int, p: int) -> int:
    return poly_ip_geometry(n, r, p)["length"]


class PolySharedIp(Scheme):
    """p-probe inner products via additively shared polynomial evaluation.

    Data x becomes the multilinear polynomial p_x(z) = sum_i x_i *
    prod_{t in S_i} z_t over GF(2), where S_i is the i-th size-(p-1)
    subset of [m] in lexicographic order.  A query y of weight k maps to
    the point listing chi(S_i) for each one-position of y (r slots; short
    queries are padded with an unused subset's point, or the zero point
    when every subset is in use).  The point is split into p random XOR
    shares; expanding the polynomial in the shares yields monomials that
    each miss at least one share, so every monomial can be assigned to a
    block that tabulates its sum over the other p-1 shares.  The decoder
    reads one position per block and XORs; each block's read is uniform
    over that block under uniform shares.
    """

    name = "ip-poly"

    def __init__(self, x: BitString, r: int, p: int):
        geo = poly_ip_geometry(x.n, r, p)
        self.x = x
        self.r = r
        self.p = p
        self.d = geo["d"]
        self.m = geo["m"]
        self.exponent = geo["exponent"]
        self.block_length = geo["block_length"]
        if self.exponent > MAX_EXPONENT:
            raise InfeasibleSizeError(
                "share space 2^%d is beyond desk scale" % self.exponent
            )
        self.subsets: List[Tuple[int, ...]] = list(
            islice(combinations(range(1, self.m + 1), self.d), x.n + 1)
        )
        self.dummy: Optional[Tuple[int, ...]] = None
        if len(self.subsets) > x.n:
            self.dummy = self.subsets.pop()
        self._tables = self._build_tables()
        self._codeword = Codeword(
            BitString.concat(
                [BitString.from_bit_array(t) for t in self._tables]
            )
        )

    # variable (l, t) of the rm-bit point vector: copy l in 1..r, var t
    # in 1..m; bit (l-1)*m + t counted from the left (index 1 first).

    def chi(self, subset: Sequence[int]) -> int:
        """Characteristic m-bit value of a variable subset."""
        v = 0
        for t in subset:
            v |= 1 << (self.m - t)
        return v

    def point_value(self, query: BitString) -> int:
        """The rm-bit evaluation point for a query, copies left to right."""
        if query.n != self.x.n:
            raise ParameterError("query length mismatch")
        sup = query.support()
        if len(sup) > self.r:
            raise ParameterError("query weight exceeds r")
        pad = self.chi(self.dummy) if self.dummy is not None else 0
        copies = [self.chi(self.subsets[i - 1]) for i in sup]
        copies += [pad] * (self.r - len(sup))
        v = 0
        for c in copies:
            v = (v << self.m) | c
        return v

    def _monomials(self) -> List[List[Dict[Tuple[int, int], int]]]:
        """Per-block monomial lists; a monomial maps (copy, var) -> share."""
        parity: Dict[frozenset, int] = {}
        for i in self.x.support():
            s_i = self.subsets[i - 1]
            for l in range(1, self.r + 1):
                for shares in product(range(1, self.p + 1), repeat=self.d):
                    mono = frozenset(
                        (shares[k], l, s_i[k]) for k in range(self.d)
                    )
                    parity[mono] = parity.get(mono, 0) ^ 1
        blocks: List[List[Dict[Tuple[int, int], int]]] = [[] for _ in range(self.p)]
        for mono, live in parity.items():
            if not live:
                continue
            present = {j for j, _, _ in mono}
            j = min(set(range(1, self.p + 1)) - present)
            blocks[j - 1].append({(l, t): jj for jj, l, t in mono})
        return blocks

    def _share_slot(self, block_j: int, share_j: int) -> int:
        """Slot (0 = leftmost) of share share_j in block_j's address."""
        others = [j for j in range(1, self.p + 1) if j != block_j]
        return others.index(share_j)

    def _build_tables(self) -> List[np.ndarray]:
        rm = self.r * self.m
        v = np.arange(self.block_length, dtype=np.uint64)
        tables = []
        for bj, monos in enumerate(self._monomials(), start=1):
            table = np.zeros(self.block_length, dtype=np.uint8)
            for mono in monos:
                mask = 0
                for (l, t), sj in mono.items():
                    slot = self._share_slot(bj, sj)
                    offset = slot * rm + (l - 1) * self.m + (t - 1)
                    mask |= 1 << (self.exponent - 1 - offset)
                mask = np.uint64(mask)
                table ^= (v & mask) == mask
            tables.append(table)
        return tables

    @property
    def codeword(self) -> Codeword:
        return self._codeword

    def probe_budget(self, query) -> int:
        return self.p

    def coin_count(self, query) -> int:
        return self.block_length

    def coin_from_index(self, query, idx: int) -> int:
        return idx

    def shares_from_coins(self, query: BitString, coins: int) -> List[int]:
        """All p shares: p-1 uniform from the coins, the last the
        complement so they XOR to the query's point."""
        rm = self.r * self.m
        shares = []
        rest = coins
        for _ in range(self.p - 1):
            rest, w = divmod(rest, 1 << rm)
            shares.append(w)
        acc = self.point_value(query)
        for w in shares:
            acc ^= w
        shares.append(acc)
        return shares

    def block_position(self, block_j: int, shares: Sequence[int]) -> int:
        """Codeword position block_j's decoder reads for these shares."""
        rm = self.r * self.m
        addr = 0
        for j in range(1, self.p + 1):
            if j != block_j:
                addr = (addr << rm) | shares[j - 1]
        return (block_j - 1) * self.block_length + addr + 1

    def decode_with_coins(self, oracle, query: BitString, coins: int) -> int:
        shares = self.shares_from_coins(query, coins)
        out = 0
        for j in range(1, self.p + 1):
            out ^= oracle.probe(self.block_position(j, shares))
        return out

    def truth(self, query: BitString) -> int:
        if query.weight > self.r:
            raise ParameterError("query weight exceeds r")
        return dot_mod2(self.x, query)

    def queries(self):
        return iter(BoundedWeightSpace(self.x.n, self.r))

    # -- reference evaluators (used by identity checks) ----------------

    def p_x(self, z: int) -> int:
        """Evaluate p_x at an m-bit point value."""
        out = 0
        for i in self.x.support():
            mask = self.chi(self.subsets[i - 1])
            out ^= int(z & mask == mask)
        return out

    def p_x_copies(self, point: int) -> int:
        """Evaluate the r-copy XOR of p_x at an rm-bit point value."""
        out = 0
        mmask = (1 << self.m) - 1
        for l in range(self.r):
            out ^= self.p_x((point >> (self.m * (self.r - 1 - l))) & mmask)
        return out

    def table_bit(self, block_j: int, shares: Sequence[int]) -> int:
        pos = self.block_position(block_j, shares)
        return int(self._tables[block_j - 1][(pos - 1) % self.block_length])

    def params(self) -> Dict[str, object]:
        return {
            "n": self.x.n,
            "r": self.r,
            "p": self.p,
            "d": self.d,
            "m": self.m,
            "x": self.x.to01(),
        }
