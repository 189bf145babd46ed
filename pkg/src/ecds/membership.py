"""Membership structures built on randomized probe sets.

The one-probe structure assigns every universe element i a random set
P_i of d positions in a length-n' bit vector; encoding a set stores the
union of the P_i over its members, and decoding probes one uniformly
random j in P_i.  A build is only accepted after verifying, for every
admissible data set (weight <= s) and every index in the verification
domain, that the probed bit agrees with membership with probability at
least 1 - eps over the probe choice.  Members always agree exactly (the
union contains their whole set); the verified direction is that
non-members collide with at most an eps fraction of their set.

The block-composed variant makes the vector error-tolerant: positions
are shuffled by a random permutation, cut into b blocks of a bits, and
each block is Hadamard-encoded.  A block is good for index i when it
holds exactly one element of P_i; an index is good when at least a
quarter of the blocks are good for it.  The block decoder picks a random
block, runs the 2-probe decode when it is good, and otherwise answers a
fair coin, so adversaries must corrupt many blocks to matter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .bits import BitString, ball_size
from .errors import (
    ConstructionError,
    InfeasibleSizeError,
    ParameterError,
    VerificationError,
)
from .hadamard import MAX_EXPONENT, HadamardCode
from .oracle import Codeword, ProbeOracle, Scheme
from .seeding import derive_seed


def default_probe_params(n: int, s: int, eps: float) -> Tuple[int, int]:
    """Vector length and probe-set size giving the 1-eps agreement
    guarantee with room to spare: n' = ceil((100/eps^2) s log2 n),
    d = ceil(log2(n)/eps)."""
    if n < 2 or s < 1:
        raise ParameterError("need n >= 2 and s >= 1")
    if not 0 < eps < 1:
        raise ParameterError("need 0 < eps < 1")
    n_prime = math.ceil((100 / eps**2) * s * math.log2(n))
    d = math.ceil(math.log2(n) / eps)
    return n_prime, d


@dataclass(frozen=True)
class VerificationReport:
    """Realized agreement over a verification pass."""

    exhaustive: bool
    checked_supports: int
    total_supports: int
    min_agreement: float
    violations: int

    @property
    def coverage(self) -> float:
        return self.checked_supports / self.total_supports

    def to_dict(self) -> Dict[str, object]:
        return {
            "exhaustive": self.exhaustive,
            "checked_supports": self.checked_supports,
            "total_supports": self.total_supports,
            "coverage": self.coverage,
            "min_agreement": self.min_agreement,
            "violations": self.violations,
        }


@dataclass(frozen=True)
class MembershipBuildReport:
    n: int
    s: int
    eps: float
    n_prime: int
    d: int
    seed: int
    attempts: int
    overridden: bool
    domain_size: int
    verification: VerificationReport

    def to_dict(self) -> Dict[str, object]:
        out = {
            "n": self.n,
            "s": self.s,
            "eps": self.eps,
            "n_prime": self.n_prime,
            "d": self.d,
            "seed": self.seed,
            "attempts": self.attempts,
            "overridden": self.overridden,
            "domain_size": self.domain_size,
        }
        out.update({"verification_" + k: v for k, v in self.verification.to_dict().items()})
        return out


class OneProbeMembership:
    """Verified probe-set structure over universe [n], data weight <= s."""

    GRAPH_RETRIES = 64

    def __init__(
        self,
        n: int,
        s: int,
        eps: float,
        probe_sets: Sequence[Sequence[int]],
        n_prime: int,
        report: Optional[MembershipBuildReport] = None,
    ):
        if len(probe_sets) != n:
            raise ParameterError("need one probe set per universe element")
        self.n = n
        self.s = s
        self.eps = eps
        self.n_prime = n_prime
        self.d = len(probe_sets[0]) if len(probe_sets) else 0
        if any(len(set(ps)) != len(ps) or len(ps) != self.d for ps in probe_sets):
            raise ParameterError("probe sets must be equal-size and duplicate-free")
        arr = np.asarray(probe_sets, dtype=np.int64).reshape(n, self.d)
        if arr.size and (arr.min() < 1 or arr.max() > n_prime):
            raise ParameterError("probe-set positions out of range")
        self._sets0 = np.sort(arr, axis=1) - 1  # 0-based, each row ascending
        self.report = report

    # thresholds as exact integer counts; float eps only enters here
    @property
    def _member_min(self) -> int:
        return math.ceil((1 - self.eps) * self.d - 1e-9)

    @property
    def _nonmember_max(self) -> int:
        return math.floor(self.eps * self.d + 1e-9)

    def probe_set(self, i: int) -> Tuple[int, ...]:
        """P_i as 1-based positions, ascending."""
        if not 1 <= i <= self.n:
            raise ParameterError("index out of range")
        return tuple(int(v) + 1 for v in self._sets0[i - 1])

    # -- construction --------------------------------------------------

    @classmethod
    def build(
        cls,
        n: int,
        s: int,
        eps: float = 0.1,
        seed: int = 0,
        n_prime: Optional[int] = None,
        d: Optional[int] = None,
        domain: Optional[Sequence[int]] = None,
        retries: int = GRAPH_RETRIES,
        verify_limit: int = 100_000,
    ) -> "OneProbeMembership":
        """Sample probe sets and verify; resample on failure, up to
        `retries` attempts, then give up with ConstructionError."""
        overridden = n_prime is not None or d is not None
        dn_prime, dd = default_probe_params(n, s, eps)
        n_prime = n_prime if n_prime is not None else dn_prime
        d = d if d is not None else dd
        if d > n_prime:
            raise ParameterError("probe sets cannot exceed the vector length")
        dom = tuple(domain) if domain is not None else tuple(range(1, n + 1))
        last: Optional[VerificationReport] = None
        for attempt in range(retries):
            rng = np.random.default_rng(derive_seed("probe-sets", seed, attempt))
            sets0 = np.empty((n, d), dtype=np.int64)
            for i in range(n):
                sets0[i] = rng.choice(n_prime, size=d, replace=False)
            st = cls(
                n,
                s,
                eps,
                np.sort(sets0, axis=1) + 1,
                n_prime,
            )
            ver = st.verify(
                domain=dom,
                limit=verify_limit,
                rng=np.random.default_rng(derive_seed("verify", seed, attempt)),
            )
            last = ver
            if ver.violations == 0:
                st.report = MembershipBuildReport(
                    n=n,
                    s=s,
                    eps=eps,
                    n_prime=n_prime,
                    d=d,
                    seed=seed,
                    attempts=attempt + 1,
                    overridden=overridden,
                    domain_size=len(dom),
                    verification=ver,
                )
                return st
        raise ConstructionError(
            "no verifying probe-set family in %d attempts" % retries, report=last
        )

    # -- verification and encoding -------------------------------------

    def _support_counts(self, support: Sequence[int], mask: np.ndarray) -> np.ndarray:
        """For data set `support`: per-domain-index count of probe-set
        positions landing in the encoded union.  mask is a reusable
        scratch buffer of n_prime zeros."""
        ypos = self._sets0[[i - 1 for i in support]].ravel()
        mask[ypos] = 1
        counts = self._gather(mask)
        mask[ypos] = 0
        return counts

    def _gather(self, mask: np.ndarray) -> np.ndarray:
        return mask[self._sets0].sum(axis=1)

    def verify(
        self,
        domain: Optional[Sequence[int]] = None,
        limit: int = 100_000,
        rng=None,
    ) -> VerificationReport:
        """Check the agreement guarantee for every weight <= s data set
        over `domain` (default: the whole universe), exhaustively when
        there are at most `limit` supports, else on a uniform sample."""
        dom = tuple(domain) if domain is not None else tuple(range(1, self.n + 1))
        dom_idx = np.asarray(dom, dtype=np.int64) - 1
        total = ball_size(len(dom), self.s)
        exhaustive = total <= limit
        mask = np.zeros(self.n_prime, dtype=np.uint8)
        min_agree = 1.0
        violations = 0
        checked = 0
        for support in self._supports(dom, total, exhaustive, limit, rng):
            counts = self._support_counts(support, mask)[dom_idx]
            in_sup = np.zeros(len(dom), dtype=bool)
            sup_set = set(support)
            for k, i in enumerate(dom):
                in_sup[k] = i in sup_set
            member_counts = counts[in_sup]
            nonmember_counts = counts[~in_sup]
            if member_counts.size:
                min_agree = min(min_agree, member_counts.min() / self.d)
                violations += int((member_counts < self._member_min).sum())
            if nonmember_counts.size:
                min_agree = min(min_agree, 1 - nonmember_counts.max() / self.d)
                violations += int((nonmember_counts > self._nonmember_max).sum())
            checked += 1
        return VerificationReport(
            exhaustive=exhaustive,
            checked_supports=checked,
            total_supports=total,
            min_agreement=min_agree,
            violations=violations,
        )

    def _supports(self, dom, total, exhaustive, limit, rng):
        if exhaustive:
            for w in range(self.s + 1):
                yield from combinations(dom, w)
        else:
            if rng is None:
                rng = np.random.default_rng(0)
            from .bits import BoundedWeightSpace

            space = BoundedWeightSpace(len(dom), self.s)
            for _ in range(limit):
                k = int(rng.integers(space.size()))
                yield tuple(dom[i - 1] for i in space.unrank(k).support())

    def encode(
        self, x: BitString, verify_domain: Optional[Sequence[int]] = None
    ) -> Tuple[BitString, np.ndarray]:
        """Union encoding of the set x, plus the per-index agreement
        profile over the verification domain.  Raises VerificationError
        if any domain index violates the agreement guarantee."""
        if x.n != self.n:
            raise ParameterError("data length does not match universe")
        if x.weight > self.s:
            raise ParameterError("data weight exceeds s")
        dom = (
            tuple(verify_domain)
            if verify_domain is not None
            else tuple(range(1, self.n + 1))
        )
        support = x.support()
        mask = np.zeros(self.n_prime, dtype=np.uint8)
        counts_all = self._support_counts(support, mask)
        yv = 0
        for i in support:
            for j0 in self._sets0[i - 1]:
                yv |= 1 << (self.n_prime - 1 - int(j0))
        y = BitString.from_int(self.n_prime, yv)
        dom_idx = np.asarray(dom, dtype=np.int64) - 1
        counts = counts_all[dom_idx]
        agreements = np.empty(len(dom), dtype=np.float64)
        sup_set = set(support)
        for k, i in enumerate(dom):
            c = int(counts[k])
            if i in sup_set:
                agreements[k] = c / self.d
                if c < self._member_min:
                    raise VerificationError("index %d under-covered by its set" % i)
            else:
                agreements[k] = 1 - c / self.d
                if c > self._nonmember_max:
                    raise VerificationError("index %d collides beyond eps" % i)
        return y, agreements

    def instance(self, x: BitString) -> "MembershipInstance":
        y, agreements = self.encode(x)
        return MembershipInstance(self, x, y, agreements)

    def params(self) -> Dict[str, object]:
        return {
            "n": self.n,
            "s": self.s,
            "eps": self.eps,
            "n_prime": self.n_prime,
            "d": self.d,
        }


def one_probe_decode(structure: OneProbeMembership, oracle: ProbeOracle, i: int, rng) -> int:
    """Probe one uniformly random position of P_i."""
    ps = structure.probe_set(i)
    return oracle.probe(ps[rng.randrange(len(ps))])


class MembershipInstance(Scheme):
    """Encoded set with the 1-probe decoder; queries are indices 1..n."""

    name = "membership-1probe"

    def __init__(self, structure, x, y, agreements):
        self.structure = structure
        self.x = x
        self.agreements = agreements
        self._codeword = Codeword(y)

    @property
    def codeword(self) -> Codeword:
        return self._codeword

    def probe_budget(self, query) -> int:
        return 1

    def coin_count(self, query) -> int:
        return self.structure.d

    def coin_from_index(self, query, idx: int) -> int:
        return idx

    def decode_with_coins(self, oracle, query: int, coins: int) -> int:
        return oracle.probe(self.structure.probe_set(query)[coins])

    def truth(self, query: int) -> int:
        return self.x.bit(query)

    def queries(self):
        return iter(range(1, self.structure.n + 1))

    def params(self) -> Dict[str, object]:
        out = self.structure.params()
        out["x_weight"] = self.x.weight
        return out


# -- block-composed variant -------------------------------------------


@dataclass(frozen=True)
class ComposedBuildReport:
    public_n: int
    universe: int
    s: int
    eps: float
    a: int
    b: int
    d: int
    n_prime: int
    length: int
    seed: int
    perm_trials: int
    good_count: int
    good_threshold: int
    base: MembershipBuildReport

    def to_dict(self) -> Dict[str, object]:
        out = {
            "public_n": self.public_n,
            "universe": self.universe,
            "s": self.s,
            "eps": self.eps,
            "a": self.a,
            "b": self.b,
            "d": self.d,
            "n_prime": self.n_prime,
            "length": self.length,
            "seed": self.seed,
            "perm_trials": self.perm_trials,
            "good_count": self.good_count,
            "good_threshold": self.good_threshold,
        }
        out.update({"base_" + k: v for k, v in self.base.to_dict().items()})
        return out


class BlockCodedMembership:
    """Probe-set membership whose vector is shuffled, cut into b blocks
    of a bits, and Hadamard-encoded block by block.

    Public queries are indices 1..public_n, embedded as the first
    public_n elements of a larger universe (the slack keeps probe sets
    spread out).  Good blocks and good indices are determined by the
    permutation alone, before any data is encoded.
    """

    def __init__(
        self,
        public_n: int,
        base: OneProbeMembership,
        perm: Sequence[int],
        a: int,
        report: Optional[ComposedBuildReport] = None,
    ):
        n_prime = base.n_prime
        if n_prime % a:
            raise ParameterError("vector length must be a whole number of blocks")
        if sorted(perm) != list(range(n_prime)):
            raise ParameterError("perm must be a permutation of 0..n_prime-1")
        if public_n > base.n:
            raise ParameterError("public domain exceeds the universe")
        self.public_n = public_n
        self.base = base
        self.a = a
        self.b = n_prime // a
        self.perm = np.asarray(perm, dtype=np.int64)
        self.code = HadamardCode(a)
        self.length = self.b * self.code.length
        self.report = report
        self._block_info = [self._index_blocks(i) for i in range(1, public_n + 1)]
        self.good_indices = tuple(
            i
            for i in range(1, public_n + 1)
            if 4 * len(self._block_info[i - 1][1]) >= self.b
        )

    def _index_blocks(self, i: int) -> Tuple[np.ndarray, Dict[int, int]]:
        """Per-block element counts of P_i after the shuffle, and the
        local (1-based) position of the element in each exactly-one block."""
        pos0 = self.perm[self.base._sets0[i - 1]]
        counts = np.bincount(pos0 // self.a, minlength=self.b)
        unique: Dict[int, int] = {}
        for p0 in pos0:
            k = int(p0) // self.a
            if counts[k] == 1:
                unique[k + 1] = int(p0) % self.a + 1
        return counts, unique

    def block_counts(self, i: int) -> np.ndarray:
        if not 1 <= i <= self.public_n:
            raise ParameterError("index out of range")
        return self._block_info[i - 1][0].copy()

    def good_blocks(self, i: int) -> Dict[int, int]:
        """Blocks holding exactly one element of P_i: block -> local bit."""
        if not 1 <= i <= self.public_n:
            raise ParameterError("index out of range")
        return dict(self._block_info[i - 1][1])

    @classmethod
    def build(
        cls,
        public_n: int,
        s: int,
        eps: float = 0.25,
        a: int = 14,
        b: int = 288,
        universe_factor: int = 20,
        seed: int = 0,
        perm_trials: int = 256,
        retries: int = OneProbeMembership.GRAPH_RETRIES,
        verify_limit: int = 100_000,
    ) -> "BlockCodedMembership":
        if a > MAX_EXPONENT:
            raise InfeasibleSizeError("block length 2^%d is beyond desk scale" % a)
        universe = universe_factor * public_n
        base = OneProbeMembership.build(
            universe,
            s,
            eps,
            seed=seed,
            n_prime=a * b,
            d=b,
            domain=range(1, public_n + 1),
            retries=retries,
            verify_limit=verify_limit,
        )
        threshold = math.ceil(public_n / 20)
        for trial in range(perm_trials):
            rng = np.random.default_rng(derive_seed("blocks", seed, trial))
            perm = rng.permutation(a * b)
            st = cls(public_n, base, perm, a)
            if len(st.good_indices) >= threshold:
                st.report = ComposedBuildReport(
                    public_n=public_n,
                    universe=universe,
                    s=s,
                    eps=eps,
                    a=a,
                    b=b,
                    d=base.d,
                    n_prime=base.n_prime,
                    length=st.length,
                    seed=seed,
                    perm_trials=trial + 1,
                    good_count=len(st.good_indices),
                    good_threshold=threshold,
                    base=base.report,
                )
                return st
        raise ConstructionError(
            "no permutation reached %d good indices in %d trials"
            % (threshold, perm_trials)
        )

    def embed(self, x: BitString) -> BitString:
        """Public data as a subset of the first public_n universe elements."""
        if x.n != self.public_n:
            raise ParameterError("data length does not match public domain")
        return BitString.from_int(self.base.n, x.value << (self.base.n - x.n))

    def encode(self, x: BitString) -> Tuple[Codeword, np.ndarray]:
        y, agreements = self.base.encode(
            self.embed(x), verify_domain=range(1, self.public_n + 1)
        )
        arr = y.to_bit_array()
        shuffled = np.zeros_like(arr)
        shuffled[self.perm] = arr
        pieces = []
        shift = np.arange(self.a - 1, -1, -1, dtype=np.uint64)
        for k in range(self.b):
            block = shuffled[k * self.a : (k + 1) * self.a].astype(np.uint64)
            pieces.append(BitString.from_bit_array(self.code.encode_value(int((block << shift).sum()))))
        return Codeword(BitString.concat(pieces)), agreements

    def instance(self, x: BitString, decoder: str = "block") -> "ComposedInstance":
        codeword, agreements = self.encode(x)
        return ComposedInstance(self, x, codeword, agreements, decoder)

    def params(self) -> Dict[str, object]:
        return {
            "public_n": self.public_n,
            "universe": self.base.n,
            "s": self.base.s,
            "eps": self.base.eps,
            "a": self.a,
            "b": self.b,
            "d": self.base.d,
            "length": self.length,
            "good_count": len(self.good_indices),
        }


class ComposedInstance(Scheme):
    """Encoded composed structure; queries are public indices.

    decoder="block": pick a uniform block; when it holds exactly one
    element of P_i, 2-probe decode that bit, else answer a coin from the
    coin string.  decoder="direct": pick a uniform element of P_i and
    2-probe decode it inside its block; no coin fallback.
    """

    def __init__(self, structure, x, codeword, agreements, decoder="block"):
        if decoder not in ("block", "direct"):
            raise ParameterError("decoder must be 'block' or 'direct'")
        self.structure = structure
        self.x = x
        self.agreements = agreements
        self.decoder = decoder
        self._codeword = codeword
        self.name = "membership-composed-" + decoder

    @property
    def codeword(self) -> Codeword:
        return self._codeword

    def _check(self, query: int) -> None:
        if not 1 <= query <= self.structure.public_n:
            raise ParameterError("query outside public domain")

    def probe_budget(self, query) -> int:
        return 2

    def coin_count(self, query) -> int:
        st = self.structure
        if self.decoder == "block":
            return st.b * 2 * st.code.length
        return st.base.d * st.code.length

    def coin_from_index(self, query, idx: int):
        st = self.structure
        if self.decoder == "block":
            k, rem = divmod(idx, 2 * st.code.length)
            fb, z = divmod(rem, st.code.length)
            return (k + 1, fb, z)
        j, z = divmod(idx, st.code.length)
        return (j, z)

    def decode_with_coins(self, oracle, query: int, coins):
        self._check(query)
        st = self.structure
        if self.decoder == "block":
            k, fb, z = coins
            e = st._block_info[query - 1][1].get(k)
            if e is None:
                return fb
            base = (k - 1) * st.code.length
        else:
            jidx, z = coins
            pos0 = int(st.perm[st.base._sets0[query - 1][jidx]])
            k0, e0 = divmod(pos0, st.a)
            base = k0 * st.code.length
            e = e0 + 1
        unit = 1 << (st.a - e)
        return oracle.probe(base + z + 1) ^ oracle.probe(base + (z ^ unit) + 1)

    def truth(self, query: int) -> int:
        self._check(query)
        return self.x.bit(query)

    def queries(self):
        return iter(self.structure.good_indices)

    def params(self) -> Dict[str, object]:
        out = self.structure.params()
        out["decoder"] = self.decoder
        out["x_weight"] = self.x.weight
        return out
