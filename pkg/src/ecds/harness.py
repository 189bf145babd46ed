"""Adversary strategies and error measurement.

An attack turns a strategy into a concrete CorruptionPattern for a given
scheme instance, never exceeding its flip budget.  estimate_error then
measures per-query decoding error under that pattern: exactly, by
enumerating the decoder's coin space when it has at most 2^20 states,
else by Monte Carlo with exact 99% Clopper-Pearson intervals.  Reports
are deterministic functions of (parameters, seed) and serialize to
canonical JSON and CSV; wall time is carried alongside but kept out of
the canonical bytes.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from scipy.stats import beta as _beta_dist

from .bits import BitString
from .errors import ParameterError
from .hadamard import HadamardIp, pairwise_error_counts
from .inner_product import SubstringHadamard
from .membership import ComposedInstance, MembershipInstance
from .oracle import (
    EXACT_STATE_LIMIT,
    CorruptionPattern,
    ProbeOracle,
    Scheme,
    exact_error,
)
from .seeding import derive_seed, stream

ADVERSARY_KINDS = (
    "none",
    "random_flips",
    "block_killer",
    "piece_killer",
    "probe_set_killer",
    "greedy_local",
)

# Monte-Carlo randomness is drawn per block of trials, each block seeded
# from (seed, query, block index): trial t lives in block t // MC_BLOCK,
# so results do not depend on how blocks are scheduled.
MC_BLOCK = 4096


@dataclass(frozen=True)
class AdversaryStrategy:
    """A named attack with a hard flip budget.

    target selects the attacked query for the targeted kinds; when left
    None the harness aims each measurement's own query.  The eval_*
    knobs only matter for greedy_local's hill climb.
    """

    kind: str
    budget: int
    seed: int = 0
    target: object = None
    eval_proposals: int = 60
    eval_trials: int = 400
    eval_queries: int = 8

    def __post_init__(self):
        if self.kind not in ADVERSARY_KINDS:
            raise ParameterError("unknown adversary kind %r" % (self.kind,))
        if self.budget < 0:
            raise ParameterError("negative flip budget")

    def describe(self) -> Dict[str, object]:
        out = {"kind": self.kind, "budget": self.budget, "seed": self.seed}
        if self.target is not None:
            out["target"] = (
                self.target.to01()
                if isinstance(self.target, BitString)
                else self.target
            )
        return out


def _emit(strategy: AdversaryStrategy, positions: Iterable[int]) -> CorruptionPattern:
    pattern = CorruptionPattern(positions)
    assert pattern.weight <= strategy.budget, "attack exceeded its budget"
    return pattern


def _target_index(strategy, target, fallback) -> int:
    if target is not None:
        return target
    if strategy.target is not None:
        return strategy.target
    return fallback


def attack(
    strategy: AdversaryStrategy, scheme: Scheme, target=None
) -> CorruptionPattern:
    """Concrete flip pattern for this scheme, within the strategy budget.

    Strategy kinds that need structure the scheme does not have (for
    example piece_killer on a membership instance) are rejected.
    """
    n = scheme.codeword.n
    kind = strategy.kind
    if kind == "none":
        return _emit(strategy, ())
    if kind == "random_flips":
        rng = stream("attack-random", strategy.seed)
        return _emit(
            strategy, rng.sample(range(1, n + 1), min(strategy.budget, n))
        )
    if kind == "probe_set_killer":
        if not isinstance(scheme, MembershipInstance):
            raise ParameterError("probe_set_killer applies to one-probe membership")
        i = _target_index(strategy, target, 1)
        ps = scheme.structure.probe_set(i)
        return _emit(strategy, ps[: strategy.budget])
    if kind == "block_killer":
        if not isinstance(scheme, ComposedInstance):
            raise ParameterError("block_killer applies to block-composed membership")
        return _block_killer(strategy, scheme, target)
    if kind == "piece_killer":
        if not isinstance(scheme, SubstringHadamard):
            raise ParameterError("piece_killer applies to the substring structure")
        return _piece_killer(strategy, scheme, target)
    if kind == "greedy_local":
        return _greedy_local(strategy, scheme, target)
    raise ParameterError("unknown adversary kind %r" % (kind,))


def _block_killer(strategy, scheme: ComposedInstance, target) -> CorruptionPattern:
    """Flip the inner-code positions that invert the targeted index's
    bits, block by block, heaviest blocks first."""
    st = scheme.structure
    i = _target_index(strategy, target, st.good_indices[0] if st.good_indices else 1)
    counts = st.block_counts(i)
    pos0 = st.perm[st.base._sets0[i - 1]]
    locals_by_block: Dict[int, int] = {}
    for p0 in pos0:
        k = int(p0) // st.a
        locals_by_block[k] = locals_by_block.get(k, 0) ^ (1 << (st.a - 1 - int(p0) % st.a))
    order = sorted(
        (k for k in locals_by_block), key=lambda k: (-int(counts[k]), k)
    )
    out: List[int] = []
    left = strategy.budget
    for k in order:
        if left <= 0:
            break
        v = locals_by_block[k]
        base = k * st.code.length
        for z in range(st.code.length):
            if (z & v).bit_count() & 1:
                out.append(base + z + 1)
                left -= 1
                if left <= 0:
                    break
    return _emit(strategy, out)


def _piece_killer(strategy, scheme: SubstringHadamard, target) -> CorruptionPattern:
    """Corrupt a quarter of one piece: all z with two chosen coordinates
    set, which makes both of those bits decode to a fair coin."""
    if scheme.chunk < 2:
        raise ParameterError("piece_killer needs pieces with at least 2 bits")
    i = _target_index(strategy, target, 1)
    if isinstance(i, BitString):
        # a query mask aims the attack at its first requested bit
        sup = i.support()
        i = sup[0] if sup else 1
    k, e = scheme.bit_location(i)
    e2 = e % scheme.chunk + 1
    mask = (1 << (scheme.chunk - e)) | (1 << (scheme.chunk - e2))
    base = scheme.piece_offset(k)
    out = []
    left = strategy.budget
    for z in range(scheme.piece_len):
        if left <= 0:
            break
        if z & mask == mask:
            out.append(base + z + 1)
            left -= 1
    return _emit(strategy, out)


def _greedy_objective(scheme, queries, trials, seed):
    """Worst-over-queries error as a function of the pattern; exact fast
    path for the 2-probe structure, otherwise enumeration or sampling."""
    if isinstance(scheme, HadamardIp):
        s = scheme.x.n

        def f(pattern: CorruptionPattern) -> float:
            return int(pairwise_error_counts(s, pattern).max()) / (1 << s)

        return f

    def f(pattern: CorruptionPattern) -> float:
        worst = 0.0
        for qi, q in enumerate(queries):
            if scheme.coin_count(q) <= 4096:
                err = float(exact_error(scheme, q, pattern))
            else:
                rng = stream("greedy-eval", seed, qi)
                oracle = ProbeOracle(
                    scheme.codeword, pattern, scheme.probe_budget(q)
                )
                truth = scheme.truth(q)
                wrong = 0
                for _ in range(trials):
                    oracle.reset()
                    if scheme.decode(oracle, q, rng) != truth:
                        wrong += 1
                err = wrong / trials
            worst = max(worst, err)
        return worst

    return f


def _greedy_local(strategy, scheme, target) -> CorruptionPattern:
    """Hill-climb flip positions to maximize measured decoder error,
    under a fixed evaluation budget; a heuristic lower bound on
    adversarial power, not an optimum."""
    n = scheme.codeword.n
    rng = stream("attack-greedy", strategy.seed)
    if target is not None:
        queries = [target]
    elif strategy.target is not None:
        queries = [strategy.target]
    else:
        queries = list(scheme.queries())[: strategy.eval_queries]
    objective = _greedy_objective(scheme, queries, strategy.eval_trials, strategy.seed)
    budget = min(strategy.budget, n)
    current = set(rng.sample(range(1, n + 1), budget))
    best = objective(CorruptionPattern(current))
    for _ in range(strategy.eval_proposals):
        if not current or len(current) == n:
            break
        drop = rng.choice(sorted(current))
        add = rng.randrange(1, n + 1)
        if add in current:
            continue
        cand = (current - {drop}) | {add}
        val = objective(CorruptionPattern(cand))
        if val > best:
            best = val
            current = cand
    return _emit(strategy, current)


# -- measurement ------------------------------------------------------


def clopper_pearson(wrong: int, trials: int, conf: float = 0.99) -> Tuple[float, float]:
    """Exact two-sided binomial confidence interval for wrong/trials."""
    if not 0 <= wrong <= trials or trials < 1:
        raise ParameterError("need 0 <= wrong <= trials")
    alpha = 1 - conf
    lo = 0.0 if wrong == 0 else float(_beta_dist.ppf(alpha / 2, wrong, trials - wrong + 1))
    hi = (
        1.0
        if wrong == trials
        else float(_beta_dist.ppf(1 - alpha / 2, wrong + 1, trials - wrong))
    )
    return lo, hi


@dataclass(frozen=True)
class QueryResult:
    query: str
    mode: str  # exact | mc
    trials: int
    wrong: int
    error: float
    error_exact: Optional[str]
    ci_low: float
    ci_high: float
    pattern_weight: int

    @property
    def ci_half_width(self) -> float:
        return (self.ci_high - self.ci_low) / 2

    def to_dict(self) -> Dict[str, object]:
        return {
            "query": self.query,
            "mode": self.mode,
            "trials": self.trials,
            "wrong": self.wrong,
            "error": self.error,
            "error_exact": self.error_exact,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "ci_half_width": self.ci_half_width,
            "pattern_weight": self.pattern_weight,
        }


@dataclass(frozen=True)
class ExperimentReport:
    scheme: str
    params: Dict[str, object]
    length: int
    budget: int
    delta: float
    adversary: Dict[str, object]
    trials: int
    seed: int
    confidence: float
    results: Tuple[QueryResult, ...]
    worst_error: float
    wall_time: float = 0.0

    def canonical_dict(self) -> Dict[str, object]:
        """Everything except wall time, ready for stable serialization."""
        return {
            "scheme": self.scheme,
            "params": self.params,
            "length": self.length,
            "budget": self.budget,
            "delta": self.delta,
            "adversary": self.adversary,
            "trials": self.trials,
            "seed": self.seed,
            "confidence": self.confidence,
            "results": [r.to_dict() for r in self.results],
            "worst_error": self.worst_error,
        }

    def to_json(self, include_wall_time: bool = False) -> str:
        out = self.canonical_dict()
        if include_wall_time:
            out["wall_time"] = self.wall_time
        return json.dumps(out, sort_keys=True, indent=2)

    def csv_rows(self) -> List[Dict[str, object]]:
        head = {
            "scheme": self.scheme,
            "length": self.length,
            "budget": self.budget,
            "delta": self.delta,
            "adversary": self.adversary.get("kind"),
            "seed": self.seed,
        }
        return [dict(head, **r.to_dict()) for r in self.results]


def _measure_query(scheme, query, pattern, trials, seed, exact_limit, conf):
    count = scheme.coin_count(query)
    label = scheme.query_label(query)
    if count <= exact_limit:
        err = exact_error(scheme, query, pattern, limit=exact_limit)
        return QueryResult(
            query=label,
            mode="exact",
            trials=count,
            wrong=int(err * count),
            error=float(err),
            error_exact=str(err),
            ci_low=float(err),
            ci_high=float(err),
            pattern_weight=pattern.weight,
        )
    truth = scheme.truth(query)
    oracle = ProbeOracle(scheme.codeword, pattern, scheme.probe_budget(query))
    decode = scheme.decode_with_coins
    sample = scheme.sample_coins
    wrong = 0
    done = 0
    block = 0
    while done < trials:
        rng = stream("mc", seed, label, block)
        for _ in range(min(MC_BLOCK, trials - done)):
            oracle.reset()
            if decode(oracle, query, sample(query, rng)) != truth:
                wrong += 1
        done += min(MC_BLOCK, trials - done)
        block += 1
    lo, hi = clopper_pearson(wrong, trials, conf)
    return QueryResult(
        query=label,
        mode="mc",
        trials=trials,
        wrong=wrong,
        error=wrong / trials,
        error_exact=None,
        ci_low=lo,
        ci_high=hi,
        pattern_weight=pattern.weight,
    )


def estimate_error(
    scheme: Scheme,
    queries: Optional[Sequence] = None,
    strategy: Optional[AdversaryStrategy] = None,
    trials: int = 100_000,
    seed: int = 0,
    exact_limit: int = EXACT_STATE_LIMIT,
    confidence: float = 0.99,
) -> ExperimentReport:
    """Per-query and worst-query decoding error under one adversary.

    Targeted strategies with no explicit target are re-aimed at each
    measured query; untargeted ones contribute a single pattern reused
    across queries.
    """
    if trials < 1:
        raise ParameterError("need trials >= 1")
    t0 = time.monotonic()
    if queries is None:
        queries = list(scheme.queries())
    if strategy is None:
        strategy = AdversaryStrategy(kind="none", budget=0)
    shared: Optional[CorruptionPattern] = None
    if strategy.kind in ("none", "random_flips") or strategy.target is not None:
        shared = attack(strategy, scheme, strategy.target)
    results = []
    for query in queries:
        pattern = shared if shared is not None else attack(strategy, scheme, query)
        results.append(
            _measure_query(scheme, query, pattern, trials, seed, exact_limit, confidence)
        )
    worst = max((r.error for r in results), default=0.0)
    n = scheme.codeword.n
    return ExperimentReport(
        scheme=scheme.name,
        params=scheme.params(),
        length=n,
        budget=strategy.budget,
        delta=strategy.budget / n,
        adversary=strategy.describe(),
        trials=trials,
        seed=seed,
        confidence=confidence,
        results=tuple(results),
        worst_error=worst,
        wall_time=time.monotonic() - t0,
    )


def sweep(cells: Sequence[Dict], runner: Callable[[Dict], ExperimentReport]) -> List[Dict]:
    """Run one report per cell, in order; a failing cell records its
    error and the sweep continues."""
    out: List[Dict] = []
    for cell in cells:
        entry: Dict[str, object] = {"config": cell}
        try:
            entry["report"] = runner(cell).canonical_dict()
        except Exception as exc:  # recorded, not raised
            entry["error"] = "%s: %s" % (type(exc).__name__, exc)
        out.append(entry)
    return out
