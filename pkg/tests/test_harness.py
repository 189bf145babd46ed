"""Adversary strategies, exact/MC measurement, and report canonicalization.

Hand-computable targets reuse the small structures from the other test
modules: attacks on them produce flip sets whose exact effect is known
in closed form (probe-set hits raise member error by hits/d, a killed
block inverts every offset pair, a quarter-piece flip gives error 1/2).
"""

import json
import math
import random
from fractions import Fraction

import pytest

from ecds.bits import BitString
from ecds.errors import ParameterError
from ecds.harness import (
    AdversaryStrategy,
    ExperimentReport,
    attack,
    clopper_pearson,
    estimate_error,
    sweep,
)
from ecds.hadamard import HadamardIp, MajorityAmplified, pairwise_error_counts
from ecds.inner_product import SubstringHadamard
from ecds.membership import BlockCodedMembership, OneProbeMembership
from ecds.oracle import CorruptionPattern, exact_error


def test_strategy_validation():
    with pytest.raises(ParameterError):
        AdversaryStrategy(kind="nope", budget=1)
    with pytest.raises(ParameterError):
        AdversaryStrategy(kind="none", budget=-1)
    s = AdversaryStrategy(kind="random_flips", budget=3, seed=9)
    assert s.describe() == {"kind": "random_flips", "budget": 3, "seed": 9}
    t = AdversaryStrategy(kind="greedy_local", budget=2, target=BitString.from01("10"))
    assert t.describe()["target"] == "10"


def test_attack_none_is_empty():
    sch = HadamardIp(BitString.from01("101"))
    pattern = attack(AdversaryStrategy(kind="none", budget=5), sch)
    assert pattern.weight == 0


def test_attack_random_flips():
    sch = HadamardIp(BitString.from01("1011"))
    strat = AdversaryStrategy(kind="random_flips", budget=4, seed=1)
    a = attack(strat, sch)
    assert a.weight == 4
    assert all(1 <= j <= 16 for j in a.positions)
    assert attack(strat, sch) == a
    b = attack(AdversaryStrategy(kind="random_flips", budget=4, seed=2), sch)
    assert b != a
    big = attack(AdversaryStrategy(kind="random_flips", budget=99, seed=1), sch)
    assert big.weight == 16


def membership_toy():
    st = OneProbeMembership(
        n=2,
        s=1,
        eps=0.4,
        probe_sets=[(1, 2, 3, 4, 5), (4, 5, 6, 7, 8)],
        n_prime=8,
    )
    return st.instance(BitString.from01("10"))


def test_probe_set_killer_raises_member_error_by_hits():
    inst = membership_toy()
    strat = AdversaryStrategy(kind="probe_set_killer", budget=3)
    pattern = attack(strat, inst, target=1)
    assert pattern.positions == (1, 2, 3)
    assert exact_error(inst, 1, pattern) == Fraction(3, 5)
    with pytest.raises(ParameterError):
        attack(strat, HadamardIp(BitString.from01("1")))


def composed_toy():
    base = OneProbeMembership(
        n=4,
        s=1,
        eps=0.4,
        probe_sets=[(1, 3), (5, 7), (2, 4), (6, 8)],
        n_prime=8,
    )
    st = BlockCodedMembership(public_n=2, base=base, perm=list(range(8)), a=2)
    return st


def test_block_killer_inverts_good_blocks():
    st = composed_toy()
    x = BitString.from01("10")
    block = st.instance(x, decoder="block")
    direct = st.instance(x, decoder="direct")
    full = attack(AdversaryStrategy(kind="block_killer", budget=4), block, target=1)
    assert full.positions == (3, 4, 7, 8)
    # every good block answers inverted; only the fallback coin survives
    assert exact_error(block, 1, full) == Fraction(3, 4)
    assert exact_error(direct, 1, full) == 1
    half = attack(AdversaryStrategy(kind="block_killer", budget=2), block, target=1)
    assert half.positions == (3, 4)
    assert exact_error(block, 1, half) == Fraction(1, 2)
    with pytest.raises(ParameterError):
        attack(AdversaryStrategy(kind="block_killer", budget=2), direct.structure.base.instance(st.embed(x)))


def test_piece_killer_quarter_flip():
    sch = SubstringHadamard(BitString.from01("1011"), 2)
    strat = AdversaryStrategy(kind="piece_killer", budget=4)
    pattern = attack(strat, sch, target=1)
    assert pattern.positions == (4,)
    for i in (1, 2):
        assert exact_error(sch, BitString.unit(4, i), pattern) == Fraction(1, 2)
    with pytest.raises(ParameterError):
        attack(strat, HadamardIp(BitString.from01("1")))
    skinny = SubstringHadamard(BitString.from01("1011"), 4)
    with pytest.raises(ParameterError):
        attack(strat, skinny, target=1)


def test_piece_killer_respects_budget():
    sch = SubstringHadamard(BitString.from01("10110100"), 2)  # chunk 4
    pattern = attack(
        AdversaryStrategy(kind="piece_killer", budget=2), sch, target=1
    )
    assert pattern.weight == 2


def test_greedy_local_finds_worst_pair():
    sch = HadamardIp(BitString.from01("101"))
    strat = AdversaryStrategy(kind="greedy_local", budget=2, seed=4, eval_proposals=20)
    pattern = attack(strat, sch)
    assert pattern.weight == 2
    # any two distinct flips already force worst-query error 1/2
    assert int(pairwise_error_counts(3, pattern).max()) == 4


def test_greedy_local_generic_paths():
    inst = membership_toy()
    pattern = attack(
        AdversaryStrategy(kind="greedy_local", budget=2, seed=0, eval_proposals=10),
        inst,
    )
    assert pattern.weight == 2
    big = MajorityAmplified(HadamardIp(BitString.from01("1011")), 5)
    pattern = attack(
        AdversaryStrategy(
            kind="greedy_local",
            budget=2,
            seed=0,
            eval_proposals=2,
            eval_trials=64,
            eval_queries=2,
        ),
        big,
    )
    assert pattern.weight == 2


def bisect_binomial_lower(wrong, trials, alpha):
    """p with P(X >= wrong) = alpha, by bisection on the exact tail."""
    def tail(p):
        return sum(
            math.comb(trials, j) * p**j * (1 - p) ** (trials - j)
            for j in range(wrong, trials + 1)
        )

    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = (lo + hi) / 2
        if tail(mid) < alpha:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def test_clopper_pearson_against_tail_bisection():
    lo, hi = clopper_pearson(5, 100, conf=0.99)
    assert lo == pytest.approx(bisect_binomial_lower(5, 100, 0.005), abs=1e-9)
    assert lo < 0.05 < hi
    assert clopper_pearson(0, 50)[0] == 0.0
    assert clopper_pearson(50, 50)[1] == 1.0
    narrow = clopper_pearson(5, 100, conf=0.95)
    assert lo < narrow[0] and narrow[1] < hi
    with pytest.raises(ParameterError):
        clopper_pearson(5, 4)


def test_estimate_error_exact_mode():
    sch = HadamardIp(BitString.from01("101"))
    rep = estimate_error(sch, trials=10, seed=0)
    assert rep.scheme == "hadamard-ip"
    assert len(rep.results) == 8
    assert rep.worst_error == 0.0
    for r in rep.results:
        assert r.mode == "exact"
        assert r.trials == 8
        assert r.error == 0.0 and r.error_exact == "0"
        assert r.ci_low == r.ci_high == 0.0


def test_estimate_error_exact_under_attack():
    sch = HadamardIp(BitString.from01("1010"))
    strat = AdversaryStrategy(kind="random_flips", budget=2, seed=3)
    rep = estimate_error(sch, strategy=strat, trials=10, seed=0)
    pattern = attack(strat, sch)
    counts = pairwise_error_counts(4, pattern)
    assert rep.worst_error == int(counts.max()) / 16
    assert rep.budget == 2 and rep.delta == 2 / 16
    for r in rep.results:
        assert r.pattern_weight == 2


def test_estimate_error_mc_mode():
    sch = HadamardIp(BitString.from01("10110"))
    strat = AdversaryStrategy(kind="random_flips", budget=3, seed=7)
    queries = [BitString.from01("10000"), BitString.from01("01100")]
    rep = estimate_error(
        sch, queries=queries, strategy=strat, trials=3000, seed=11, exact_limit=1
    )
    pattern = attack(strat, sch)
    for r, q in zip(rep.results, queries):
        assert r.mode == "mc" and r.trials == 3000
        truth = float(exact_error(sch, q, pattern))
        assert r.ci_low <= truth <= r.ci_high
    again = estimate_error(
        sch, queries=queries, strategy=strat, trials=3000, seed=11, exact_limit=1
    )
    assert rep.to_json() == again.to_json()
    other = estimate_error(
        sch, queries=queries, strategy=strat, trials=3000, seed=12, exact_limit=1
    )
    assert [r.wrong for r in other.results] != [r.wrong for r in rep.results]


def test_targeted_strategy_reaims_per_query():
    inst = membership_toy()
    strat = AdversaryStrategy(kind="probe_set_killer", budget=2)
    rep = estimate_error(inst, strategy=strat, trials=10, seed=0)
    # each query's own probe set is hit: member error 2/5 exactly,
    # nonmember gains nothing it did not already have
    by_query = {r.query: r for r in rep.results}
    assert by_query["1"].error_exact == "2/5"
    assert float(by_query["2"].error) <= 0.4 + 0.4


def test_report_canonical_bytes_exclude_wall_time():
    sch = HadamardIp(BitString.from01("11"))
    rep = estimate_error(sch, trials=10, seed=0)
    assert rep.wall_time >= 0.0
    plain = json.loads(rep.to_json())
    assert "wall_time" not in plain
    timed = json.loads(rep.to_json(include_wall_time=True))
    assert "wall_time" in timed


def test_report_csv_rows():
    sch = HadamardIp(BitString.from01("110"))
    rep = estimate_error(sch, trials=10, seed=0)
    rows = rep.csv_rows()
    assert len(rows) == 8
    assert rows[0]["scheme"] == "hadamard-ip"
    assert rows[0]["adversary"] == "none"
    assert "error" in rows[0] and "query" in rows[0]


def test_estimate_error_rejects_bad_trials():
    with pytest.raises(ParameterError):
        estimate_error(HadamardIp(BitString.from01("1")), trials=0)


def test_sweep_records_failures_and_continues():
    def runner(cell):
        if cell.get("boom"):
            raise ValueError("bad cell")
        return estimate_error(HadamardIp(BitString.from01("10")), trials=10)

    out = sweep([{"ok": 1}, {"boom": 1}, {"ok": 2}], runner)
    assert len(out) == 3
    assert "report" in out[0] and "report" in out[2]
    assert out[1]["error"].startswith("ValueError")
