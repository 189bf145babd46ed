"""Structure and pattern files: round trips and integrity checking."""

import random

import numpy as np
import pytest

from ecds.bits import BitString
from ecds.errors import ParameterError
from ecds.hadamard import EqualityScheme, HadamardIp, RandomLinearCode
from ecds.harness import estimate_error
from ecds.inner_product import PolySharedIp, SubstringHadamard, TableIp
from ecds.membership import BlockCodedMembership, OneProbeMembership
from ecds.oracle import CorruptionPattern
from ecds.storage import (
    load_pattern,
    load_structure,
    report_csv_text,
    save_pattern,
    save_structure,
)


def roundtrip(tmp_path, scheme):
    path = str(tmp_path / "structure.ecds")
    save_structure(path, scheme)
    back = load_structure(path)
    assert back.codeword == scheme.codeword
    assert back.name == scheme.name
    assert back.params() == scheme.params()
    return back


def test_roundtrip_hadamard_ip(tmp_path):
    roundtrip(tmp_path, HadamardIp(BitString.from01("10110")))


def test_roundtrip_equality_variants(tmp_path):
    x = BitString.from01("1011")
    roundtrip(tmp_path, EqualityScheme(x))
    roundtrip(tmp_path, EqualityScheme(x, balanced=False))
    code = RandomLinearCode(4, 18, rng=random.Random(2))
    back = roundtrip(tmp_path, EqualityScheme(x, code=code))
    assert back.code.rows == code.rows
    assert back.code.dmin == code.dmin
    assert back.gamma == code.gamma


def test_roundtrip_tables(tmp_path):
    x = BitString.from01("110100")
    roundtrip(tmp_path, TableIp(x, 3, 2))
    roundtrip(tmp_path, PolySharedIp(BitString.from01("1011"), 1, 3))
    roundtrip(tmp_path, SubstringHadamard(x, 3, t=3))


def test_roundtrip_membership(tmp_path):
    st = OneProbeMembership(
        n=2,
        s=1,
        eps=0.4,
        probe_sets=[(1, 2, 3, 4, 5), (4, 5, 6, 7, 8)],
        n_prime=8,
    )
    back = roundtrip(tmp_path, st.instance(BitString.from01("10")))
    assert back.structure.probe_set(2) == (4, 5, 6, 7, 8)


def test_roundtrip_composed(tmp_path):
    base = OneProbeMembership(
        n=4,
        s=1,
        eps=0.4,
        probe_sets=[(1, 3), (5, 7), (2, 4), (6, 8)],
        n_prime=8,
    )
    st = BlockCodedMembership(public_n=2, base=base, perm=list(range(8)), a=2)
    for decoder in ("block", "direct"):
        back = roundtrip(tmp_path, st.instance(BitString.from01("10"), decoder))
        assert back.decoder == decoder
        assert back.structure.good_indices == (1, 2)
        assert np.array_equal(back.structure.perm, st.perm)


def test_tampered_payload_is_rejected(tmp_path):
    path = str(tmp_path / "structure.ecds")
    save_structure(path, HadamardIp(BitString.from01("101")))
    raw = bytearray(open(path, "rb").read())
    raw[-1] ^= 0x01
    open(path, "wb").write(bytes(raw))
    with pytest.raises(ParameterError):
        load_structure(path)


def test_wrong_format_is_rejected(tmp_path):
    path = str(tmp_path / "other.json")
    open(path, "w").write('{"format": "something-else"}\n')
    with pytest.raises(ParameterError):
        load_structure(path)
    with pytest.raises(ParameterError):
        load_pattern(path)


def test_pattern_roundtrip(tmp_path):
    path = str(tmp_path / "pattern.json")
    pattern = CorruptionPattern([3, 9, 17])
    save_pattern(path, pattern, 32)
    back, n = load_pattern(path)
    assert back == pattern and n == 32


def test_report_csv_text():
    rep = estimate_error(HadamardIp(BitString.from01("10")), trials=10, seed=0)
    text = report_csv_text(rep)
    lines = text.strip().split("\n")
    assert len(lines) == 1 + 4
    assert lines[0].startswith("scheme,")
    assert "hadamard-ip" in lines[1]
