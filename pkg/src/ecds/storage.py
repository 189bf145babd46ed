"""File formats: structures, corruption patterns, reports.

A structure file is one JSON header line followed by the raw packed
codeword bytes.  The header carries everything needed to rebuild the
scheme deterministically; on load the scheme is rebuilt and its codeword
checked bit-for-bit against the payload, so silent drift between header
and payload cannot pass.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Dict, Tuple

from .bits import BitString
from .errors import ParameterError
from .hadamard import EqualityScheme, HadamardEqualityCode, HadamardIp, RandomLinearCode
from .inner_product import PolySharedIp, SubstringHadamard, TableIp
from .membership import BlockCodedMembership, ComposedInstance, OneProbeMembership
from .oracle import CorruptionPattern

FORMAT = "ecds-structure"
PATTERN_FORMAT = "ecds-pattern"


def _header_of(scheme) -> Dict[str, object]:
    if isinstance(scheme, HadamardIp):
        return {"kind": "hadamard-ip", "x": scheme.x.to01()}
    if isinstance(scheme, EqualityScheme):
        head = {
            "kind": "equality",
            "x": scheme.x.to01(),
            "balanced": scheme.balanced,
            "code": scheme.code.describe(),
        }
        if isinstance(scheme.code, RandomLinearCode):
            head["rows"] = [row.to01() for row in scheme.code.rows]
        return head
    if isinstance(scheme, TableIp):
        return {"kind": "ip-table", "x": scheme.x.to01(), "r": scheme.r, "p": scheme.p}
    if isinstance(scheme, PolySharedIp):
        return {"kind": "ip-poly", "x": scheme.x.to01(), "r": scheme.r, "p": scheme.p}
    if isinstance(scheme, SubstringHadamard):
        return {
            "kind": "substring",
            "x": scheme.x.to01(),
            "r": scheme.r,
            "t": scheme.t,
        }
    if isinstance(scheme, ComposedInstance):
        st = scheme.structure
        return {
            "kind": "membership-composed",
            "x": scheme.x.to01(),
            "decoder": scheme.decoder,
            "public_n": st.public_n,
            "universe": st.base.n,
            "s": st.base.s,
            "eps": st.base.eps,
            "a": st.a,
            "b": st.b,
            "n_prime": st.base.n_prime,
            "probe_sets": [list(st.base.probe_set(i)) for i in range(1, st.base.n + 1)],
            "perm": [int(v) for v in st.perm],
        }
    # the one-probe instance carries its structure
    from .membership import MembershipInstance

    if isinstance(scheme, MembershipInstance) and isinstance(
        scheme.structure, OneProbeMembership
    ):
        st = scheme.structure
        return {
            "kind": "membership-1p",
            "x": scheme.x.to01(),
            "n": st.n,
            "s": st.s,
            "eps": st.eps,
            "n_prime": st.n_prime,
            "probe_sets": [list(st.probe_set(i)) for i in range(1, st.n + 1)],
        }
    raise ParameterError("no storage format for %r" % type(scheme).__name__)


def _rebuild(head: Dict) -> object:
    kind = head["kind"]
    x = BitString.from01(head["x"])
    if kind == "hadamard-ip":
        return HadamardIp(x)
    if kind == "equality":
        code_desc = head["code"]
        if code_desc["kind"] == "hadamard":
            code = HadamardEqualityCode(code_desc["s"])
        else:
            code = RandomLinearCode(
                code_desc["s"],
                code_desc["length"],
                rows=[BitString.from01(r) for r in head["rows"]],
            )
        return EqualityScheme(x, code=code, balanced=head["balanced"])
    if kind == "ip-table":
        return TableIp(x, head["r"], head["p"])
    if kind == "ip-poly":
        return PolySharedIp(x, head["r"], head["p"])
    if kind == "substring":
        return SubstringHadamard(x, head["r"], head["t"])
    if kind == "membership-1p":
        st = OneProbeMembership(
            head["n"], head["s"], head["eps"], head["probe_sets"], head["n_prime"]
        )
        return st.instance(x)
    if kind == "membership-composed":
        base = OneProbeMembership(
            head["universe"],
            head["s"],
            head["eps"],
            head["probe_sets"],
            head["n_prime"],
        )
        st = BlockCodedMembership(head["public_n"], base, head["perm"], head["a"])
        return st.instance(x, decoder=head["decoder"])
    raise ParameterError("unknown structure kind %r" % (kind,))


def save_structure(path: str, scheme) -> None:
    head = _header_of(scheme)
    head["format"] = FORMAT
    head["version"] = 1
    bits = scheme.codeword.bits
    head["length"] = bits.n
    with open(path, "wb") as fh:
        fh.write(json.dumps(head, sort_keys=True).encode())
        fh.write(b"\n")
        fh.write(bits._data)


def load_structure(path: str):
    with open(path, "rb") as fh:
        head = json.loads(fh.readline().decode())
        payload = fh.read()
    if head.get("format") != FORMAT:
        raise ParameterError("not a structure file: %s" % path)
    scheme = _rebuild(head)
    stored = BitString(head["length"], payload)
    if scheme.codeword.bits != stored:
        raise ParameterError("stored codeword does not match its header")
    return scheme


def save_pattern(path: str, pattern: CorruptionPattern, n: int) -> None:
    with open(path, "w") as fh:
        json.dump(
            {
                "format": PATTERN_FORMAT,
                "n": n,
                "weight": pattern.weight,
                "positions": list(pattern.positions),
            },
            fh,
            sort_keys=True,
        )


def load_pattern(path: str) -> Tuple[CorruptionPattern, int]:
    with open(path) as fh:
        head = json.load(fh)
    if head.get("format") != PATTERN_FORMAT:
        raise ParameterError("not a pattern file: %s" % path)
    return CorruptionPattern(head["positions"]), head["n"]


def report_csv_text(report) -> str:
    rows = report.csv_rows()
    if not rows:
        return ""
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)
    return out.getvalue()
