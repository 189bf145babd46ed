"""Evaluable lower bounds and impossibility thresholds, plus numeric
verification of the sign-matrix discrepancy argument behind them.

Values are exact rationals whenever the formula permits; otherwise
floats with the exact ingredients (ball sizes, entropies) recorded in
the inputs, so every report can be recomputed from its own fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from .bits import ball_size
from .errors import InfeasibleSizeError, ParameterError
from .seeding import derive_seed

MATRIX_MAX_N = 12
MATRIX_MAX_COLS = 4096


@dataclass(frozen=True)
class BoundReport:
    """One evaluated formula: inputs, float value, exact form if any."""

    formula: str
    inputs: Dict[str, object]
    value: float
    exact: Optional[Fraction] = None
    provenance: str = "formula"

    def to_dict(self) -> Dict[str, object]:
        return {
            "formula": self.formula,
            "inputs": {k: _plain(v) for k, v in self.inputs.items()},
            "value": self.value,
            "exact": None if self.exact is None else str(self.exact),
            "provenance": self.provenance,
        }


def _plain(v):
    if isinstance(v, Fraction):
        return str(v)
    return v


def binary_entropy(x: float) -> float:
    """H(x) in bits, with H(0) = H(1) = 0 by continuity."""
    if not 0 <= x <= 1:
        raise ParameterError("entropy argument outside [0,1]")
    if x in (0, 1):
        return 0.0
    x = float(x)
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def ip_comm_lower_bound(n: int, r: int, beta) -> BoundReport:
    """Bits of one-way communication needed to compute x.y (weight(y)<=r)
    with success 1/2 + beta: log2 B(n,r) - 2 log2(1/(2 beta))."""
    beta = Fraction(beta)
    if not 0 < beta <= Fraction(1, 2):
        raise ParameterError("need 0 < beta <= 1/2")
    b = ball_size(n, r)
    value = math.log2(b) - 2 * math.log2(1 / (2 * beta))
    return BoundReport(
        formula="ip-communication",
        inputs={"n": n, "r": r, "beta": beta, "ball": b},
        value=value,
    )


def ip_ds_lower_bound(n: int, r: int, eps, p: int) -> BoundReport:
    """Minimum length of a p-probe structure answering x.y with error eps:
    (1/2) * 2^((log2 B(n,r) - 2 log2(1/(1-2 eps)) - 1)/p).

    At p = 1 the value is exactly B(n,r) (1-2 eps)^2 / 4.
    """
    eps = Fraction(eps)
    if not 0 <= eps < Fraction(1, 2):
        raise ParameterError("need 0 <= eps < 1/2")
    if p < 1:
        raise ParameterError("need p >= 1")
    b = ball_size(n, r)
    gap = 1 - 2 * eps
    exponent = (math.log2(b) - 2 * math.log2(1 / gap) - 1) / p
    value = 0.5 * 2.0**exponent
    exact = Fraction(b) * gap**2 / 4 if p == 1 else None
    return BoundReport(
        formula="ip-structure-length",
        inputs={"n": n, "r": r, "eps": eps, "p": p, "ball": b},
        value=float(exact) if exact is not None else value,
        exact=exact,
    )


def one_probe_noise_threshold(delta: float, eps: float) -> BoundReport:
    """Universe size beyond which no one-probe membership structure can
    tolerate noise rate delta with error eps: 1/(delta (1 - H(eps)))."""
    if delta <= 0:
        raise ParameterError("need delta > 0")
    if not 0 <= eps < 0.5:
        raise ParameterError("need 0 <= eps < 1/2 (threshold diverges at 1/2)")
    h = binary_entropy(eps)
    value = 1.0 / (delta * (1.0 - h))
    return BoundReport(
        formula="one-probe-noise-threshold",
        inputs={"delta": delta, "eps": eps, "entropy": h},
        value=value,
    )


def membership_trivial_lb(n: int, s: int) -> BoundReport:
    """Information floor for membership structures: log2 B(n,s) bits."""
    if not 0 <= s <= n:
        raise ParameterError("need 0 <= s <= n")
    b = ball_size(n, s)
    value = math.log2(b)
    exact = Fraction(value) if b & (b - 1) == 0 else None
    return BoundReport(
        formula="membership-information",
        inputs={"n": n, "s": s, "ball": b},
        value=value,
        exact=exact,
    )


# -- discrepancy verification -----------------------------------------


def signed_ip_matrix(n: int, r: int) -> np.ndarray:
    """The 2^n x B(n,r) sign matrix with (x,y)-entry (-1)^(x.y), columns
    ordered lexicographically by y."""
    if n > MATRIX_MAX_N:
        raise InfeasibleSizeError("sign matrix limited to n <= %d" % MATRIX_MAX_N)
    cols = ball_size(n, r)
    if cols > MATRIX_MAX_COLS:
        raise InfeasibleSizeError(
            "sign matrix limited to %d columns" % MATRIX_MAX_COLS
        )
    from .bits import BoundedWeightSpace

    ys = np.fromiter(
        (v.value for v in BoundedWeightSpace(n, r)), dtype=np.uint64, count=cols
    )
    xs = np.arange(1 << n, dtype=np.uint64)
    par = np.bitwise_count(xs[:, None] & ys[None, :]) & 1
    return (1 - 2 * par.astype(np.int64)).astype(np.int64)


def check_orthogonality(n: int, r: int) -> bool:
    """Exact check that the sign matrix satisfies M^T M = 2^n I."""
    m = signed_ip_matrix(n, r)
    g = m.T @ m
    want = (1 << n) * np.eye(g.shape[0], dtype=np.int64)
    return bool((g == want).all())


@dataclass(frozen=True)
class DiscrepancyReport:
    n: int
    r: int
    orthogonal: bool
    mode: str  # exhaustive | sample
    checked: int
    violations: int
    max_ratio: float
    seed: int

    def to_dict(self) -> Dict[str, object]:
        return {
            "formula": "rectangle-discrepancy",
            "inputs": {"n": self.n, "r": self.r, "seed": self.seed},
            "orthogonal": self.orthogonal,
            "mode": self.mode,
            "checked": self.checked,
            "violations": self.violations,
            "max_ratio": self.max_ratio,
            "provenance": "verified",
        }


def rectangle_sum(m: np.ndarray, va: np.ndarray, vb: np.ndarray) -> int:
    """Exact integer sum of sign-matrix entries over the rectangle A x B."""
    return int(va.astype(np.int64) @ m @ vb.astype(np.int64))


def rectangle_within_bound(m: np.ndarray, n: int, va, vb) -> Tuple[bool, int]:
    """The rectangle bound as an integer inequality: (sum over R)^2 <= |A| |B| 2^n."""
    s = rectangle_sum(m, va, vb)
    lhs = s * s
    rhs = int(va.sum()) * int(vb.sum()) * (1 << n)
    return lhs <= rhs, s

def discrepancy_verify(
    n: int,
    r: int,
    samples: int = 10_000,
    seed: int = 0,
    exhaustive_limit: int = 1 << 20,
) -> DiscrepancyReport:
    """Verify the rectangle-discrepancy bound on the sign matrix.

    Checks M^T M = 2^n I exactly, then the integer inequality
    (sum_R M)^2 <= |A| |B| 2^n over rectangles: all 2^(2^n) * 2^B of them
    when that count is at most exhaustive_limit, else `samples` random
    ones.  max_ratio reports the largest observed |sum| / sqrt(|A||B|2^n).
    """
    m = signed_ip_matrix(n, r)
    rows, cols = m.shape
    ortho = check_orthogonality(n, r)
    total = 2 ** (rows + cols) if rows + cols < 64 else None
    exhaustive = total is not None and total <= exhaustive_limit
    checked = 0
    violations = 0
    max_ratio = 0.0

    def _account(va, vb):
        nonlocal checked, violations, max_ratio
        ok, s = rectangle_within_bound(m, n, va, vb)
        checked += 1
        if not ok:
            violations += 1
        area = int(va.sum()) * int(vb.sum())
        if area:
            max_ratio = max(max_ratio, abs(s) / math.sqrt(area * (1 << n)))

    if exhaustive:
        for amask in range(1 << rows):
            va = (amask >> np.arange(rows)) & 1
            for bmask in range(1 << cols):
                vb = (bmask >> np.arange(cols)) & 1
                _account(va, vb)
    else:
        rng = np.random.default_rng(derive_seed("discrepancy", seed, n, r))
        for _ in range(samples):
            _account(
                rng.integers(0, 2, size=rows, dtype=np.int64),
                rng.integers(0, 2, size=cols, dtype=np.int64),
            )
    return DiscrepancyReport(
        n=n,
        r=r,
        orthogonal=ortho,
        mode="exhaustive" if exhaustive else "sample",
        checked=checked,
        violations=violations,
        max_ratio=max_ratio,
        seed=seed,
    )
