"""Bi-degree sequences and their scalar functionals.

A bi-degree sequence assigns each vertex an in-degree and an out-degree with
equal totals, and is the sole input of the directed configuration model.
The functionals delta, beta, rho, gamma derived from it control every
closed-form prediction in this package, and theta sets the linear time
scale of meeting and consensus.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np


class DegreeSequenceError(ValueError):
    """Structurally invalid degree sequence (lengths or sum constraint)."""


class GenerationError(RuntimeError):
    """A degree-sequence generator could not satisfy its constraints."""


@dataclass(frozen=True)
class BiDegreeSequence:
    """Paired in/out degree arrays with matching totals.

    Immutable after construction; `m` is the common stub total.
    """

    in_deg: np.ndarray
    out_deg: np.ndarray
    n: int = field(init=False)
    m: int = field(init=False)

    def __post_init__(self):
        in_deg = np.asarray(self.in_deg, dtype=np.int64)
        out_deg = np.asarray(self.out_deg, dtype=np.int64)
        object.__setattr__(self, "in_deg", in_deg)
        object.__setattr__(self, "out_deg", out_deg)
        if in_deg.ndim != 1 or out_deg.ndim != 1 or len(in_deg) == 0:
            raise DegreeSequenceError("degree arrays must be non-empty 1-d arrays")
        if len(in_deg) != len(out_deg):
            raise DegreeSequenceError(
                f"length mismatch: {len(in_deg)} in-degrees vs {len(out_deg)} out-degrees"
            )
        if (in_deg < 0).any() or (out_deg < 0).any():
            raise DegreeSequenceError("degrees must be non-negative")
        m_in = int(in_deg.sum())
        m_out = int(out_deg.sum())
        if m_in != m_out:
            raise DegreeSequenceError(
                f"stub totals differ: sum(in_deg)={m_in} != sum(out_deg)={m_out}"
            )
        object.__setattr__(self, "n", len(in_deg))
        object.__setattr__(self, "m", m_in)
        in_deg.setflags(write=False)
        out_deg.setflags(write=False)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["vertex", "in_deg", "out_deg"])
            for x in range(self.n):
                w.writerow([x, int(self.in_deg[x]), int(self.out_deg[x])])

    @classmethod
    def from_csv(cls, path) -> "BiDegreeSequence":
        vertices, ins, outs = [], [], []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                vertices.append(int(row["vertex"]))
                ins.append(int(row["in_deg"]))
                outs.append(int(row["out_deg"]))
        order = np.argsort(vertices)
        return cls(np.asarray(ins)[order], np.asarray(outs)[order])


@dataclass(frozen=True)
class TheoryParams:
    """Scalar functionals of a degree sequence.

    delta = m/n, beta = (1/m) sum (d-)^2, rho = (1/m) sum d-/d+,
    gamma = (1/m) sum (d-)^2/d+, and theta the consensus time-scale constant.
    theta is NaN (with `theta_defined` False) when rho >= 1 makes the
    square root in its definition degenerate.
    """

    delta: float
    beta: float
    rho: float
    gamma: float
    theta: float
    n: int
    m: int

    @property
    def theta_defined(self) -> bool:
        return math.isfinite(self.theta)

    def to_json(self, path=None) -> str:
        payload = json.dumps(
            {
                "delta": self.delta,
                "beta": self.beta,
                "rho": self.rho,
                "gamma": self.gamma,
                "theta": self.theta if self.theta_defined else None,
                "n": self.n,
                "m": self.m,
            }
        )
        if path is not None:
            with open(path, "w") as fh:
                fh.write(payload)
        return payload


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    sum_ok: bool
    length_ok: bool
    min_degree_ok: bool
    d_in_min: int
    d_in_max: int
    d_out_min: int
    d_out_max: int
    messages: tuple


def validate(seq: BiDegreeSequence, require_assumption1: bool = False) -> ValidationReport:
    """Check the sum constraint and, optionally, the bounded-degree regime
    (all degrees >= 2) required by the sparse strongly-connected setting."""
    msgs = []
    # construction already enforces lengths and sums; re-derive for the report
    length_ok = len(seq.in_deg) == len(seq.out_deg)
    sum_ok = int(seq.in_deg.sum()) == int(seq.out_deg.sum())
    d_in_min = int(seq.in_deg.min())
    d_in_max = int(seq.in_deg.max())
    d_out_min = int(seq.out_deg.min())
    d_out_max = int(seq.out_deg.max())
    min_ok = True
    if require_assumption1:
        min_ok = d_in_min >= 2 and d_out_min >= 2
        if not min_ok:
            msgs.append(
                f"minimum degree below 2: d_in_min={d_in_min}, d_out_min={d_out_min}"
            )
    if not sum_ok:
        msgs.append("stub totals differ")
    ok = length_ok and sum_ok and min_ok
    return ValidationReport(
        ok, sum_ok, length_ok, min_ok, d_in_min, d_in_max, d_out_min, d_out_max, tuple(msgs)
    )


def gen_regular(n: int, d: int) -> BiDegreeSequence:
    """All in- and out-degrees equal to d."""
    if n < 1:
        raise GenerationError("n must be >= 1")
    if d < 2:
        raise GenerationError("regular degree must be >= 2 for strong connectivity")
    deg = np.full(n, d, dtype=np.int64)
    return BiDegreeSequence(deg, deg.copy())


def _repair_sum(arr: np.ndarray, target: int, lo: int, hi: int, rng: np.random.Generator):
    """Adjust entries by +-1 within [lo, hi] until arr sums to target."""
    arr = arr.copy()
    diff = target - int(arr.sum())
    guard = 0
    while diff != 0:
        i = int(rng.integers(0, len(arr)))
        if diff > 0 and arr[i] < hi:
            arr[i] += 1
            diff -= 1
        elif diff < 0 and arr[i] > lo:
            arr[i] -= 1
            diff += 1
        guard += 1
        if guard > 1000 * (abs(diff) + len(arr)):
            raise GenerationError("sum repair did not converge")
    return arr


def gen_uniform_range(n: int, lo: int, hi: int, seed: int) -> BiDegreeSequence:
    """Degrees i.i.d. uniform on {lo..hi}, repaired to equal in/out sums.

    The repair makes seeded +-1 adjustments that never leave [lo, hi], so the
    output still satisfies the bounded-degree assumption.
    """
    if not (2 <= lo <= hi):
        raise GenerationError(f"need 2 <= lo <= hi, got lo={lo}, hi={hi}")
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xD5EC)))
    in_deg = rng.integers(lo, hi + 1, size=n)
    out_deg = rng.integers(lo, hi + 1, size=n)
    target = int(out_deg.sum())
    if not (n * lo <= target <= n * hi):
        raise GenerationError("required sum outside attainable range")
    in_deg = _repair_sum(in_deg, target, lo, hi, rng)
    return BiDegreeSequence(in_deg, out_deg)


def gen_out_regular(n: int, d: int, in_law, seed: int) -> BiDegreeSequence:
    """Out-degrees all d; in-degrees sampled from `in_law` then sum-repaired.

    `in_law` is a mapping {k: prob} supported on integers >= 2.
    """
    if d < 2:
        raise GenerationError("out-degree must be >= 2")
    ks = np.array(sorted(in_law), dtype=np.int64)
    ps = np.array([in_law[int(k)] for k in ks], dtype=float)
    if (ks < 2).any():
        raise GenerationError("in-degree law must be supported on integers >= 2")
    if abs(ps.sum() - 1.0) > 1e-9 or (ps < 0).any():
        raise GenerationError("in-degree law probabilities must sum to 1")
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x0D1A)))
    in_deg = rng.choice(ks, size=n, p=ps / ps.sum())
    lo, hi = int(ks.min()), int(ks.max())
    target = n * d
    if not (n * lo <= target <= n * hi):
        raise GenerationError(
            f"cannot repair in-degrees in [{lo},{hi}] to total {target}"
        )
    in_deg = _repair_sum(in_deg, target, lo, hi, rng)
    return BiDegreeSequence(in_deg, np.full(n, d, dtype=np.int64))


def stats(seq: BiDegreeSequence) -> TheoryParams:
    """Compute delta, beta, rho, gamma, theta for a degree sequence.

    Sums are accumulated with math.fsum (compensated) so that sequences with
    up to ~1e6 vertices keep full double precision.
    """
    if (seq.out_deg < 1).any():
        raise DegreeSequenceError("all out-degrees must be >= 1 for the statistics")
    din = seq.in_deg.astype(float)
    dout = seq.out_deg.astype(float)
    m = float(seq.m)
    delta = m / seq.n
    beta = math.fsum(din * din) / m
    rho = math.fsum(din / dout) / m
    gamma = math.fsum(din * din / dout) / m
    if 0.0 < rho < 1.0:
        theta = delta / (
            (gamma - rho) / (1.0 - rho) * (1.0 - math.sqrt(1.0 - rho)) / rho + beta - 1.0
        )
    else:
        # the square root degenerates at rho >= 1; do not extend analytically
        theta = math.nan
    return TheoryParams(delta, beta, rho, gamma, theta, seq.n, seq.m)
