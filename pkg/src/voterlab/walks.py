"""Random walks on the out-degrees: pair meetings, coalescence, stationarity.

The continuous-time walk jumps at rate 1 to a uniform out-slot's head; its
skeleton is the discrete asynchronous pair chain where one of the two walks
moves per step with a fair coin. Meeting is checked only at jump instants.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dcm import Digraph


@dataclass
class MeetingSample:
    start: tuple
    meet_time: Optional[float]
    steps: int
    tau_bar: Optional[float]
    chase_meet: bool
    mode: str  # "discrete" | "continuous"

    @property
    def censored(self) -> bool:
        return self.meet_time is None


@dataclass(frozen=True)
class StationaryDistribution:
    pi: np.ndarray
    residual: float


def rw_step(g: Digraph, x: int, rng) -> int:
    """One skeleton step: head of a uniformly chosen out-slot of x."""
    lo = int(g.out_off[x])
    deg = int(g.out_off[x + 1]) - lo
    return int(g.out_flat[lo + int(rng.integers(0, deg))])


def sample_meeting(g: Digraph, x: int, y: int, mode: str, cap: float, rng) -> MeetingSample:
    """First co-location of two independent walks started at (x, y).

    Tracks tau_bar, the first time the X-walk steps to a vertex outside
    Y's visited trail plus {x}; `chase_meet` marks a meeting that happened
    before any such departure. Censored (meet_time None) at `cap`, measured
    in steps (discrete) or time units (continuous).
    """
    if mode not in ("discrete", "continuous"):
        raise ValueError(f"unknown mode {mode!r}")
    if x == y:
        return MeetingSample((x, y), 0.0, 0, None, False, mode)
    out_off = g.out_off
    out_flat = g.out_flat
    px, py = x, y
    trail = {y}
    tau_bar = None
    t = 0.0
    steps = 0
    continuous = mode == "continuous"
    while True:
        if continuous:
            t += rng.exponential(0.5)  # pair jump rate 2
            if t > cap:
                return MeetingSample((x, y), None, steps, tau_bar, False, mode)
        else:
            t += 1.0
            if t > cap:
                return MeetingSample((x, y), None, steps, tau_bar, False, mode)
        steps += 1
        mover_is_x = rng.integers(0, 2) == 0
        if mover_is_x:
            lo = int(out_off[px])
            deg = int(out_off[px + 1]) - lo
            px = int(out_flat[lo + int(rng.integers(0, deg))])
            if tau_bar is None and px not in trail and px != x:
                tau_bar = t
        else:
            lo = int(out_off[py])
            deg = int(out_off[py + 1]) - lo
            py = int(out_flat[lo + int(rng.integers(0, deg))])
            trail.add(py)
        if px == py:
            return MeetingSample((x, y), t, steps, tau_bar, tau_bar is None, mode)


def stationary_distribution(g: Digraph, tol: float = 1e-12,
                            max_iters: int = 100_000) -> StationaryDistribution:
    """Fixed point of the lazy kernel (I + P)/2 by power iteration.

    The lazy kernel shares its stationary vector with P and removes
    periodicity; each sweep is O(m).
    """
    tails = g.edges[:, 0]
    heads = g.edges[:, 1]
    out_deg = (g.out_off[1:] - g.out_off[:-1]).astype(float)
    pi = np.full(g.n, 1.0 / g.n)
    for _ in range(max_iters):
        flow = (pi / out_deg)[tails]
        nxt = 0.5 * pi + 0.5 * np.bincount(heads, weights=flow, minlength=g.n)
        nxt /= nxt.sum()
        residual = float(np.abs(nxt - pi).sum())
        pi = nxt
        if residual < tol:
            return StationaryDistribution(pi, residual)
    raise RuntimeError(
        f"power iteration did not reach tol={tol} in {max_iters} sweeps "
        f"(residual {residual:.3e})"
    )


def meeting_from_stationarity(g: Digraph, N: int, cap: float, seed,
                              pi: Optional[np.ndarray] = None) -> list:
    """N continuous-mode meeting samples with both starts i.i.d. stationary.

    Co-located starts are kept with meet_time 0 (their probability is the
    O(1/n) atom sum(pi^2), negligible on the diffusive scale).
    """
    rng = np.random.default_rng(seed)
    if pi is None:
        pi = stationary_distribution(g).pi
    starts_x = rng.choice(g.n, size=N, p=pi)
    starts_y = rng.choice(g.n, size=N, p=pi)
    return [
        sample_meeting(g, int(sx), int(sy), "continuous", cap, rng)
        for sx, sy in zip(starts_x, starts_y)
    ]


def wasserstein_to_exp1(samples, scale: float) -> float:
    """Empirical Wasserstein-1 distance between rescaled meeting times and
    Exp(1), via order statistics against the quantiles Q((i-0.5)/N)."""
    if scale <= 0:
        raise ValueError("scale must be > 0")
    times = []
    for s in samples:
        if isinstance(s, MeetingSample):
            if s.censored:
                raise ValueError("censored samples cannot enter the W1 estimate")
            times.append(s.meet_time)
        else:
            times.append(float(s))
    if not times:
        raise ValueError("no samples")
    times = np.sort(np.asarray(times, dtype=float)) / scale
    N = len(times)
    q = -np.log(1.0 - (np.arange(1, N + 1) - 0.5) / N)
    return float(np.abs(times - q).mean())


def coalescing_system(g: Digraph, starts, cap: float, seed):
    """Coalescing walks from `starts`: walks merge on co-location.

    Returns (tau_coal, merge_times); tau_coal is None when censored at cap.
    """
    starts = sorted(set(int(v) for v in starts))
    if not starts:
        raise ValueError("starts must be non-empty")
    rng = np.random.default_rng(seed)
    out_off = g.out_off
    out_flat = g.out_flat
    positions = list(starts)  # compacted: active walks only
    occupant = {v: i for i, v in enumerate(positions)}
    merge_times = []
    t = 0.0
    while len(positions) > 1:
        k = len(positions)
        t += rng.exponential(1.0 / k)
        if t > cap:
            return None, merge_times
        i = int(rng.integers(0, k))
        v = positions[i]
        lo = int(out_off[v])
        deg = int(out_off[v + 1]) - lo
        w = int(out_flat[lo + int(rng.integers(0, deg))])
        del occupant[v]
        if w in occupant:
            # coalesce: drop walk i by swapping in the last walk
            merge_times.append(t)
            last = positions.pop()
            if i < len(positions):
                positions[i] = last
                occupant[last] = i
        else:
            positions[i] = w
            occupant[w] = i
    tau_coal = merge_times[-1] if merge_times else 0.0
    return tau_coal, merge_times


def meetings_to_csv(samples, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x0", "y0", "meet_time", "steps", "tau_bar", "chase_meet", "censored"])
        for s in samples:
            w.writerow([
                s.start[0], s.start[1],
                "" if s.meet_time is None else repr(s.meet_time),
                s.steps,
                "" if s.tau_bar is None else repr(s.tau_bar),
                int(s.chase_meet), int(s.censored),
            ])
