"""Exact event-driven voter dynamics with incremental discordance tracking.

Each vertex carries total rate 1 (its out-edges ring at rate 1/d+), so the
system makes events at rate n: pick a uniform vertex, pick one of its
out-slots uniformly (multiplicity-weighted), copy the head's opinion.
The multiplicity-weighted discordant-edge count is maintained incrementally
by scanning only the flipped vertex's in/out slots; self-loops never count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dcm import Digraph

_BLOCK = 1 << 14


@dataclass
class OpinionState:
    opinions: np.ndarray
    discordant_count: int
    ones_count: int
    time: float = 0.0


@dataclass
class Trajectory:
    obs_times: np.ndarray
    densities: np.ndarray
    consensus_time: Optional[float] = None
    absorbed_state: Optional[int] = None

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("t,density\n")
            for t, d in zip(self.obs_times, self.densities):
                fh.write(f"{float(t)!r},{float(d)!r}\n")


def _count_discordant(g: Digraph, opinions: np.ndarray) -> int:
    tails = g.edges[:, 0]
    heads = g.edges[:, 1]
    mask = (tails != heads) & (opinions[tails] != opinions[heads])
    return int(mask.sum())


def discordant_density(g: Digraph, state: OpinionState) -> float:
    """Brute-force recount over all m edges; oracle for the incremental count."""
    return _count_discordant(g, state.opinions) / g.m


def init_bernoulli(g: Digraph, u: float, seed) -> OpinionState:
    """Independent Bernoulli(u) opinions with a full discordance scan."""
    if not (0.0 <= u <= 1.0):
        raise ValueError("u must lie in [0,1]")
    rng = np.random.default_rng(seed)
    opinions = (rng.random(g.n) < u).astype(np.int8)
    return OpinionState(
        opinions=opinions,
        discordant_count=_count_discordant(g, opinions),
        ones_count=int(opinions.sum()),
        time=0.0,
    )


def run(g: Digraph, state: OpinionState, t_max: float, obs_times, seed) -> Trajectory:
    """Advance the dynamics to t_max (or consensus), recording the density
    at each observation time (cadlag: value of the last event at or before).

    Mutates `state` in place and returns the recorded trajectory.
    """
    obs = np.asarray(obs_times, dtype=float)
    if len(obs) and (np.any(np.diff(obs) < 0) or obs[0] < 0 or obs[-1] > t_max):
        raise ValueError("obs_times must be sorted within [0, t_max]")
    rng = np.random.default_rng(seed)
    n = g.n
    m = g.m
    out_off = g.out_off.tolist()
    out_flat = g.out_flat.tolist()
    in_off = g.in_off.tolist()
    in_flat = g.in_flat.tolist()
    op = state.opinions.astype(np.int64).tolist()
    disc = state.discordant_count
    ones = state.ones_count
    t = state.time

    dens_out = []
    j = 0
    consensus_time = None
    absorbed = None
    done = False
    if ones == 0 or ones == n:
        consensus_time = t
        absorbed = 0 if ones == 0 else 1
        done = True
    block = 64  # grows geometrically so short runs stay cheap
    while not done:
        xs = rng.integers(0, n, size=block).tolist()
        us = rng.random(block).tolist()
        es = (rng.exponential(1.0 / n, size=block)).tolist()
        for i in range(block):
            t_next = t + es[i]
            while j < len(obs) and obs[j] < t_next:
                dens_out.append(disc / m)
                j += 1
            if t_next > t_max:
                t = t_max
                done = True
                break
            t = t_next
            x = xs[i]
            deg = out_off[x + 1] - out_off[x]
            y = out_flat[out_off[x] + int(us[i] * deg)]
            a = op[x]
            if a != op[y]:
                for p in range(out_off[x], out_off[x + 1]):
                    z = out_flat[p]
                    if z != x:
                        disc += 1 if op[z] == a else -1
                for p in range(in_off[x], in_off[x + 1]):
                    w = in_flat[p]
                    if w != x:
                        disc += 1 if op[w] == a else -1
                op[x] = 1 - a
                ones += 1 - 2 * a
                if ones == 0 or ones == n:
                    consensus_time = t
                    absorbed = 1 if ones == n else 0
                    done = True
                    break
        block = min(block * 4, _BLOCK)

    while j < len(obs):
        dens_out.append(disc / m)
        j += 1

    state.opinions = np.asarray(op, dtype=np.int8)
    state.discordant_count = disc
    state.ones_count = ones
    state.time = t if consensus_time is None else max(t, consensus_time)
    return Trajectory(
        obs_times=obs,
        densities=np.asarray(dens_out),
        consensus_time=consensus_time,
        absorbed_state=absorbed,
    )


def consensus_time(g: Digraph, state: OpinionState, seed, cap: float) -> Optional[float]:
    """Run until absorption or the time cap; None when censored."""
    if cap <= 0:
        raise ValueError("cap must be > 0")
    traj = run(g, state, cap, [], seed)
    return traj.consensus_time
