"""Chase experiments on lazy Galton-Watson trees and annealed pair walks.

Two asynchronous walks start on the matched edge x -> y. While the chasing
walk X stays on Y's trail the inter-walk distance performs a +-1 chain, and
the first-meeting pattern at odd step 2s+1 is one of the C_s Dyck paths;
off the trail of an out-directed tree the walks can never meet again, so a
chase run ends at the first meeting or the first trail departure.

The finite-n analogue co-generates the walks together with a partial stub
matching of an actual degree sequence; unvisited tails draw a uniformly
random unmatched head, so a fresh vertex is reached with probability
proportional to its remaining in-stubs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .degree_model import BiDegreeSequence
from .theory import catalan

# on the tree an even-step on-trail meeting is impossible (parity)
EVEN_STEP_CHASE_PROBABILITY = 0.0


@dataclass(frozen=True)
class OffspringLaw:
    """Discrete out-degree law of the vertex owning a uniform in-stub."""

    support: np.ndarray  # degrees
    probs: np.ndarray
    mean: float

    def _cum(self):
        return np.cumsum(self.probs)

    def sample_many(self, rng, size: int) -> np.ndarray:
        cum = np.cumsum(self.probs)
        idx = np.searchsorted(cum, rng.random(size), side="right")
        return self.support[np.minimum(idx, len(self.support) - 1)]


@dataclass
class ChaseOutcome:
    meet_step: Optional[int]
    stayed_on_trail: bool
    marks_used: int


def mu_plus(seq: BiDegreeSequence) -> OffspringLaw:
    """Size-biased offspring law: mu+(k) = sum_x (d-_x/m) 1{d+_x = k}."""
    weights = np.bincount(seq.out_deg, weights=seq.in_deg.astype(float))
    weights /= seq.m
    support = np.nonzero(weights)[0]
    probs = weights[support]
    mean = float((support * probs).sum())
    return OffspringLaw(support.astype(np.int64), probs, mean)


def simulate_chase(dx: int, dy: int, law: OffspringLaw, t_max_steps: int, rng) -> ChaseOutcome:
    """One chase run on the lazy marked tree rooted at a degree-dx vertex
    whose distinguished child has degree dy; other degrees are drawn from
    `law` when Y first reveals them.

    Ends at the first meeting, the first departure of X from Y's trail, or
    the step cap (censored: meet_step None with stayed_on_trail True).
    """
    if dx < 1 or dy < 1:
        raise ValueError("degrees must be >= 1")
    trail_deg = [dx, dy]  # trail_deg[i] = out-degree of the i-th trail vertex
    cum = np.cumsum(law.probs)
    support = law.support
    ix = 0   # X's index on the trail
    jy = 1   # Y's index on the trail
    marks = 0
    for step in range(1, t_max_steps + 1):
        if rng.random() < 0.5:
            # X moves: exactly one of its children is the next trail vertex
            if rng.random() * trail_deg[ix] < 1.0:
                ix += 1
                if ix == jy:
                    return ChaseOutcome(step, True, marks)
            else:
                return ChaseOutcome(None, False, marks)
        else:
            jy += 1
            k = np.searchsorted(cum, rng.random(), side="right")
            trail_deg.append(int(support[min(k, len(support) - 1)]))
            marks += 1
    return ChaseOutcome(None, True, marks)


def chase_meet_probability(s: int, dx: int, dy: int, rho: float) -> float:
    """Probability of an on-trail first meeting at step 2s+1:
    (1/2)(1/dx) for s = 0, and 2^{-2s-1} C_s rho^{s-1} / (dx dy) for s >= 1."""
    if s < 0 or dx < 1 or dy < 1:
        raise ValueError("need s >= 0 and degrees >= 1")
    if not (0.0 < rho < 1.0):
        raise ValueError(f"rho must lie in (0,1), got {rho}")
    if s == 0:
        return 0.5 / dx
    return 2.0 ** (-2 * s - 1) * catalan(s) * rho ** (s - 1) / (dx * dy)


def dyck_oracle(s: int) -> int:
    """Count, by exhaustive enumeration of all 2^{2s+1} mover sequences,
    those where the distance chain started at 1 stays positive through
    step 2s and first hits 0 at step 2s+1."""
    if not (0 <= s <= 12):
        raise ValueError("enumeration is limited to 0 <= s <= 12")
    L = 2 * s + 1
    total = 0
    codes_all = 1 << L
    chunk = 1 << 20
    shifts = np.arange(L, dtype=np.uint32)
    for lo in range(0, codes_all, chunk):
        codes = np.arange(lo, min(lo + chunk, codes_all), dtype=np.uint32)
        bits = (codes[:, None] >> shifts) & 1
        incr = 2 * bits.astype(np.int8) - 1  # bit 1 = Y moves (+1), 0 = X (-1)
        d = 1 + np.cumsum(incr, axis=1, dtype=np.int32)
        ok = (d[:, :-1] > 0).all(axis=1) & (d[:, -1] == 0)
        total += int(ok.sum())
    return total


class AnnealedEnvironment:
    """Partial stub matching of a degree sequence, co-generated with walks.

    Built once per (sequence, x, y); the single edge x -> y is matched
    permanently, and every edge created during a run is rolled back by
    `run`'s undo step so that successive runs are i.i.d. draws from the
    conditioned annealed law.
    """

    def __init__(self, seq: BiDegreeSequence, x: int, y: int):
        if x == y:
            raise ValueError("start vertices must differ")
        self.seq = seq
        self.x = x
        self.y = y
        n, m = seq.n, seq.m
        self.toff = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(seq.out_deg, out=self.toff[1:])
        self.toff = self.toff.tolist()
        hoff = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(seq.in_deg, out=hoff[1:])
        self.head_owner = np.repeat(np.arange(n, dtype=np.int64), seq.in_deg).tolist()
        self.tail_target = [-1] * m  # tail id -> matched head id
        self.out_deg = seq.out_deg.tolist()
        # pin the conditioning edge: first tail of x to first head of y
        y_head = int(hoff[y])
        self.tail_target[self.toff[x]] = y_head
        self.unmatched = list(range(m))
        last = self.unmatched.pop()
        if last != y_head:
            self.unmatched[y_head] = last

    def run(self, t_max_steps: int, rng) -> ChaseOutcome:
        """One chase run; mirrors `simulate_chase` outcome semantics
        (a trail departure ends the run)."""
        toff = self.toff
        tail_target = self.tail_target
        head_owner = self.head_owner
        unmatched = self.unmatched
        out_deg = self.out_deg
        created = []
        px, py = self.x, self.y
        trail = {self.x, self.y}
        outcome = None
        steps_new = 0
        for step in range(1, t_max_steps + 1):
            mover_is_x = rng.random() < 0.5
            v = px if mover_is_x else py
            tid = toff[v] + int(rng.random() * out_deg[v])
            hid = tail_target[tid]
            if hid < 0:
                r = int(rng.random() * len(unmatched))
                hid = unmatched[r]
                last = unmatched.pop()
                if r < len(unmatched):
                    unmatched[r] = last
                tail_target[tid] = hid
                created.append((tid, hid))
                steps_new += 1
            w = head_owner[hid]
            if mover_is_x:
                px = w
                if w not in trail:
                    outcome = ChaseOutcome(None, False, steps_new)
                    break
            else:
                py = w
                trail.add(w)
            if px == py:
                outcome = ChaseOutcome(step, True, steps_new)
                break
        if outcome is None:
            outcome = ChaseOutcome(None, True, steps_new)
        # roll back this run's matchings
        for tid, hid in reversed(created):
            tail_target[tid] = -1
            unmatched.append(hid)
        return outcome


def annealed_pair_walk(seq: BiDegreeSequence, x: int, y: int,
                       t_max_steps: int, rng) -> ChaseOutcome:
    """Single-shot convenience wrapper around AnnealedEnvironment."""
    return AnnealedEnvironment(seq, x, y).run(t_max_steps, rng)


def chase_table_to_csv(rows, path) -> None:
    """rows: iterable of (s, empirical, formula, stderr, n_runs)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "empirical", "formula", "stderr", "n_runs"])
        for row in rows:
            w.writerow(list(row))
