"""Directed configuration model sampling and structural diagnostics.

A graph is realized by matching every out-stub (tail) to a uniformly random
in-stub (head). Self-loops and parallel edges are kept with multiplicity;
the result is a directed multigraph whose out/in degree arrays equal the
input sequence exactly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .degree_model import BiDegreeSequence


@dataclass(frozen=True)
class Digraph:
    """Realized multigraph: flat CSR-style adjacency in both directions.

    out_flat[out_off[x]:out_off[x+1]] are the heads of x's out-edges in
    pairing order (multiplicities kept); in_flat is the exact transpose.
    edges holds (tail, head) pairs in pairing order.
    """

    n: int
    m: int
    out_off: np.ndarray
    out_flat: np.ndarray
    in_off: np.ndarray
    in_flat: np.ndarray
    edges: np.ndarray  # shape (m, 2)

    def out_neighbors(self, x: int) -> np.ndarray:
        return self.out_flat[self.out_off[x]:self.out_off[x + 1]]

    def in_neighbors(self, x: int) -> np.ndarray:
        return self.in_flat[self.in_off[x]:self.in_off[x + 1]]

    def out_degree(self, x: int) -> int:
        return int(self.out_off[x + 1] - self.out_off[x])

    def edges_to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["tail", "head"])
            for t, h in self.edges:
                w.writerow([int(t), int(h)])


@dataclass(frozen=True)
class StructureReport:
    strongly_connected: bool
    self_loops: int
    multi_edge_pairs: int
    tree_fraction_at_h: float
    h_used: int


def _build(n: int, tails: np.ndarray, heads: np.ndarray) -> Digraph:
    m = len(tails)
    out_counts = np.bincount(tails, minlength=n)
    in_counts = np.bincount(heads, minlength=n)
    out_off = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(out_counts, out=out_off[1:])
    in_off = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(in_counts, out=in_off[1:])
    # tails are already sorted (pairing order groups them per vertex)
    out_flat = heads.copy()
    order = np.argsort(heads, kind="stable")
    in_flat = tails[order].copy()
    edges = np.column_stack([tails, heads]).astype(np.int64)
    for a in (out_off, out_flat, in_off, in_flat, edges):
        a.setflags(write=False)
    return Digraph(n, m, out_off, out_flat, in_off, in_flat, edges)


def sample(seq: BiDegreeSequence, seed) -> Digraph:
    """Uniform stub pairing via one seeded shuffle of the head-stub array.

    Tails are laid out in vertex order; shuffling the heads and pairing
    positionally makes each of the m! matchings equally likely.
    """
    rng = np.random.default_rng(seed)
    tails = np.repeat(np.arange(seq.n, dtype=np.int64), seq.out_deg)
    heads = np.repeat(np.arange(seq.n, dtype=np.int64), seq.in_deg)
    rng.shuffle(heads)
    return _build(seq.n, tails, heads)


def from_edge_csv(path, seq: BiDegreeSequence) -> Digraph:
    """Rebuild a digraph from an exported edge list, checked against seq."""
    tails, heads = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            tails.append(int(row["tail"]))
            heads.append(int(row["head"]))
    tails = np.asarray(tails, dtype=np.int64)
    heads = np.asarray(heads, dtype=np.int64)
    if not np.array_equal(np.bincount(tails, minlength=seq.n), seq.out_deg):
        raise ValueError("edge list out-degrees do not match the degree sequence")
    if not np.array_equal(np.bincount(heads, minlength=seq.n), seq.in_deg):
        raise ValueError("edge list in-degrees do not match the degree sequence")
    order = np.argsort(tails, kind="stable")
    return _build(seq.n, tails[order], heads[order])


def is_strongly_connected(g: Digraph) -> bool:
    """Single-SCC test via iterative Tarjan (recursion-free for large n)."""
    n = g.n
    if n == 1:
        return True
    index = [-1] * n
    lowlink = [0] * n
    on_stack = [False] * n
    stack = []
    counter = 0
    sccs = 0
    out_off = g.out_off
    out_flat = g.out_flat
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, int(out_off[root]))]
        index[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, ptr = work[-1]
            if ptr < out_off[v + 1]:
                work[-1] = (v, ptr + 1)
                w = int(out_flat[ptr])
                if index[w] == -1:
                    index[w] = lowlink[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, int(out_off[w])))
                elif on_stack[w]:
                    if index[w] < lowlink[v]:
                        lowlink[v] = index[w]
            else:
                work.pop()
                if work:
                    pv = work[-1][0]
                    if lowlink[v] < lowlink[pv]:
                        lowlink[pv] = lowlink[v]
                if lowlink[v] == index[v]:
                    sccs += 1
                    if sccs > 1:
                        return False
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        if w == v:
                            break
    return sccs == 1


def out_ball_is_tree(g: Digraph, x: int, h: int) -> bool:
    """True iff the depth-h out-exploration from x revisits no vertex."""
    if h <= 0:
        return True
    visited = {x}
    frontier = [x]
    for _ in range(h):
        nxt = []
        for v in frontier:
            for w in g.out_flat[g.out_off[v]:g.out_off[v + 1]]:
                w = int(w)
                if w in visited:
                    return False
                visited.add(w)
                nxt.append(w)
        frontier = nxt
        if not frontier:
            break
    return True


def structure_report(g: Digraph, seq: BiDegreeSequence) -> StructureReport:
    """Connectivity, multiplicity counts and depth-h tree fraction, with
    h = max(1, floor(log(n) / (5 log d+_max)))."""
    d_out_max = int(seq.out_deg.max())
    if g.n > 1 and d_out_max > 1:
        h = max(1, int(math.log(g.n) / (5.0 * math.log(d_out_max))))
    else:
        h = 1
    self_loops = int((g.edges[:, 0] == g.edges[:, 1]).sum())
    # repeated (tail, head) vertex pairs, counted beyond the first occurrence
    keys = g.edges[:, 0].astype(np.int64) * g.n + g.edges[:, 1]
    _, counts = np.unique(keys, return_counts=True)
    multi = int((counts - 1).sum())
    tree = sum(out_ball_is_tree(g, x, h) for x in range(g.n))
    return StructureReport(
        strongly_connected=is_strongly_connected(g),
        self_loops=self_loops,
        multi_edge_pairs=multi,
        tree_fraction_at_h=tree / g.n,
        h_used=h,
    )
