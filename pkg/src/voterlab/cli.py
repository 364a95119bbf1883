"""Configuration-driven experiment harness.

Usage: voterlab <kind> --config FILE [--set key=value]... --out DIR

Config files are flat key = value text; every key can be overridden on the
command line with --set. All outputs (CSV, JSON metadata, SVG plots) are
deterministic functions of the config and master_seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import dcm, theory, voter, walks
from .annealed import AnnealedEnvironment, chase_meet_probability, chase_table_to_csv, mu_plus, simulate_chase
from .degree_model import BiDegreeSequence, gen_out_regular, gen_regular, gen_uniform_range, stats
from .estimators import summarize

KINDS = ("figure1", "plateau", "longtime", "meeting", "chase", "predict", "consensus")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    kind: str = "predict"
    seq: str = "regular"          # regular | out_regular | uniform_range | file
    n: int = 1000
    d: int = 3
    lo: int = 2
    hi: int = 5
    in_law: str = ""              # "k:p,k:p" for out_regular
    seq_file: str = ""
    u: float = 0.5
    times: str = ""               # explicit comma list; empty -> per-kind default
    ell: str = "0.25,0.5,1"       # long-scale multipliers of n
    t_lo: float = 30.0            # plateau averaging window
    t_hi: float = 50.0
    replicas: int = 20
    graphs: int = 1
    samples: int = 1000           # meeting/consensus sample count
    runs: int = 100000            # chase run count
    s_max: int = 3                # chase table rows
    cap_theta: float = 20.0       # censoring cap in units of theta*n
    workers: int = 1
    master_seed: int = 1
    extra: dict = field(default_factory=dict)


_INT_KEYS = {"n", "d", "lo", "hi", "replicas", "graphs", "samples", "runs",
             "s_max", "workers", "master_seed"}
_FLOAT_KEYS = {"u", "t_lo", "t_hi", "cap_theta"}


def parse_config(path=None, overrides=()) -> ExperimentConfig:
    cfg = ExperimentConfig()
    pairs = []
    if path:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw.strip()!r}")
                k, v = line.split("=", 1)
                pairs.append((k.strip(), v.strip(), f"{path}:{lineno}"))
    for ov in overrides:
        if "=" not in ov:
            raise ConfigError(f"--set needs key=value, got {ov!r}")
        k, v = ov.split("=", 1)
        pairs.append((k.strip(), v.strip(), "--set"))
    for k, v, where in pairs:
        if not hasattr(cfg, k) or k == "extra":
            cfg.extra[k] = v
            continue
        try:
            if k in _INT_KEYS:
                setattr(cfg, k, int(v))
            elif k in _FLOAT_KEYS:
                setattr(cfg, k, float(v))
            else:
                setattr(cfg, k, v)
        except ValueError as exc:
            raise ConfigError(f"{where}: bad value for {k}: {v!r} ({exc})")
    if cfg.kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {cfg.kind!r}; choose from {KINDS}")
    if not (0.0 < cfg.u < 1.0):
        raise ConfigError("u must lie in (0,1)")
    if cfg.replicas < 1 or cfg.graphs < 1:
        raise ConfigError("replicas and graphs must be >= 1")
    return cfg


def build_sequence(cfg: ExperimentConfig) -> BiDegreeSequence:
    if cfg.seq == "regular":
        return gen_regular(cfg.n, cfg.d)
    if cfg.seq == "uniform_range":
        return gen_uniform_range(cfg.n, cfg.lo, cfg.hi, cfg.master_seed)
    if cfg.seq == "out_regular":
        if not cfg.in_law:
            raise ConfigError("out_regular needs in_law, e.g. in_law = 2:0.5,4:0.5")
        law = {}
        for item in cfg.in_law.split(","):
            k, p = item.split(":")
            law[int(k)] = float(p)
        return gen_out_regular(cfg.n, cfg.d, law, cfg.master_seed)
    if cfg.seq == "file":
        if not cfg.seq_file:
            raise ConfigError("seq = file needs seq_file")
        return BiDegreeSequence.from_csv(cfg.seq_file)
    raise ConfigError(f"unknown sequence spec {cfg.seq!r}")


def _seed(master: int, *idx) -> np.random.SeedSequence:
    return np.random.SeedSequence((master,) + tuple(idx))


def _parse_times(cfg: ExperimentConfig):
    if cfg.times:
        ts = sorted(float(t) for t in cfg.times.split(","))
        if ts[0] < 0:
            raise ConfigError("times must be >= 0")
        return np.asarray(ts)
    return None


def default_grid(kind: str, cfg: ExperimentConfig):
    """Geometric spacing on the short/intermediate scales, linear in ell*n
    on the long scale."""
    if kind == "plateau":
        return np.linspace(cfg.t_lo, cfg.t_hi, 11)
    if kind == "longtime":
        return np.asarray(sorted(float(l) * cfg.n for l in cfg.ell.split(",")))
    # short through intermediate: 0 plus geometric up to t_hi
    return np.concatenate([[0.0], np.geomspace(0.25, max(cfg.t_hi, 1.0), 40)])


def _replica_task(args):
    """Run all replicas of one sampled graph; returns the density matrix."""
    (gi, cfg_dict, times) = args
    cfg = ExperimentConfig(**cfg_dict)
    seq = build_sequence(cfg)
    g = dcm.sample(seq, _seed(cfg.master_seed, gi))
    t_max = float(times[-1]) if len(times) else 0.0
    rows = []
    for r in range(cfg.replicas):
        rng_seed = _seed(cfg.master_seed, gi, r)
        state = voter.init_bernoulli(g, cfg.u, rng_seed)
        traj = voter.run(g, state, t_max, times, _seed(cfg.master_seed, gi, r, 1))
        rows.append(traj.densities)
    return gi, np.vstack(rows)


def ensemble_densities(cfg: ExperimentConfig, times):
    """(graphs*replicas, len(times)) density matrix plus per-graph means."""
    cfg_dict = {k: getattr(cfg, k) for k in cfg.__dataclass_fields__ if k != "extra"}
    cfg_dict["extra"] = {}
    tasks = [(gi, cfg_dict, times) for gi in range(cfg.graphs)]
    results = {}
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            for gi, mat in ex.map(_replica_task, tasks):
                results[gi] = mat
    else:
        for task in tasks:
            gi, mat = _replica_task(task)
            results[gi] = mat
    mats = [results[gi] for gi in range(cfg.graphs)]
    all_rows = np.vstack(mats)
    per_graph = np.array([m.mean(axis=0) for m in mats])
    return all_rows, per_graph


def emit_plot(series: dict, path, xlabel="t", ylabel="density", title=""):
    """Write a self-contained SVG overlay of named (x, y) series."""
    if not series:
        raise ValueError("no series to plot")
    lengths = {name: len(xy[0]) for name, xy in series.items()}
    for name, (x, y) in series.items():
        if len(x) != len(y):
            raise ValueError(f"series {name!r} has mismatched lengths")
    import matplotlib
    matplotlib.use("svg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8, 4.5))
    styles = ["-", "--", ":", "-."]
    for i, (name, (x, y)) in enumerate(series.items()):
        ax.plot(x, y, styles[i % len(styles)], label=name)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend()
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)


def _write_summary_csv(path, times, mat, predicted):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "mean", "std_error", "ci95_lo", "ci95_hi", "predicted", "n_runs"])
        for j, t in enumerate(times):
            st = summarize(mat[:, j])
            w.writerow([t, st.mean, st.std_error, st.ci95_lo, st.ci95_hi, predicted[j], st.n_samples])


def run_experiment(cfg: ExperimentConfig, out_dir) -> dict:
    """Run one experiment kind; writes files under out_dir and returns a
    summary dict (also dumped as metadata.json)."""
    import os
    os.makedirs(out_dir, exist_ok=True)
    t0 = time.time()
    seq = build_sequence(cfg)
    params = stats(seq)
    report = {"kind": cfg.kind, "n": seq.n, "m": seq.m, "u": cfg.u,
              "master_seed": cfg.master_seed,
              "theta": params.theta, "rho": params.rho, "delta": params.delta}
    times = _parse_times(cfg)

    if cfg.kind == "predict":
        ts = times if times is not None else default_grid("predict", cfg)
        with open(f"{out_dir}/predict.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "predicted_density"])
            for t in ts:
                w.writerow([t, theory.predicted_density(float(t), cfg.n, cfg.u, params)])
        report["rows"] = len(ts)

    elif cfg.kind in ("plateau", "longtime"):
        ts = times if times is not None else default_grid(cfg.kind, cfg)
        mat, per_graph = ensemble_densities(cfg, ts)
        predicted = [theory.predicted_density(float(t), cfg.n, cfg.u, params) for t in ts]
        _write_summary_csv(f"{out_dir}/{cfg.kind}.csv", ts, mat, predicted)
        report["per_graph_means"] = per_graph.mean(axis=1).tolist()
        report["grand_mean"] = float(mat.mean())
        report["plateau_prediction"] = (2 * cfg.u * (1 - cfg.u)
                                        * theory.phi_infinity(params.delta, params.rho))

    elif cfg.kind == "figure1":
        g = dcm.sample(seq, _seed(cfg.master_seed, 0))
        ts = times if times is not None else np.concatenate(
            [np.linspace(0, 20, 81), np.linspace(21, 3.0 * params.theta * cfg.n, 400)])
        state = voter.init_bernoulli(g, cfg.u, _seed(cfg.master_seed, 0, 0))
        traj = voter.run(g, state, float(ts[-1]), ts, _seed(cfg.master_seed, 0, 0, 1))
        traj.to_csv(f"{out_dir}/trajectory.csv")
        plateau = 2 * cfg.u * (1 - cfg.u) * theory.phi_infinity(params.delta, params.rho)
        pred = [theory.predicted_density(float(t), cfg.n, cfg.u, params) for t in ts]
        emit_plot(
            {
                "empirical density": (ts, traj.densities),
                "plateau 2u(1-u)phi(inf)": (ts, np.full(len(ts), plateau)),
                "prediction": (ts, np.asarray(pred)),
            },
            f"{out_dir}/figure1.svg",
            title=f"discordant edge density, n={cfg.n}",
        )
        report["consensus_time"] = traj.consensus_time
        report["plateau_prediction"] = plateau

    elif cfg.kind == "meeting":
        g = dcm.sample(seq, _seed(cfg.master_seed, 0))
        pi = walks.stationary_distribution(g).pi
        scale = 0.5 * params.theta * cfg.n
        cap = cfg.cap_theta * params.theta * cfg.n
        samples = walks.meeting_from_stationarity(
            g, cfg.samples, cap, _seed(cfg.master_seed, 1), pi=pi)
        walks.meetings_to_csv(samples, f"{out_dir}/meetings.csv")
        uncensored = [s for s in samples if not s.censored]
        report["censored_fraction"] = 1.0 - len(uncensored) / len(samples)
        report["colocated_atom"] = float((pi ** 2).sum())
        if len(uncensored) == len(samples):
            report["w1_to_exp1"] = walks.wasserstein_to_exp1(samples, scale)
            report["mean_over_scale"] = float(
                np.mean([s.meet_time for s in samples]) / scale)

    elif cfg.kind == "chase":
        law = mu_plus(seq)
        rng = np.random.default_rng(_seed(cfg.master_seed, 2))
        dx = int(seq.out_deg[0])
        dy = int(seq.out_deg[0])
        t_cap = 2 * cfg.s_max + 1
        counts = np.zeros(cfg.s_max + 1, dtype=np.int64)
        for _ in range(cfg.runs):
            out = simulate_chase(dx, dy, law, t_cap, rng)
            if out.meet_step is not None and out.stayed_on_trail:
                s, odd = divmod(out.meet_step - 1, 2)
                if odd == 0 and s <= cfg.s_max:
                    counts[s] += 1
        rows = []
        for s in range(cfg.s_max + 1):
            p_hat = float(counts[s]) / cfg.runs
            se = math.sqrt(max(p_hat * (1 - p_hat), 1e-300) / cfg.runs)
            rows.append((s, p_hat, chase_meet_probability(s, dx, dy, params.rho),
                         se, cfg.runs))
        chase_table_to_csv(rows, f"{out_dir}/chase.csv")
        report["chase_rows"] = rows

    elif cfg.kind == "consensus":
        g = dcm.sample(seq, _seed(cfg.master_seed, 0))
        cap = cfg.cap_theta * params.theta * cfg.n
        taus = []
        censored = 0
        for r in range(cfg.samples):
            state = voter.init_bernoulli(g, cfg.u, _seed(cfg.master_seed, 0, r))
            tau = voter.consensus_time(g, state, _seed(cfg.master_seed, 0, r, 1), cap)
            if tau is None:
                censored += 1
            else:
                taus.append(tau)
        with open(f"{out_dir}/consensus.csv", "w", newline="") as fh:
            fh.write("tau_cons\n")
            for tau in taus:
                fh.write(f"{tau!r}\n")
        report["censored"] = censored
        if taus:
            report["mean_over_theta_n"] = float(np.mean(taus) / (params.theta * cfg.n))

    report["wall_time_s"] = time.time() - t0
    report["version"] = __version__
    with open(f"{out_dir}/metadata.json", "w") as fh:
        json.dump(report, fh, indent=2, default=str)
    return report


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="voterlab", description=__doc__)
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--config", default=None)
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE")
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.config, args.overrides + [f"kind={args.kind}"])
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        report = run_experiment(cfg, args.out)
    except Exception as exc:  # runtime failure -> exit 3 per interface contract
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 3
    print(json.dumps(report, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
