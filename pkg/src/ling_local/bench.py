"""Synthetic benchmark: seeds x sample sizes, local SHD and weight error per run."""

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import graph as G
from . import mbest, metrics, sem
from .config import DiscoveryConfig
from .errors import LingError
from .inv_direct_lingam import inverse_direct_lingam
from .local_isa_ling import LocalModelClass, local_isa_ling, oracle_local_isa_ling


@dataclass(frozen=True)
class BenchSpec:
    d: int = 15
    graph_kind: str = "erdos_renyi_dag"
    expected_degree: float = 3.0
    degree_mode: str = "total"
    n_cycles: int = 2
    max_degree: int = 4
    n_values: tuple = (1000, 10000)
    seeds: tuple = tuple(range(8))
    method: str = "isa"
    mb: str = "oracle"
    stable: bool = False
    config: DiscoveryConfig = field(default_factory=DiscoveryConfig)

    def sem_spec(self, seed: int) -> sem.SemSpec:
        return sem.SemSpec(d=self.d, graph_kind=self.graph_kind, expected_degree=self.expected_degree,
                           degree_mode=self.degree_mode, n_cycles=self.n_cycles,
                           max_degree=self.max_degree, seed=seed)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["n_values"], out["seeds"] = list(self.n_values), list(self.seeds)
        return out


def choose_target(g: G.WeightedDigraph, rng, cyclic: bool) -> int:
    """Uniform over vertices with a nonempty blanket (restricted to cycle vertices if cyclic)."""
    pool = [v for v in range(g.d) if G.markov_blanket(g, v)]
    if cyclic:
        on_cycle = {v for c in G.simple_cycles(g) for v in c}
        pool = [v for v in pool if v in on_cycle]
    if not pool:
        raise ValueError("graph has no eligible target")
    return int(pool[int(rng.integers(len(pool)))])


def instance(spec: BenchSpec, seed: int):
    """Graph, target and per-run streams for one seed; shared by every sample size."""
    ss = spec.sem_spec(seed)
    st = sem.streams(seed)
    g = sem.random_graph(ss, st["graph"])
    T = choose_target(g, st["target"], spec.graph_kind == "disjoint_cycle_dcg")
    return ss, g, T


def discover(method: str, T: int, MB, data, cfg: DiscoveryConfig, stable: bool = False) -> LocalModelClass:
    if method == "isa":
        return local_isa_ling(T, MB, data, cfg.replace(stable=stable))
    if method == "regression":
        out = LocalModelClass(T, ())
        out.add(inverse_direct_lingam(T, MB, data, cfg))
        return out
    raise ValueError(f"unknown method {method!r}")


def run_cell(spec: BenchSpec, n: int, seed: int) -> dict:
    ss, g, T = instance(spec, seed)
    st = sem.streams(seed)
    data = sem.simulate(g, n, ss, st["noise"])
    cfg = spec.config.replace(seed=int(st["ica"].integers(2 ** 31)))
    if spec.stable or spec.graph_kind == "erdos_renyi_dag":
        truth = LocalModelClass(T, ())
        truth.add(metrics.local_truth(g, T))
    else:
        truth = oracle_local_isa_ling(g, T)
    rec = {"seed": seed, "n": n, "target": T, "error": None, "n_models": 0}
    t0 = time.perf_counter()
    try:
        MB = G.markov_blanket(g, T) if spec.mb == "oracle" else mbest.nodewise_lasso_mb(
            data, T, lam=cfg.lasso_lambda, kappa=cfg.lasso_kappa, cv=cfg.lasso_cv, seed=cfg.seed,
            prune_alpha=cfg.lasso_prune_alpha)
        est = discover(spec.method, T, MB, data, cfg, spec.stable)
    except (LingError, ValueError) as exc:
        # a failed run is scored as an empty output
        rec["error"] = f"{type(exc).__name__}: {exc}"
        est = LocalModelClass(T, ())
    rec["runtime"] = time.perf_counter() - t0
    rec["n_models"] = len(est)
    rec["shd"] = metrics.shd_local_class(truth, est)
    rec["weight_distance"] = metrics.class_weight_distance(truth, est)
    rec["models"] = [[list(e) for e in m.edges] for m in est.models]
    rec["truth"] = [[list(e) for e in m.edges] for m in truth.models]
    return rec


def _job(args):
    return run_cell(*args)


def workers() -> int:
    cap = int(os.environ.get("LING_LOCAL_THREADS", "0") or 0)
    n = os.cpu_count() or 1
    return max(1, min(cap, n) if cap > 0 else n)


def _summary(vals):
    v = np.asarray(vals, dtype=float)
    se = float(v.std(ddof=1) / np.sqrt(len(v))) if len(v) > 1 else 0.0
    return {"mean": float(v.mean()), "stderr": se}


def run_bench(spec: BenchSpec, n_workers: int | None = None) -> dict:
    jobs = [(spec, n, s) for n in spec.n_values for s in spec.seeds]
    n_workers = workers() if n_workers is None else n_workers
    if n_workers > 1:
        with ProcessPoolExecutor(n_workers) as ex:
            recs = list(ex.map(_job, jobs))
    else:
        recs = [_job(j) for j in jobs]
    recs.sort(key=lambda r: (r["n"], r["seed"]))
    cells = []
    for n in spec.n_values:
        rs = [r for r in recs if r["n"] == n]
        cells.append({
            "n": n,
            "shd": _summary([r["shd"] for r in rs]),
            "weight_distance": _summary([r["weight_distance"] for r in rs]),
            "failures": sum(r["error"] is not None for r in rs),
            "runs": len(rs),
        })
    return {"spec": spec.to_dict(), "cells": cells, "records": recs}


def cells_csv(report: dict) -> str:
    lines = ["n,shd_mean,shd_stderr,wd_mean,wd_stderr,failures,runs"]
    for c in report["cells"]:
        lines.append(f"{c['n']},{c['shd']['mean']!r},{c['shd']['stderr']!r},"
                     f"{c['weight_distance']['mean']!r},{c['weight_distance']['stderr']!r},"
                     f"{c['failures']},{c['runs']}")
    return "\n".join(lines) + "\n"
