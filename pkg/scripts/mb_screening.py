"""Markov-blanket F1 of the plain nodewise lasso and of lasso screening with t-test pruning.

    python scripts/mb_screening.py --seeds 20 --d 20
"""

import argparse

import numpy as np

from ling_local import graph as G, mbest, metrics, sem


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--d", type=int, default=20)
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--first-seed", type=int, default=0)
    p.add_argument("--n", type=int, nargs="+", default=[500, 5000])
    p.add_argument("--kappa", type=float, nargs="+", default=[0.05, 0.1, 0.5])
    p.add_argument("--prune", type=float, nargs="+", default=[0.05, 0.01, 0.001])
    a = p.parse_args()
    seeds = range(a.first_seed, a.first_seed + a.seeds)
    rows = [("lasso", k, None) for k in a.kappa] + [("screen", k, al) for k in a.kappa for al in a.prune]
    for name, kappa, alpha in rows:
        means = []
        for n in a.n:
            f1 = []
            for s in seeds:
                st = sem.streams(s)
                spec = sem.SemSpec(d=a.d, seed=s)
                g = sem.random_dag(spec, st["graph"])
                T = int(st["target"].integers(a.d))
                ds = sem.simulate(g, n, spec, st["noise"])
                est = mbest.nodewise_lasso_mb(ds, T, kappa=kappa, prune_alpha=alpha)
                f1.append(metrics.f1_score(G.markov_blanket(g, T), est))
            means.append(np.mean(f1))
        cells = "  ".join(f"n={n}: {m:.3f}" for n, m in zip(a.n, means))
        print(f"{name:6s} kappa={kappa:<5} prune={alpha}  {cells}")


if __name__ == "__main__":
    main()
