"""Stable-filter run on disjoint-cycle graphs: class sizes before and after filtering.

    python scripts/cyclic_stability.py --d 15 --seeds 8 --n 10000
"""

import argparse

from ling_local import bench, graph as G, metrics, sem
from ling_local.config import DiscoveryConfig
from ling_local.errors import LingError
from ling_local.local_isa_ling import local_isa_ling, stable_filter


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--d", type=int, default=15)
    p.add_argument("--seeds", type=int, default=8)
    p.add_argument("--n", type=int, default=10000)
    a = p.parse_args()
    spec = bench.BenchSpec(d=a.d, graph_kind="disjoint_cycle_dcg", n_values=(a.n,))
    for s in range(a.seeds):
        ss, g, T = bench.instance(spec, s)
        st = sem.streams(s)
        data = sem.simulate(g, a.n, ss, st["noise"])
        cfg = DiscoveryConfig(seed=int(st["ica"].integers(2 ** 31)))
        MB = G.markov_blanket(g, T)
        try:
            full = local_isa_ling(T, MB, data, cfg)
            kept = stable_filter(full)
            shd = metrics.shd_local_class(metrics.truth_class(g, T, stable_only=True) if g.d <= 9
                                          else [metrics.local_truth(g, T)], kept)
            print(f"seed {s}: T={T} |MB|={len(MB)} models {len(full)} -> stable {len(kept)}, SHD {shd:.2f}")
        except LingError as exc:
            print(f"seed {s}: T={T} |MB|={len(MB)} failed: {type(exc).__name__}: {exc}")


if __name__ == "__main__":
    main()
