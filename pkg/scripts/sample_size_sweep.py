"""Mean local SHD and weight error against sample size for both discovery methods.

    python scripts/sample_size_sweep.py --d 15 --seeds 8 --n 1000 3000 10000 --out sweep
"""

import argparse
import json

from ling_local import bench
from ling_local.config import DiscoveryConfig

REGRESSION = dict(zero_rule="backward", spouse_rule="deferred", tie_break="most_independent", hsic_n_max=4000,
                  remember_sinks=True)


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--d", type=int, default=15)
    p.add_argument("--seeds", type=int, default=8)
    p.add_argument("--n", type=int, nargs="+", default=[1000, 3000, 10000])
    p.add_argument("--mb", choices=("oracle", "lasso"), default="oracle")
    p.add_argument("--workers", type=int)
    p.add_argument("--out", default="sweep")
    a = p.parse_args()
    configs = {
        "isa": DiscoveryConfig(postprocess="sink_peeling", lasso_kappa=0.05, lasso_prune_alpha=0.001),
        "regression": DiscoveryConfig(lasso_kappa=0.05, lasso_prune_alpha=0.001, **REGRESSION),
    }
    out = {}
    for method, cfg in configs.items():
        spec = bench.BenchSpec(d=a.d, n_values=tuple(a.n), seeds=tuple(range(a.seeds)), method=method,
                               mb=a.mb, config=cfg)
        rep = bench.run_bench(spec, a.workers)
        out[method] = rep["cells"]
        with open(f"{a.out}_{method}.csv", "w", encoding="utf-8") as fh:
            fh.write(bench.cells_csv(rep))
        for c in rep["cells"]:
            print(f"{method:10s} n={c['n']:6d} shd={c['shd']['mean']:.3f}±{c['shd']['stderr']:.3f} "
                  f"wd={c['weight_distance']['mean']:.3f} failures={c['failures']}")
    with open(f"{a.out}.json", "w", encoding="utf-8") as fh:
        json.dump(out, fh, indent=2)


if __name__ == "__main__":
    main()
