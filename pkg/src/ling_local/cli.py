"""Command-line front end: simulate, discover, bench, eval.

Exit codes: 0 ok, 2 usage or parse error, 3 simulation failure,
4 algorithmic assertion, 5 identifiability failure.
"""

import argparse
import json
import sys
import typing
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import bench, graph as G, mbest, metrics, sem
from .config import DiscoveryConfig
from .dataset import Dataset
from .errors import AssertionViolated, IdentifiabilityError, LingError, RejectionLimit
from .local_isa_ling import LocalModel, LocalModelClass

EXIT_OK, EXIT_USAGE, EXIT_SIM, EXIT_ASSERT, EXIT_IDENT = 0, 2, 3, 4, 5


class UsageError(Exception):
    pass


# -- flat key=value config files ---------------------------------------------------

def read_kv(path) -> dict:
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    for no, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k] = v
    return out


def _convert(value: str, tp):
    origin = typing.get_origin(tp)
    if origin in (typing.Union, getattr(__import__("types"), "UnionType", None)):
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if value.lower() in ("none", "null", ""):
            return None
        return _convert(value, args[0])
    if tp is bool or tp == "bool":
        if value.lower() in ("1", "true", "yes", "on"):
            return True
        if value.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {value!r}")
    if tp is int or tp == "int":
        return int(value)
    if tp is float or tp == "float":
        return float(value)
    if tp is tuple or tp == "tuple":
        return tuple(int(x) for x in value.replace(" ", "").split(",") if x)
    return value


def build(cls, kv: dict, ignore=()):
    types = {f.name: f.type for f in fields(cls)}
    kw = {}
    for k, v in kv.items():
        if k in ignore:
            continue
        if k not in types:
            raise UsageError(f"unknown key {k!r} for {cls.__name__}")
        tp = types[k]
        if isinstance(tp, str):
            tp = {"int": int, "float": float, "bool": bool, "str": str, "tuple": tuple,
                  "float | None": typing.Optional[float]}.get(tp, str)
        try:
            kw[k] = _convert(v, tp) if isinstance(v, str) else v
        except ValueError as exc:
            raise UsageError(f"bad value for {k}: {exc}") from None
    try:
        return cls(**kw)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _dump(obj, indent):
    return json.dumps(obj, indent=indent, sort_keys=True)


def _emit(obj, args, path=None):
    text = _dump(obj, args.json_indent)
    if path:
        Path(path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


# -- commands ----------------------------------------------------------------------

def cmd_simulate(args) -> int:
    kv = read_kv(args.spec)
    if args.seed is not None:
        kv["seed"] = str(args.seed)
    n = int(kv.pop("n", "1000"))
    spec = build(sem.SemSpec, kv)
    st = sem.streams(spec.seed)
    g = sem.random_graph(spec, st["graph"])
    data = sem.simulate(g, n, spec, st["noise"])
    prefix = Path(args.out)
    gj = g.to_json()
    gj["names"] = list(data.names)
    gj["seed"] = spec.seed
    Path(f"{prefix}.graph.json").write_text(_dump(gj, args.json_indent) + "\n", encoding="utf-8")
    data.save(f"{prefix}.csv")
    print(_dump({"seed": spec.seed, "d": spec.d, "n": n, "edges": len(g.edges()),
                 "stable": G.is_stable(g), "graph": f"{prefix}.graph.json", "data": f"{prefix}.csv"},
                args.json_indent))
    return EXIT_OK


def _resolve(name, names):
    if name in names:
        return names.index(name)
    try:
        i = int(name)
    except (TypeError, ValueError):
        raise UsageError(f"unknown variable {name!r}") from None
    if not 0 <= i < len(names):
        raise UsageError(f"variable index {i} out of range")
    return i


def load_graph(path, names=None):
    """Graph JSON; endpoints may be indices or names (resolved against ``names``)."""
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read graph {path}: {exc}") from None
    names = list(obj.get("names") or names or [])
    try:
        d = int(obj["d"]) if "d" in obj else len(names)
        names = names or [f"X{i}" for i in range(d)]
        B = np.zeros((d, d))
        weighted = True
        for e in obj["edges"]:
            s, t = _resolve(e["src"], names), _resolve(e["dst"], names)
            if "w" not in e:
                weighted = False
            B[t, s] = float(e.get("w", 1.0))
        return G.WeightedDigraph(B), names, weighted
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed graph {path}: {exc}") from None


def _mb_from(arg, T, data, cfg):
    if arg == "lasso":
        return mbest.nodewise_lasso_mb(data, T, lam=cfg.lasso_lambda, kappa=cfg.lasso_kappa,
                                       cv=cfg.lasso_cv, seed=cfg.seed,
                                       prune_alpha=cfg.lasso_prune_alpha)
    if arg.startswith("oracle:"):
        path = arg.split(":", 1)[1]
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        if "mb" in obj:
            return {_resolve(v, list(data.names)) for v in obj["mb"]}
        g, _, _ = load_graph(path, list(data.names))
        if g.d != data.d:
            raise UsageError("oracle graph and data disagree on the number of variables")
        return G.markov_blanket(g, T)
    raise UsageError(f"--mb must be 'lasso' or 'oracle:FILE', got {arg!r}")


def _discover_config(args) -> DiscoveryConfig:
    kv = read_kv(args.config) if args.config else {}
    for key, val in (("alpha", args.alpha), ("zero_tol", args.zero_tol), ("lasso_lambda", args.lam),
                     ("seed", args.seed), ("postprocess", args.postprocess)):
        if val is not None:
            kv[key] = str(val)
    if args.stable:
        kv["stable"] = "true"
    return build(DiscoveryConfig, kv)


def cmd_discover(args) -> int:
    cfg = _discover_config(args)
    try:
        data = Dataset.load(args.data)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read data {args.data}: {exc}") from None
    if args.target not in data.names:
        raise UsageError(f"target {args.target!r} is not a column of {args.data}")
    T = data.index(args.target)
    MB = _mb_from(args.mb, T, data, cfg)
    if not MB:
        raise UsageError(f"empty Markov blanket for {args.target}; nothing to discover")
    est = bench.discover(args.method, T, MB, data, cfg, cfg.stable)
    out = est.to_json(list(data.names))
    out.update({"seed": cfg.seed, "method": args.method, "mb": sorted(int(v) for v in MB),
                "config": cfg.to_dict()})
    _emit(out, args, args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    kv = read_kv(args.spec)
    cfg_keys = {f.name for f in fields(DiscoveryConfig)}
    cfg = build(DiscoveryConfig, {k: v for k, v in kv.items() if k in cfg_keys})
    spec = build(bench.BenchSpec, {k: v for k, v in kv.items() if k not in cfg_keys})
    spec = bench.BenchSpec(**{**{f.name: getattr(spec, f.name) for f in fields(spec)}, "config": cfg})
    report = bench.run_bench(spec, args.workers)
    prefix = Path(args.out)
    Path(f"{prefix}.json").write_text(_dump(report, args.json_indent) + "\n", encoding="utf-8")
    Path(f"{prefix}.csv").write_text(bench.cells_csv(report), encoding="utf-8")
    print(_dump({"cells": report["cells"], "report": f"{prefix}.json", "csv": f"{prefix}.csv"},
                args.json_indent))
    return EXIT_OK


def _load_class(path, names):
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        models = []
        for m in obj["models"]:
            models.append(LocalModel(tuple((_resolve(e.get("src_name", e["src"]), names),
                                            _resolve(e.get("dst_name", e["dst"]), names),
                                            float(e["w"])) for e in m["edges"])))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed model {path}: {exc}") from None
    return models


def cmd_eval(args) -> int:
    g, names, weighted = load_graph(args.truth)
    T = _resolve(args.target, names)
    est = _load_class(args.model, names)
    truth = metrics.local_truth(g, T)
    out = {
        "target": names[T],
        "truth_edges": len(truth),
        "n_models": len(est),
        "shd": metrics.shd_local_class([truth], est),
        "shd_per_model": [metrics.shd_local(truth, m) for m in est],
        "weight_distance": metrics.class_weight_distance([truth], est) if weighted else None,
    }
    _emit(out, args)
    return EXIT_OK


def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ling-local", description="Local causal discovery for linear non-Gaussian models.")
    p.add_argument("--json-indent", type=int, default=None)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="sample a graph and data from a spec file")
    s.add_argument("spec")
    s.add_argument("--out", required=True, help="output prefix")
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("discover", help="estimate the local models around a target")
    s.add_argument("data")
    s.add_argument("--target", required=True)
    s.add_argument("--method", choices=("isa", "regression"), default="isa")
    s.add_argument("--mb", default="lasso", help="'lasso' or 'oracle:FILE'")
    s.add_argument("--config")
    s.add_argument("--stable", action="store_true")
    s.add_argument("--alpha", type=float)
    s.add_argument("--zero-tol", type=float)
    s.add_argument("--lambda", dest="lam", type=float)
    s.add_argument("--seed", type=int)
    s.add_argument("--postprocess", choices=("permutations", "sink_peeling"))
    s.add_argument("--out")
    s.set_defaults(func=cmd_discover)

    s = sub.add_parser("bench", help="run a synthetic benchmark grid")
    s.add_argument("spec")
    s.add_argument("--out", required=True, help="output prefix")
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("eval", help="score a model against a ground-truth graph")
    s.add_argument("truth")
    s.add_argument("model")
    s.add_argument("--target", required=True)
    s.set_defaults(func=cmd_eval)
    return p


def _fail(code, exc):
    print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    p = parser()
    try:
        args = p.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        return _fail(EXIT_USAGE, exc)
    except RejectionLimit as exc:
        return _fail(EXIT_SIM, exc)
    except AssertionViolated as exc:
        return _fail(EXIT_ASSERT, exc)
    except IdentifiabilityError as exc:
        return _fail(EXIT_IDENT, exc)
    except LingError as exc:
        return _fail(EXIT_SIM if args.command == "simulate" else EXIT_ASSERT, exc)


if __name__ == "__main__":
    sys.exit(main())
