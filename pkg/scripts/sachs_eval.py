"""Local discovery on the Sachs protein data for PIP2, PIP3 and Akt.

Expects a folder with ``sachs.csv`` (header row of protein names) and
``sachs_truth.json`` ({"names": [...], "edges": [{"src": name, "dst": name}, ...]}).

    python scripts/sachs_eval.py /path/to/sachs --method isa
"""

import argparse
import io
import json
import sys
import tempfile
from contextlib import redirect_stdout
from pathlib import Path

from ling_local import cli

TARGETS = ("PIP2", "PIP3", "Akt")


def main():
    p = argparse.ArgumentParser()
    p.add_argument("folder")
    p.add_argument("--method", choices=("isa", "regression"), default="isa")
    p.add_argument("--postprocess", choices=("permutations", "sink_peeling"), default="sink_peeling")
    a = p.parse_args()
    root = Path(a.folder)
    with tempfile.TemporaryDirectory() as tmp:
        for t in TARGETS:
            model = Path(tmp) / f"{t}.json"
            argv = ["discover", str(root / "sachs.csv"), "--target", t, "--method", a.method, "--out", str(model)]
            if a.method == "isa":
                argv += ["--postprocess", a.postprocess]
            code = cli.main(argv)
            if code:
                print(f"{t}: discover exited with {code}", file=sys.stderr)
                continue
            buf = io.StringIO()
            with redirect_stdout(buf):
                cli.main(["eval", str(root / "sachs_truth.json"), str(model), "--target", t])
            res = json.loads(buf.getvalue())
            print(f"{t}: SHD {res['shd']}  models {res['n_models']}  truth edges {res['truth_edges']}")


if __name__ == "__main__":
    main()
