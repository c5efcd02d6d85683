"""End-to-end chains for free-product windows, with timings and stage summaries.

    python3 scripts/pipeline_runs.py [--outdir reports]
"""
import argparse
import json
import os
import time

from fdcbench import io
from fdcbench.groups import Cyclic, FreeAbelian, FreeProduct
from fdcbench.pipeline import extend_group_chain

RUNS = [
    (FreeProduct((FreeAbelian(1), FreeAbelian(1))), 4, 2),
    (FreeProduct((FreeAbelian(1), FreeAbelian(1))), 6, 2),
    (FreeProduct((Cyclic(2), Cyclic(3))), 8, 2),
    (FreeProduct((Cyclic(2), Cyclic(3))), 12, 3),
    (FreeProduct((Cyclic(3), FreeAbelian(1))), 5, 2),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--outdir")
    ap.add_argument("--scales", default="1,2,3,5,8")
    a = ap.parse_args()
    scales = [int(x) for x in a.scales.split(",")]
    if a.outdir:
        os.makedirs(a.outdir, exist_ok=True)
    for spec, N, n in RUNS:
        t0 = time.time()
        rep = extend_group_chain(spec, N, n, scales)
        dt = time.time() - t0
        p = rep.parameters
        bad = [s.name for s in rep.stages if not s.ok]
        print(f"{spec.label:12s} N={N:2d} n={n}  overall={rep.overall!s:5s}  "
              f"ks={p.get('final_ks')} scales={p.get('final_scales')} D={p.get('final_bound')}  "
              f"{dt:6.1f}s" + (f"  failed: {bad}" if bad else ""))
        if a.outdir:
            name = f"{spec.label.replace('/', '').replace('*', 'x').replace('^', '')}_N{N}_n{n}.json"
            with open(os.path.join(a.outdir, name), "w") as fh:
                json.dump(io.pipeline_report_to_json(rep), fh, default=str)


if __name__ == "__main__":
    main()
