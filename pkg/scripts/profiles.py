"""Color-count profiles of small spaces and of relative balls in free products.

    python3 scripts/profiles.py [--out profiles.json]
"""
import argparse
import json
import time

from fdcbench.groups import Cyclic, FreeAbelian, FreeProduct, enumerate_ball, relative_ball
from fdcbench.metric import complete_space, cycle_space, grid_space, path_space
from fdcbench.search import asdim_profile


def profile(name, S, scales, rule=None):
    t0 = time.time()
    rows = asdim_profile(S, scales, rule)
    out = {"space": name, "points": len(S),
           "rows": [{"r": r.r, "D": r.D, "k": r.k, "mode": r.mode} for r in rows],
           "seconds": round(time.time() - t0, 2)}
    print(f"{name:28s} n={len(S):5d}  " + "  ".join(f"r={r.r}:k={r.k}{'*' if r.mode == 'exhaustive' else ''}" for r in rows))
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out")
    a = ap.parse_args()
    results = []
    for name, S in [("path 10", path_space(10)), ("cycle 12", cycle_space(12)),
                    ("grid 3x3", grid_space(3)), ("K5", complete_space(5)),
                    ("grid 8x8", grid_space(8)), ("path 200", path_space(200))]:
        results.append(profile(name, S.whole(), [1, 2, 3, 4]))
    zz = FreeProduct((FreeAbelian(1), FreeAbelian(1)))
    c23 = FreeProduct((Cyclic(2), Cyclic(3)))
    for spec, N in [(zz, 5), (c23, 10)]:
        W = enumerate_ball(spec, N)
        for n in (1, 2):
            B = relative_ball(W, n)
            results.append(profile(f"{spec.label} N={N} B({n}) word", B, [1, 2, 3]))
        rel = W.rel_space().whole()
        results.append(profile(f"{spec.label} N={N} relative graph", rel, [1, 2], lambda r: 2))
    print("(* = exhaustive minimum, otherwise best heuristic)")
    if a.out:
        with open(a.out, "w") as fh:
            json.dump(results, fh, indent=1)


if __name__ == "__main__":
    main()
