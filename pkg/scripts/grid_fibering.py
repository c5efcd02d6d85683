"""Pullback of an interval decomposition along the projection of a square grid.

Counts, for every preimage step, the cross-piece pairs of equal color and how
many of them sit within the step's scale (should be none).

    python3 scripts/grid_fibering.py [--size 21] [--interval 8] [--band 6]
"""
import argparse

import numpy as np

from fdcbench.pipeline import grid_projection_input, pullback_chain
from fdcbench.witness import verify_chain


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=21)
    ap.add_argument("--interval", type=int, default=8)
    ap.add_argument("--band", type=int, default=6)
    a = ap.parse_args()
    inp, scales = grid_projection_input(a.size, a.interval, a.band)
    ch = pullback_chain(inp, scales)
    nb = len(inp.base_chain.steps)
    for level, (step, R) in enumerate(zip(ch.steps, scales)):
        pairs = close = 0
        for w in step.witnesses:
            pieces = list(w.pieces.items())
            for i in range(len(pieces)):
                for j in range(i + 1, len(pieces)):
                    (la, A), (lb, B) = pieces[i], pieces[j]
                    if la[0] != lb[0]:
                        continue
                    M = A.ambient.block(A.idx, B.idx)
                    pairs += M.size
                    close += int(np.count_nonzero(M <= R))
        kind = "preimage" if level < nb else "fiber"
        print(f"step {level + 1} ({kind}, R={R}, k={step.k}): {len(step.members)} members, "
              f"{pairs} same-color cross pairs, {close} within R")
    rep = verify_chain(ch)
    print(f"chain valid={rep.valid}  scales={ch.scales}  final bound={ch.final_bound}")


if __name__ == "__main__":
    main()
