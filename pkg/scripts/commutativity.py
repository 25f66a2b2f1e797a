"""Reachability graphs of the three-channel junction and their symmetry.

    python scripts/commutativity.py [phi ...]
"""

import sys
import time

from excitable.analysis import check_commutativity, reachability
from excitable.templates import three_channel


def main(phis):
    t = three_channel()
    print(f"three_channel {t.mask.shape}, sites {t.sites}")
    for phi in phis:
        start = time.time()
        g = reachability(t, phi)
        ok, bad = check_commutativity(g)
        und = sorted("-".join(sorted(e)) for e in g.undirected())
        print(f"phi={phi:.4f} edges={len(g.edges)} undirected={und} symmetric={ok} {bad} "
              f"({time.time() - start:.1f}s)", flush=True)


if __name__ == "__main__":
    main([float(a) for a in sys.argv[1:]] or [0.06, 0.0767, 0.078, 0.079])
