"""Which fan side channels does a wave from the north end enter, per phi?

    python scripts/angle_selection.py [phi ...]
"""

import sys
import time

from excitable.analysis import entered_branches, fan_run
from excitable.templates import angle_fan


def main(phis):
    fan = angle_fan()
    print(f"angle_fan {fan.mask.shape}, {fan.mask.n_excitable} excitable nodes")
    for phi in phis:
        t = time.time()
        rec = fan_run(fan, phi)
        branches = entered_branches(fan, rec)
        print(f"phi={phi:.4f} entered={len(branches)} {branches} coverage={rec.coverage:.4f} "
              f"{rec.termination} steps={rec.steps_taken} ({time.time() - t:.1f}s)", flush=True)


if __name__ == "__main__":
    main([float(a) for a in sys.argv[1:]] or [0.05, 0.07, 0.075, 0.078])
