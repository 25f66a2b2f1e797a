"""Open-field wave-fragment regimes: classify a few phi values, then bisect
for the Expanding/Collapsing boundary and the Preserving window.

    python scripts/regimes.py [--du 0.33] [--tol 1e-8] [--size 400]
"""

import argparse
import time

from excitable import SimParams
from excitable.analysis import WaveClass, classify_detail, find_regime_boundary, preserving_window


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--du", type=float, default=SimParams().du)
    ap.add_argument("--tol", type=float, default=1e-8)
    ap.add_argument("--size", type=int, default=400)
    ap.add_argument("--phi", type=float, nargs="*", default=[0.05, 0.07, 0.076, 0.077, 0.079])
    args = ap.parse_args()
    params = SimParams(du=args.du)
    dims = (args.size, args.size)

    for phi in args.phi:
        t = time.time()
        c = classify_detail(phi, dims, params=params)
        print(f"phi={phi:.6f} {c.wave_class:<10} slope={c.slope:+.5f} s0={c.threshold:.5f} "
              f"mean_area={c.mean_area:.0f} ({time.time() - t:.0f}s)", flush=True)

    def classify(phi):
        c = classify_detail(phi, dims, params=params)
        print(f"  bisect phi={phi:.9f} {c.wave_class} slope={c.slope:+.5f}", flush=True)
        return c.wave_class

    b = find_regime_boundary(WaveClass.EXPANDING, WaveClass.COLLAPSING, 0.07, 0.08, 1e-5, classify)
    print(f"Expanding/Collapsing boundary ~ {b.phi:.6f} (first non-expanding class {b.class_hi})")
    win = preserving_window(b.lo, b.hi, args.tol, classify)
    if win.lower is None:
        print("no Preserving window resolved")
    else:
        print(f"Preserving window [{win.lower:.9f}, {win.upper:.9f}], width {win.width:.2e}")


if __name__ == "__main__":
    main()
