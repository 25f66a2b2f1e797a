"""Coverage-vs-phi regression over the sub-excitable window on the bundled
city (from a sweep's coverage.csv) and on the angle fan.

    python scripts/slopes.py path/to/coverage.csv
"""

import csv
import sys

from excitable.analysis import fan_run, linear_fit
from excitable.templates import angle_fan

WINDOW = [0.073, 0.074, 0.075, 0.076, 0.077]


def main(coverage_csv):
    with open(coverage_csv) as fh:
        rows = {round(float(r["phi"]), 6): float(r["coverage"]) for r in csv.DictReader(fh)}
    city = linear_fit([(p, rows[p]) for p in WINDOW])
    fan = angle_fan()
    fan_pts = [(p, fan_run(fan, p).coverage) for p in WINDOW]
    fit = linear_fit(fan_pts)
    print("phi     city      fan")
    for (p, c) in fan_pts:
        print(f"{p:.3f}  {rows[p]:.5f}  {c:.5f}")
    print(f"city: coverage = {city.slope:.3f} * phi + {city.intercept:.4f}")
    print(f"fan:  coverage = {fit.slope:.3f} * phi + {fit.intercept:.4f}")


if __name__ == "__main__":
    main(sys.argv[1])
