"""Regenerate the bundled synthetic city mask and its manifest.

    python scripts/make_city.py [--seed 1] [--size 512]
"""

import argparse
import json
from pathlib import Path

from excitable.templates import save_raster, synthetic_city

DATA = Path(__file__).resolve().parents[1] / "src" / "excitable" / "data"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--size", type=int, default=512)
    args = ap.parse_args()
    city = synthetic_city(args.seed, (args.size, args.size))
    stem = f"synthetic_city_{args.size}"
    DATA.mkdir(exist_ok=True)
    save_raster(DATA / f"{stem}.pbm", city.mask)
    manifest = {
        "generator": "synthetic_city",
        "seed": args.seed,
        "shape": list(city.mask.shape),
        "n_excitable": city.mask.n_excitable,
        "sites": {k: list(v) for k, v in city.sites.items()},
        "channel_width": city.channel_width,
        "river_rows": city.meta["river_rows"],
        "bridges": city.meta["bridges"],
    }
    (DATA / f"{stem}.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"{stem}: {city.mask.n_excitable} excitable nodes, site S at {city.sites['S']}")


if __name__ == "__main__":
    main()
