"""Geometries: open field, angle fan, three-channel junction, synthetic city,
and raster masks."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import pnm
from .errors import EmptyMask, GeometryOverflow
from .lattice import DomainMask, Node

FOUR_CONNECTED = ndimage.generate_binary_structure(2, 1)

# branch angles of the fan, measured from the upstream direction of the main
# channel (towards the stimulation site): 20 deg points almost straight back
FAN_ANGLES = (20, 40, 60, 80, 100, 120, 140, 160)


@dataclass(frozen=True, eq=False)
class Template:
    kind: str
    mask: DomainMask
    sites: dict[str, Node] = field(default_factory=dict)
    channel_width: int = 12
    regions: dict[str, np.ndarray] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class TemplateSpec:
    kind: str = "open_field"
    width: int | None = None
    height: int | None = None
    channel_width: int = 12
    seed: int = 1
    length: int | None = None  # fan branch length / three-channel arm length
    path: str | None = None
    polarity: int = 1
    threshold: int = 128

    KINDS = ("open_field", "angle_fan", "three_channel", "raster", "synthetic_city", "city")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown template kind {self.kind!r}")
        if self.channel_width < 3:
            raise ValueError("channel_width must be >= 3")
        if self.kind == "raster" and not self.path:
            raise ValueError("raster template needs a path")


def build(spec: TemplateSpec) -> Template:
    if spec.kind == "open_field":
        return open_field(spec.width or 400, spec.height or spec.width or 400)
    if spec.kind == "angle_fan":
        return angle_fan(spec.length or 100, spec.channel_width)
    if spec.kind == "three_channel":
        return three_channel(arm=spec.length or 120, channel_width=spec.channel_width)
    if spec.kind == "synthetic_city":
        w = spec.width or 512
        return synthetic_city(spec.seed, (spec.height or w, w))
    if spec.kind == "city":
        return bundled_city()
    mask = load_raster(spec.path, spec.polarity, spec.threshold)
    return Template("raster", mask, channel_width=spec.channel_width,
                    meta={"path": str(spec.path)})


# ----------------------------------------------------------------- drawing

def draw_segment(canvas: np.ndarray, p0, p1, width: float, *, clip: bool = False) -> np.ndarray:
    """Mark nodes within a thick straight segment; returns the stroke mask.

    A node belongs to the stroke when its projection falls on ``[p0, p1]``
    and its signed distance to the centre line lies in ``[-width/2, width/2)``.
    An axis-aligned stroke is therefore exactly ``width`` nodes across.
    """
    (r0, c0), (r1, c1) = p0, p1
    length = math.hypot(r1 - r0, c1 - c0)
    if length == 0:
        raise ValueError("degenerate segment")
    tr, tc = (r1 - r0) / length, (c1 - c0) / length
    nr, nc = -tc, tr
    pad = width
    lo_r = int(math.floor(min(r0, r1) - pad))
    hi_r = int(math.ceil(max(r0, r1) + pad)) + 1
    lo_c = int(math.floor(min(c0, c1) - pad))
    hi_c = int(math.ceil(max(c0, c1) + pad)) + 1
    rr, cc = np.mgrid[lo_r:hi_r, lo_c:hi_c]
    dr, dc = rr - r0, cc - c0
    along = dr * tr + dc * tc
    perp = dr * nr + dc * nc
    eps = 1e-9
    sel = (along >= -eps) & (along <= length + eps) & (perp >= -width / 2 - eps) & (perp < width / 2 - eps)
    rr, cc = rr[sel], cc[sel]
    h, w = canvas.shape
    inside = (rr >= 0) & (rr < h) & (cc >= 0) & (cc < w)
    if not clip and not inside.all():
        raise GeometryOverflow(f"segment {p0}->{p1} (width {width}) leaves the {h}x{w} grid")
    stroke = np.zeros(canvas.shape, dtype=bool)
    stroke[rr[inside], cc[inside]] = True
    canvas |= stroke
    return stroke


def components(mask: np.ndarray) -> tuple[np.ndarray, int]:
    return ndimage.label(mask, structure=FOUR_CONNECTED)


def largest_component(mask: np.ndarray) -> np.ndarray:
    lab, n = components(mask)
    if n <= 1:
        return mask.copy()
    sizes = np.bincount(lab.ravel())
    sizes[0] = 0
    return lab == int(np.argmax(sizes))


# --------------------------------------------------------------- templates

def open_field(width: int, height: int | None = None) -> Template:
    height = width if height is None else height
    mask = DomainMask.full(height, width)
    return Template("open_field", mask, {"C": (height // 2, width // 2)},
                    meta={"width": width, "height": height})


def angle_fan(length: int = 100, channel_width: int = 12, *, spacing: int | None = None,
              margin: int = 12, height: int | None = None, width: int | None = None) -> Template:
    """Vertical channel with eight dead-end side channels.

    Side channel ``a`` leaves the main channel at ``a`` degrees from the
    upstream (northward) direction, alternating west (20, 60, 100, 140) and
    east (40, 80, 120, 160) going down. Excitation starts at the north end.
    ``regions['branch_<a>']`` holds the outer 40% of each side channel;
    excitation there counts as entering that branch.
    """
    if channel_width < 3:
        raise ValueError("channel_width must be >= 3")
    w = channel_width
    spacing = spacing if spacing is not None else 3 * w
    reach_up = length * math.cos(math.radians(FAN_ANGLES[0]))
    first = int(math.ceil(reach_up + margin + w))
    last = first + spacing * (len(FAN_ANGLES) - 1)
    H = height if height is not None else int(math.ceil(last + reach_up + margin + w))
    lateral = max(length * math.sin(math.radians(a)) for a in FAN_ANGLES)
    W = width if width is not None else 2 * int(math.ceil(lateral + margin + w)) + w
    cx = W / 2

    canvas = np.zeros((H, W), dtype=bool)
    main = draw_segment(canvas, (0, cx), (H - 1, cx), w)
    regions = {}
    junctions = {}
    for k, a in enumerate(FAN_ANGLES):
        row = first + k * spacing
        side = -1 if k % 2 == 0 else 1
        rad = math.radians(a)
        tip = (row - length * math.cos(rad), cx + side * length * math.sin(rad))
        stroke = draw_segment(canvas, (row, cx), tip, w)
        far = np.zeros_like(canvas)
        draw_segment(far, (row - 0.6 * length * math.cos(rad), cx + side * 0.6 * length * math.sin(rad)),
                     tip, w)
        regions[f"branch_{a}"] = far & stroke & ~main
        junctions[a] = (row, int(cx))
    mask = DomainMask(canvas)
    sites = {"N": (10, int(cx))}
    return Template("angle_fan", mask, sites, w, regions,
                    meta={"length": length, "spacing": spacing, "angles": list(FAN_ANGLES),
                          "junctions": {str(a): list(j) for a, j in junctions.items()}})


def three_channel(arm: int = 120, channel_width: int = 12, *, se_offset: int | None = None,
                  margin: int = 10) -> Template:
    """Junction template with dead-end arms labelled N, S, E and SE.

    A straight north-south channel; the E arm leaves its midpoint at right
    angles, the SE arm leaves ``se_offset`` nodes further south at 45 degrees.
    Sites sit 10 nodes in from each arm's end, so a centred 20x20 stimulus
    covers a full ``channel_width x 20`` block.
    """
    w = channel_width
    se_offset = se_offset if se_offset is not None else int(arm - arm / math.sqrt(2)) - w
    diag = arm / math.sqrt(2)
    H = 2 * arm + 2 * margin + 1
    W = int(math.ceil(margin + w + max(arm, diag) + margin))
    jr, jc = margin + arm, margin + w // 2
    canvas = np.zeros((H, W), dtype=bool)
    draw_segment(canvas, (jr - arm, jc), (jr + arm, jc), w)
    draw_segment(canvas, (jr, jc), (jr, jc + arm), w)
    sr = jr + se_offset
    if sr + diag > H - margin:
        raise GeometryOverflow("SE arm does not fit; reduce se_offset")
    draw_segment(canvas, (sr, jc), (sr + diag, jc + diag), w)
    inset = 10
    d = inset / math.sqrt(2)
    sites = {
        "N": (jr - arm + inset, jc),
        "S": (jr + arm - inset, jc),
        "E": (jr, jc + arm - inset),
        "SE": (int(round(sr + diag - d)), int(round(jc + diag - d))),
    }
    mask = DomainMask(canvas)
    for label, s in sites.items():
        if not mask.is_excitable(s):
            raise GeometryOverflow(f"site {label} at {s} is not on the channel")
    return Template("three_channel", mask, sites, w,
                    meta={"arm": arm, "se_offset": se_offset, "junction": [jr, jc]})


# ------------------------------------------------------------ synthetic city

STREET_WIDTHS = (4, 6, 8, 12, 16, 20)
STREET_WEIGHTS = (0.15, 0.25, 0.2, 0.2, 0.12, 0.08)


def synthetic_city(seed: int = 1, dims: tuple[int, int] = (512, 512), *,
                   river_width: int | None = None, bridges: tuple[int, int] = (1, 1),
                   bridge_span: tuple[float, float] = (0.85, 1.0),
                   block: tuple[int, int] = (44, 80)) -> Template:
    """Deterministic street-like mask split by an east-west river.

    Each bank carries its own jittered grid of avenues and cross streets of
    mixed width plus a couple of diagonals; an embankment street runs along
    each bank and ``bridges`` (inclusive range) bridges cross the river at
    evenly spaced, jittered columns inside ``bridge_span`` (fractions of the
    width). By default a single bridge sits at the far east end, away from the
    stimulation site, so the north bank is swept before the south bank
    ignites. The result is one 4-connected component after a 3x3 opening (so
    no street is thinner than 3 nodes). Site ``S`` sits at the north end of an
    avenue in the north-west quadrant.
    """
    H, W = dims
    if H < 128 or W < 128:
        raise ValueError("synthetic_city needs at least 128x128 nodes")
    rng = np.random.default_rng(seed)
    river_width = river_width if river_width is not None else max(24, H * 15 // 64)
    r_top = H // 2 - river_width // 2
    r_bot = r_top + river_width
    emb_w = 8
    canvas = np.zeros((H, W), dtype=bool)

    def width():
        return int(rng.choice(STREET_WIDTHS, p=STREET_WEIGHTS))

    def positions(lo, hi):
        out = []
        x = lo + rng.integers(block[0] // 3, block[0])
        while x < hi - block[0] // 3:
            out.append(int(x))
            x += rng.integers(block[0], block[1] + 1)
        return out

    avenues = {}
    for bank, (top, bot) in {"north": (0, r_top), "south": (r_bot, H)}.items():
        # embankment along the river edge of this bank
        er = top if bank == "south" else bot - emb_w
        draw_segment(canvas, (er + emb_w / 2, 0), (er + emb_w / 2, W - 1), emb_w, clip=True)
        avs = positions(0, W)
        avenues[bank] = []
        for x in avs:
            aw = width()
            draw_segment(canvas, (top, x), (bot - 1, x), aw, clip=True)
            avenues[bank].append((x, aw))
        lo = top + (0 if bank == "north" else emb_w)
        hi = bot - (emb_w if bank == "north" else 0)
        for y in positions(lo, hi):
            sw = width()
            if rng.random() < 0.6 or len(avs) < 3:
                draw_segment(canvas, (y, 0), (y, W - 1), sw, clip=True)
            else:
                i = int(rng.integers(0, len(avs) - 2))
                j = int(rng.integers(i + 2, len(avs) + 1))
                c0 = avs[i]
                c1 = avs[j] if j < len(avs) else W - 1
                draw_segment(canvas, (y, c0), (y, c1), sw, clip=True)
        for _ in range(2):
            ang = math.radians(rng.uniform(25, 65)) * (1 if rng.random() < 0.5 else -1)
            c_mid = rng.uniform(0.25 * W, 0.75 * W)
            half = (bot - top) / 2
            dc = half / math.tan(abs(ang)) * (1 if ang > 0 else -1)
            draw_segment(canvas, (top, c_mid - dc), (bot - 1, c_mid + dc), width(), clip=True)

    n_bridges = int(rng.integers(bridges[0], bridges[1] + 1))
    slots = np.linspace(bridge_span[0] * W, bridge_span[1] * W, n_bridges + 2)[1:-1]
    bridge_cols = []
    for s in slots:
        col = int(round(s + rng.uniform(-0.05, 0.05) * W))
        bw = int(rng.choice((8, 12)))
        draw_segment(canvas, (r_top - emb_w, col), (r_bot + emb_w - 1, col), bw)
        bridge_cols.append((col, bw))

    # pad by replication so streets running off the grid are not eroded at the border
    padded = np.pad(canvas, 2, mode="edge")
    canvas = ndimage.binary_opening(padded, structure=np.ones((3, 3), bool))[2:-2, 2:-2]
    canvas = largest_component(canvas)

    nw = [x for x, aw in avenues["north"] if x < W // 2 and aw >= 8] or [avenues["north"][0][0]]
    site = (10, nw[0])
    if not canvas[site]:
        cols = np.nonzero(canvas[10])[0]
        site = (10, int(cols[np.argmin(np.abs(cols - nw[0]))]))
    mask = DomainMask(canvas)
    meta = {
        "seed": seed, "dims": [H, W], "river_rows": [r_top, r_bot],
        "bridges": [list(b) for b in bridge_cols], "n_excitable": mask.n_excitable,
    }
    return Template("synthetic_city", mask, {"S": site}, 12, meta=meta)


DATA_DIR = Path(__file__).resolve().parent / "data"


def bundled_city(name: str = "synthetic_city_512") -> Template:
    """The packaged synthetic city mask with its recorded sites and metadata."""
    info = json.loads((DATA_DIR / f"{name}.json").read_text())
    mask = load_raster(DATA_DIR / f"{name}.pbm")
    sites = {k: (int(v[0]), int(v[1])) for k, v in info["sites"].items()}
    return Template("synthetic_city", mask, sites, info.get("channel_width", 12), meta=info)


# ------------------------------------------------------------------ rasters

def mask_from_pixels(pixels: np.ndarray, maxval: int, polarity: int = 1,
                     threshold: int | None = None) -> DomainMask:
    """PBM: pixel value == polarity is a street. PGM: pixel >= threshold is
    'on', and 'on' == polarity is a street."""
    if maxval == 1:
        on = pixels == 1
    else:
        on = pixels >= (threshold if threshold is not None else (maxval + 1) // 2)
    street = on if polarity == 1 else ~on
    if not street.any():
        raise EmptyMask("raster has no excitable node for the chosen polarity")
    return DomainMask(street)


def load_raster(path: str | os.PathLike, polarity: int = 1, threshold: int | None = None) -> DomainMask:
    pixels, maxval = pnm.read(path)
    return mask_from_pixels(pixels, maxval, polarity, threshold)


def save_raster(path: str | os.PathLike, mask: DomainMask, polarity: int = 1) -> None:
    bits = mask.excitable if polarity == 1 else ~mask.excitable
    pnm.write_pbm(path, bits)
