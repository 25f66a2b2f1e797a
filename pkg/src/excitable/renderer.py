"""Threshold snapshots and time-lapse overlays as 8-bit PGM images.

Palette: 0 for nodes with ``u > display_threshold``, 200 for other street
nodes, 255 for non-street nodes.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from . import pnm
from .integrator import Every
from .lattice import DomainMask, MediumState

EXCITED, STREET, BACKGROUND = 0, 200, 255


@dataclass(frozen=True)
class FrameSpec:
    snapshot_stride: int = 150
    frame_stride: int = 50
    display_threshold: float = 0.04
    mode: str = "timelapse_overlay"  # or "single"
    save_frames: bool = False

    def __post_init__(self):
        if self.snapshot_stride < 1 or self.frame_stride < 1:
            raise ValueError("strides must be >= 1")
        if not self.display_threshold > 0:
            raise ValueError("display_threshold must be > 0")
        if self.mode not in ("single", "timelapse_overlay"):
            raise ValueError(f"unknown frame mode {self.mode!r}")


def paint(dark: np.ndarray, mask: DomainMask) -> np.ndarray:
    img = np.full(mask.shape, BACKGROUND, dtype=np.uint8)
    img[mask.excitable] = STREET
    img[dark & mask.excitable] = EXCITED
    return img


def displayed(state: MediumState, threshold: float) -> np.ndarray:
    return (state.u > threshold) & state.mask.excitable


def render_frame(state: MediumState, mask: DomainMask | None = None,
                 spec: FrameSpec | None = None) -> np.ndarray:
    spec = spec or FrameSpec()
    mask = mask or state.mask
    return paint(displayed(state, spec.display_threshold), mask)


def render_timelapse(frames: Iterable[np.ndarray], mask: DomainMask) -> np.ndarray:
    """Overlay of displayed sets: a node is dark if it was dark in any frame."""
    union = np.zeros(mask.shape, dtype=bool)
    n = 0
    for f in frames:
        union |= np.asarray(f, dtype=bool)
        n += 1
    if n == 0:
        raise ValueError("render_timelapse needs at least one frame")
    return paint(union, mask)


@dataclass
class TimelapseRecorder:
    """Observer that ORs the displayed set into a running overlay every
    ``snapshot_stride`` steps, and optionally writes frames every
    ``frame_stride`` steps (copy-then-render: only thresholded copies are kept).
    """

    mask: DomainMask
    spec: FrameSpec = field(default_factory=FrameSpec)
    frame_dir: str | os.PathLike | None = None
    union: np.ndarray = None
    snapshots: int = 0
    frames_written: int = 0

    def __post_init__(self):
        self.union = np.zeros(self.mask.shape, dtype=bool)
        if self.frame_dir is not None:
            Path(self.frame_dir).mkdir(parents=True, exist_ok=True)

    def observers(self) -> list[Every]:
        hooks = [Every(self.spec.snapshot_stride, self.snapshot)]
        if self.frame_dir is not None and self.spec.save_frames:
            hooks.append(Every(self.spec.frame_stride, self.frame))
        return hooks

    def snapshot(self, state: MediumState) -> None:
        self.union |= displayed(state, self.spec.display_threshold)
        self.snapshots += 1

    def frame(self, state: MediumState) -> None:
        path = Path(self.frame_dir) / f"frame_{state.step:08d}.pgm"
        pnm.write_pgm(path, render_frame(state, self.mask, self.spec))
        self.frames_written += 1

    def image(self) -> np.ndarray:
        return paint(self.union, self.mask)


def montage(images: list[np.ndarray], columns: int | None = None, gap: int = 4) -> np.ndarray:
    """Tile equally sized images row-major on a white background."""
    if not images:
        raise ValueError("no images")
    h, w = images[0].shape
    n = len(images)
    columns = columns or int(np.ceil(np.sqrt(n)))
    rows = int(np.ceil(n / columns))
    out = np.full((rows * h + (rows - 1) * gap, columns * w + (columns - 1) * gap),
                  BACKGROUND, dtype=np.uint8)
    for k, img in enumerate(images):
        r, c = divmod(k, columns)
        out[r * (h + gap):r * (h + gap) + h, c * (w + gap):c * (w + gap) + w] = img
    return out
