"""Square perturbations of the activator field."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import VoidStimulus
from .lattice import MediumState, Node


@dataclass(frozen=True)
class StimulusSpec:
    origin: Node  # (row, col) of the top-left corner; may lie off-grid
    edge: int = 20
    level: float = 1.0
    label: str | None = None

    def __post_init__(self):
        if self.edge < 1:
            raise ValueError("stimulus edge must be >= 1")
        if not self.level > 0:
            raise ValueError("stimulus level must be > 0")
        object.__setattr__(self, "origin", (int(self.origin[0]), int(self.origin[1])))

    @classmethod
    def centered(cls, site: Node, edge: int = 20, level: float = 1.0,
                 label: str | None = None) -> StimulusSpec:
        return cls((site[0] - edge // 2, site[1] - edge // 2), edge, level, label)

    def window(self, shape: tuple[int, int]) -> tuple[slice, slice]:
        """Square clipped to the grid (possibly empty)."""
        r, c = self.origin
        h, w = shape
        return (slice(min(max(r, 0), h), min(max(r + self.edge, 0), h)),
                slice(min(max(c, 0), w), min(max(c + self.edge, 0), w)))


def footprint(shape: tuple[int, int], excitable: np.ndarray, spec: StimulusSpec) -> np.ndarray:
    out = np.zeros(shape, dtype=bool)
    win = spec.window(shape)
    out[win] = excitable[win]
    return out


def apply(state: MediumState, spec: StimulusSpec) -> MediumState:
    """Set ``u = level`` on every excitable node inside the (clipped) square."""
    hit = footprint(state.u.shape, state.mask.excitable, spec)
    if not hit.any():
        where = f" '{spec.label}'" if spec.label else ""
        raise VoidStimulus(f"stimulus{where} at {spec.origin} (edge {spec.edge}) "
                           "covers no excitable node")
    state.u[hit] = spec.level
    return state


def apply_refractory(state: MediumState, origin: Node, shape: tuple[int, int],
                     level: float = 1.0) -> MediumState:
    """Raise the inhibitor on excitable nodes of a rectangle.

    Placed behind a stimulus square this blocks backward propagation and
    turns the square into a one-sided wave fragment.
    """
    spec_h, spec_w = shape
    r, c = origin
    h, w = state.u.shape
    rs = slice(min(max(r, 0), h), min(max(r + spec_h, 0), h))
    cs = slice(min(max(c, 0), w), min(max(c + spec_w, 0), w))
    block = np.zeros(state.u.shape, dtype=bool)
    block[rs, cs] = state.mask.excitable[rs, cs]
    state.v[block] = level
    return state
