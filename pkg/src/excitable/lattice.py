"""Masked 2-D lattice, medium state and the five-point Laplacian.

Arrays are indexed ``[row, col]`` with row 0 at the top (north). Non-excitable
nodes and everything outside the grid hold ``u = v = 0`` (Dirichlet).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

Node = tuple[int, int]


@dataclass(frozen=True, eq=False)
class DomainMask:
    """Immutable boolean lattice; ``True`` marks a street (medium) node."""

    excitable: np.ndarray

    def __post_init__(self):
        arr = np.array(self.excitable, dtype=bool, copy=True)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"mask must be a non-empty 2-D array, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "excitable", arr)
        object.__setattr__(self, "_count", int(arr.sum()))

    @classmethod
    def full(cls, height: int, width: int) -> DomainMask:
        return cls(np.ones((height, width), dtype=bool))

    @property
    def height(self) -> int:
        return self.excitable.shape[0]

    @property
    def width(self) -> int:
        return self.excitable.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.excitable.shape

    @property
    def n_excitable(self) -> int:
        return self._count

    def contains(self, node: Node) -> bool:
        r, c = node
        return 0 <= r < self.height and 0 <= c < self.width

    def is_excitable(self, node: Node) -> bool:
        return self.contains(node) and bool(self.excitable[node])

    def __eq__(self, other):
        if not isinstance(other, DomainMask):
            return NotImplemented
        return np.array_equal(self.excitable, other.excitable)

    def __hash__(self):
        return hash((self.shape, self.excitable.tobytes()))


@dataclass(eq=False)
class MediumState:
    """Activator ``u`` and inhibitor ``v`` over a mask, plus the step counter."""

    mask: DomainMask
    u: np.ndarray
    v: np.ndarray
    step: int = 0
    # scratch buffers for the ping-pong update, allocated lazily
    _scratch: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    def copy(self) -> MediumState:
        return MediumState(self.mask, self.u.copy(), self.v.copy(), self.step)

    def check_finite(self) -> bool:
        return bool(np.isfinite(self.u).all() and np.isfinite(self.v).all())

    def scratch(self) -> tuple[np.ndarray, np.ndarray]:
        if self._scratch is None or self._scratch[0].shape != self.u.shape:
            self._scratch = (np.empty_like(self.u), np.empty_like(self.v))
        return self._scratch


def new_state(mask: DomainMask) -> MediumState:
    return MediumState(mask, np.zeros(mask.shape), np.zeros(mask.shape), 0)


def laplacian_u(state: MediumState, node: Node, dx: float) -> float:
    """Five-point Laplacian of ``u`` at an excitable node.

    Neighbours that are off-grid or non-excitable contribute zero.
    """
    mask = state.mask
    if not mask.is_excitable(node):
        raise ValueError(f"node {node} is not excitable")
    r, c = node
    total = 0.0
    for nb in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
        if mask.is_excitable(nb):
            total += state.u[nb]
    return (total - 4.0 * state.u[r, c]) / (dx * dx)


def laplacian_field(u: np.ndarray, excitable: np.ndarray, dx: float) -> np.ndarray:
    """Vectorised Laplacian over the whole grid; zero at non-excitable nodes."""
    z = np.where(excitable, u, 0.0)
    p = np.pad(z, 1)
    lap = (p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:] - 4.0 * z) / (dx * dx)
    return np.where(excitable, lap, 0.0)
