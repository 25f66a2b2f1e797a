"""Explicit Euler integration of the two-variable Oregonator on a masked lattice.

    du/dt = (u - u^2 - (f v + phi) (u - q)/(u + q)) / eps + D_u lap(u)
    dv/dt = u - v

The activator is floored at zero after each update. Near the rest state the
reaction Jacobian is about -(f v + phi) / (2 q eps), so with dt = 0.001 the
Euler map overshoots whenever v > ~0.08 (the refractory tail) and would reach
the pole at u = -q. The floor only acts there; wave fronts are unaffected.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Callable, Iterable

import numpy as np
from numba import njit

from .errors import NumericalBlowup
from .lattice import MediumState
from .metrics import RunRecord, Termination, update


@dataclass(frozen=True)
class SimParams:
    epsilon: float = 0.02
    f: float = 1.4
    q: float = 0.002
    phi: float = 0.05
    du: float = 0.33
    dt: float = 0.001
    dx: float = 0.25
    excited_threshold: float = 0.1
    display_threshold: float = 0.04
    max_steps: int = 200_000
    sample_stride: int = 150

    def __post_init__(self):
        checks = {
            "epsilon": self.epsilon > 0,
            "q": self.q > 0,
            "dt": self.dt > 0,
            "dx": self.dx > 0,
            "du": self.du >= 0,
            "f": self.f > 0,
            "phi": self.phi >= 0,
            "excited_threshold": self.excited_threshold > 0,
            "display_threshold": self.display_threshold > 0,
            "max_steps": self.max_steps >= 0,
            "sample_stride": self.sample_stride >= 1,
        }
        for name, ok in checks.items():
            value = getattr(self, name)
            if not ok or (isinstance(value, float) and not math.isfinite(value)):
                raise ValueError(f"invalid SimParams.{name} = {value!r}")

    def with_phi(self, phi: float) -> SimParams:
        return replace(self, phi=phi)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


@njit(cache=True)
def _advance(u, v, u2, v2, excitable, ever, threshold, nsteps,
             eps, f, q, phi, du, dt, dx2):
    """Run ``nsteps`` synchronous updates; returns the index (0-based, within
    this call) of the first step producing a non-finite value, or -1."""
    h, w = u.shape
    a_u, a_v, b_u, b_v = u, v, u2, v2
    bad = -1
    for k in range(nsteps):
        for i in range(h):
            for j in range(w):
                if not excitable[i, j]:
                    b_u[i, j] = 0.0
                    b_v[i, j] = 0.0
                    continue
                c = a_u[i, j]
                s = 0.0
                # non-excitable nodes hold zero, so no mask test is needed here
                if i > 0:
                    s += a_u[i - 1, j]
                if i < h - 1:
                    s += a_u[i + 1, j]
                if j > 0:
                    s += a_u[i, j - 1]
                if j < w - 1:
                    s += a_u[i, j + 1]
                lap = (s - 4.0 * c) / dx2
                vv = a_v[i, j]
                react = (c - c * c - (f * vv + phi) * (c - q) / (c + q)) / eps
                un = c + dt * (react + du * lap)
                if un < 0.0:
                    un = 0.0
                vn = vv + dt * (c - vv)
                if not (math.isfinite(un) and math.isfinite(vn)):
                    bad = k
                b_u[i, j] = un
                b_v[i, j] = vn
                if un > threshold:
                    ever[i, j] = True
        a_u, b_u = b_u, a_u
        a_v, b_v = b_v, a_v
        if bad >= 0:
            break
    if a_u is not u:
        u[:, :] = a_u
        v[:, :] = a_v
    return bad


def advance(state: MediumState, params: SimParams, nsteps: int,
            ever: np.ndarray | None = None) -> MediumState:
    """Advance ``state`` in place by ``nsteps`` Euler steps.

    If ``ever`` is given it is OR-ed with ``u > excited_threshold`` after
    every step.
    """
    if nsteps <= 0:
        return state
    if ever is None:
        ever = np.zeros(state.u.shape, dtype=bool)
    u2, v2 = state.scratch()
    bad = _advance(state.u, state.v, u2, v2, state.mask.excitable, ever,
                   params.excited_threshold, int(nsteps),
                   params.epsilon, params.f, params.q, params.phi, params.du,
                   params.dt, params.dx * params.dx)
    if bad >= 0:
        state.step += bad + 1
        raise NumericalBlowup(state.step)
    state.step += nsteps
    return state


def step(state: MediumState, params: SimParams) -> MediumState:
    return advance(state, params, 1)


@dataclass
class Every:
    """Observer hook: ``fn(state)`` is called whenever ``state.step`` is a
    multiple of ``stride`` (including step 0)."""

    stride: int
    fn: Callable[[MediumState], None]


def run(state: MediumState, params: SimParams,
        observers: Iterable[Every | Callable] = ()) -> RunRecord:
    """Integrate until extinction, full coverage or the step cap.

    Termination is evaluated on the sampling cadence (``sample_stride``).
    Plain callables in ``observers`` run at each sample as ``fn(state, record)``.
    """
    hooks = [o for o in observers if isinstance(o, Every)]
    per_sample = [o for o in observers if not isinstance(o, Every)]
    for h in hooks:
        if h.stride < 1:
            raise ValueError("observer stride must be >= 1")

    record = RunRecord.empty(state.mask, params.sample_stride)
    start = state.step
    stride = params.sample_stride
    cap = params.max_steps

    def fire(at_sample: bool):
        for h in hooks:
            if state.step % h.stride == 0:
                h.fn(state)
        if at_sample:
            update(record, state, params)
            for fn in per_sample:
                fn(state, record)

    fire(True)
    cause = _termination(record, 0, cap)
    next_sample = 0
    while cause is None:
        taken = state.step - start
        if taken == next_sample:
            next_sample = min(taken + stride, cap)
        target = next_sample
        for h in hooks:
            target = min(target, state.step + h.stride - state.step % h.stride - start)
        advance(state, params, target - taken, record.ever_excited)
        at_sample = state.step - start == next_sample
        fire(at_sample)
        if at_sample:
            cause = _termination(record, next_sample, cap)
    record.finish(cause, state.step - start)
    return record


def _termination(record: RunRecord, taken: int, cap: int) -> Termination | None:
    if record.fully_covered():
        return Termination.FULLY_COVERED
    if record.excited_count_series[-1] == 0:
        return Termination.EXTINGUISHED
    if taken >= cap:
        return Termination.STEP_CAP
    return None
