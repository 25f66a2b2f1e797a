"""Run records: excited-node series, ever-excited bitmap, coverage."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ZeroStreets
from .lattice import DomainMask, MediumState


class Termination(str, enum.Enum):
    EXTINGUISHED = "Extinguished"
    FULLY_COVERED = "FullyCovered"
    STEP_CAP = "StepCap"

    def __str__(self):
        return self.value


@dataclass(eq=False)
class RunRecord:
    mask: DomainMask
    sample_stride: int
    sample_steps: list[int] = field(default_factory=list)
    excited_count_series: list[int] = field(default_factory=list)
    ever_excited: np.ndarray | None = None
    coverage: float = 0.0
    termination: Termination | None = None
    steps_taken: int = 0

    @classmethod
    def empty(cls, mask: DomainMask, sample_stride: int) -> RunRecord:
        return cls(mask, sample_stride, ever_excited=np.zeros(mask.shape, dtype=bool))

    def fully_covered(self) -> bool:
        n = self.mask.n_excitable
        return n > 0 and int(np.count_nonzero(self.ever_excited)) >= n

    def finish(self, cause: Termination, steps_taken: int) -> RunRecord:
        self.termination = cause
        self.steps_taken = steps_taken
        self.coverage = coverage(self, self.mask) if self.mask.n_excitable else 0.0
        return self


def excited_set(state: MediumState, threshold: float) -> np.ndarray:
    return (state.u > threshold) & state.mask.excitable


def update(record: RunRecord, state: MediumState, params) -> RunRecord:
    """Append the current excited count and fold it into ``ever_excited``."""
    ex = excited_set(state, params.excited_threshold)
    record.sample_steps.append(state.step)
    record.excited_count_series.append(int(np.count_nonzero(ex)))
    record.ever_excited |= ex
    return record


def coverage(record: RunRecord, mask: DomainMask) -> float:
    """Fraction of street nodes excited at least once."""
    if mask.n_excitable == 0:
        raise ZeroStreets("mask has no excitable nodes")
    hit = np.count_nonzero(record.ever_excited & mask.excitable)
    return hit / mask.n_excitable


def local_maxima(series, min_separation: int = 1) -> list[int]:
    """Indices of strict interior local maxima (plateaus count once)."""
    x = np.asarray(series, dtype=float)
    peaks = []
    i = 1
    while i < len(x) - 1:
        if x[i] > x[i - 1]:
            j = i
            while j + 1 < len(x) and x[j + 1] == x[i]:
                j += 1
            if j + 1 < len(x) and x[j + 1] < x[i]:
                if not peaks or i - peaks[-1] >= min_separation:
                    peaks.append(i)
            i = j + 1
        else:
            i += 1
    return peaks


@dataclass(frozen=True)
class SweepPoint:
    phi: float
    coverage: float
    termination: Termination
    steps_taken: int


def phi_grid(phi_start: float, phi_end: float, phi_step: float) -> list[float]:
    if not phi_step > 0:
        raise ValueError("phi_step must be > 0")
    if phi_end < phi_start:
        raise ValueError("phi_end must be >= phi_start")
    n = int(np.floor((phi_end - phi_start) / phi_step + 1e-9)) + 1
    return [round(phi_start + i * phi_step, 10) for i in range(n)]


def _sweep_one(args):
    from .integrator import run
    from .lattice import new_state
    from .stimulus import apply

    mask, stimuli, params = args
    state = new_state(mask)
    for s in stimuli:
        apply(state, s)
    try:
        rec = run(state, params)
    except Exception as exc:
        exc.phi = params.phi
        raise
    return rec


def coverage_sweep(mask: DomainMask, stimuli, phi_start: float, phi_end: float,
                   phi_step: float, params=None, jobs: int = 1,
                   keep_records: bool = False):
    """One full run per phi on the grid ``phi_start, phi_start + step, ...``.

    Results come back in phi order whatever the completion order. Errors
    propagate with a ``phi`` attribute naming the failing run. With
    ``keep_records`` the full RunRecords are returned alongside.
    """
    from .integrator import SimParams

    params = params or SimParams()
    if not isinstance(stimuli, (list, tuple)):
        stimuli = [stimuli]
    tasks = [(mask, list(stimuli), params.with_phi(phi))
             for phi in phi_grid(phi_start, phi_end, phi_step)]
    records = run_parallel(_sweep_one, tasks, jobs)
    points = [SweepPoint(t[2].phi, r.coverage, r.termination, r.steps_taken)
              for t, r in zip(tasks, records)]
    return (points, records) if keep_records else points


def run_parallel(fn, tasks, jobs: int):
    """Map ``fn`` over ``tasks`` in a process pool, preserving order."""
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        return list(pool.map(fn, tasks))


@dataclass(frozen=True)
class PeakPair:
    first: int  # sample index of the first peak
    trough: int
    second: int
    values: tuple[float, float, float]  # smoothed (first, trough, second)

    @property
    def trough_ratio(self) -> float:
        return self.values[1] / self.values[0]


def smooth(series, window: int = 5) -> np.ndarray:
    """Centred moving average with edge replication (``window`` odd)."""
    x = np.asarray(series, dtype=float)
    if window <= 1 or len(x) == 0:
        return x
    half = window // 2
    padded = np.pad(x, half, mode="edge")
    return np.convolve(padded, np.ones(window) / window, mode="valid")


def activity_peaks(series, window: int = 5, prominence: float = 0.2) -> list[int]:
    """Peaks of the smoothed series whose prominence is at least
    ``prominence`` times the series maximum; sampling jitter is ignored."""
    from scipy.signal import find_peaks

    y = smooth(series, window)
    if len(y) < 3 or y.max() <= 0:
        return []
    idx, _ = find_peaks(y, prominence=prominence * y.max())
    return [int(i) for i in idx]


def two_peaks(series, max_ratio: float = 0.5, window: int = 5,
              prominence: float = 0.2) -> PeakPair | None:
    """First pair of consecutive activity peaks whose separating trough is
    at most ``max_ratio`` times the first peak, or None."""
    y = smooth(series, window)
    peaks = activity_peaks(series, window, prominence)
    for a, b in zip(peaks, peaks[1:]):
        t = a + int(np.argmin(y[a:b + 1]))
        if y[t] <= max_ratio * y[a]:
            return PeakPair(a, t, b, (float(y[a]), float(y[t]), float(y[b])))
    return None
