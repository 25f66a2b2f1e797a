"""Wave-fragment regimes, regime-boundary search, reachability and fits."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .errors import BadBracket, DegenerateInput, Inconclusive
from .integrator import SimParams, advance, run
from .lattice import DomainMask, new_state
from .metrics import RunRecord, excited_set, run_parallel
from .stimulus import StimulusSpec, apply, apply_refractory
from .templates import Template


class WaveClass(str, enum.Enum):
    EXPANDING = "Expanding"
    PRESERVING = "Preserving"
    COLLAPSING = "Collapsing"

    def __str__(self):
        return self.value


# ------------------------------------------------------------ classification

@dataclass
class FragmentTrace:
    phi: float
    horizon: int
    steps: list[int] = field(default_factory=list)
    areas: list[int] = field(default_factory=list)
    extinct_at: int | None = None
    left_grid_at: int | None = None


@dataclass(frozen=True)
class Classification:
    wave_class: WaveClass
    slope: float  # nodes per step over the retained window
    threshold: float  # s0, nodes per step
    mean_area: float
    samples: int
    trace: FragmentTrace = field(repr=False, compare=False, default=None)


def fragment_seed(field_dims: tuple[int, int], edge: int = 20) -> StimulusSpec:
    """Default seed square at the field centre (the refractory block added by
    ``trace_fragment`` sits on its north side)."""
    h, w = field_dims
    return StimulusSpec((h // 2 - edge // 2, w // 2 - edge // 2), edge)


def trace_fragment(phi: float, field_dims: tuple[int, int] = (400, 400),
                   stimulus: StimulusSpec | None = None, horizon_steps: int = 15_000,
                   params: SimParams | None = None) -> FragmentTrace:
    """Excited area of a one-sided fragment on an open field, every
    ``sample_stride`` steps.

    The stimulus square gets a refractory block of equal height on its north
    side (two nodes wider each way), so the wave leaves southwards only and its
    two ends are free.
    """
    params = (params or SimParams()).with_phi(phi)
    stimulus = stimulus or fragment_seed(field_dims)
    mask = DomainMask.full(*field_dims)
    state = new_state(mask)
    apply(state, stimulus)
    r, c = stimulus.origin
    e = stimulus.edge
    apply_refractory(state, (r - e, c - 2), (e, e + 4), 1.0)

    trace = FragmentTrace(phi, horizon_steps)
    stride = params.sample_stride
    ever = np.zeros(mask.shape, dtype=bool)
    while state.step < horizon_steps:
        advance(state, params, min(stride, horizon_steps - state.step), ever)
        ex = excited_set(state, params.excited_threshold)
        area = int(np.count_nonzero(ex))
        trace.steps.append(state.step)
        trace.areas.append(area)
        if area == 0:
            trace.extinct_at = state.step
            break
        if ex[-1].any() or ex[0].any() or ex[:, 0].any() or ex[:, -1].any():
            trace.left_grid_at = state.step
            break
    return trace


def classify_trace(trace: FragmentTrace, tolerance: float = 0.02,
                   settle: float = 0.1, min_samples: int = 10) -> Classification:
    """Collapsing if the area hits zero; otherwise compare the least-squares
    slope of area vs step with ``tolerance * mean_area`` per 10^4 steps."""
    if trace.extinct_at is not None:
        return Classification(WaveClass.COLLAPSING, -math.inf, 0.0, 0.0, len(trace.areas), trace)
    cut = settle * trace.horizon
    kept = [(s, a) for s, a in zip(trace.steps, trace.areas) if s > cut]
    if len(kept) < min_samples:
        raise Inconclusive(
            f"phi={trace.phi}: only {len(kept)} samples after settling "
            f"(fragment left the grid at step {trace.left_grid_at}); enlarge the field")
    fit = linear_fit(kept)
    mean_area = float(np.mean([a for _, a in kept]))
    s0 = tolerance * mean_area / 1e4
    if fit.slope > s0:
        cls = WaveClass.EXPANDING
    elif fit.slope < -s0:
        cls = WaveClass.COLLAPSING
    else:
        cls = WaveClass.PRESERVING
    return Classification(cls, fit.slope, s0, mean_area, len(kept), trace)


def classify_wave(phi: float, field_dims: tuple[int, int] = (400, 400),
                  stimulus: StimulusSpec | None = None, horizon_steps: int = 15_000,
                  params: SimParams | None = None, tolerance: float = 0.02) -> WaveClass:
    return classify_detail(phi, field_dims, stimulus, horizon_steps, params, tolerance).wave_class


def classify_detail(phi: float, field_dims: tuple[int, int] = (400, 400),
                    stimulus: StimulusSpec | None = None, horizon_steps: int = 15_000,
                    params: SimParams | None = None, tolerance: float = 0.02) -> Classification:
    trace = trace_fragment(phi, field_dims, stimulus, horizon_steps, params)
    return classify_trace(trace, tolerance)


# -------------------------------------------------------- boundary search

@dataclass
class Boundary:
    phi: float
    lo: float
    hi: float
    class_lo: WaveClass
    class_hi: WaveClass  # class actually observed at ``hi``
    evaluations: list[tuple[float, WaveClass]] = field(default_factory=list)


def find_regime_boundary(class_low: WaveClass, class_high: WaveClass, phi_lo: float,
                         phi_hi: float, tol: float,
                         classify: Callable[[float], WaveClass] | None = None,
                         check_endpoints: bool = True) -> Boundary:
    """Bisect for the upper edge of ``class_low``.

    Any class other than ``class_low`` at the midpoint moves the upper end, so
    on an Expanding/Collapsing bracket the search stops at the first non-
    expanding phi; ``Boundary.class_hi`` tells whether that is a Preserving
    window or a direct switch to collapse.
    """
    classify = classify or classify_wave
    if not phi_lo < phi_hi:
        raise BadBracket(f"inverted bracket [{phi_lo}, {phi_hi}]")
    evals = []
    c_hi = class_high
    if check_endpoints:
        c_lo = classify(phi_lo)
        evals.append((phi_lo, c_lo))
        if c_lo != class_low:
            raise BadBracket(f"phi_lo={phi_lo} is {c_lo}, expected {class_low}")
        c_hi = classify(phi_hi)
        evals.append((phi_hi, c_hi))
        if c_hi != class_high:
            raise BadBracket(f"phi_hi={phi_hi} is {c_hi}, expected {class_high}")
    lo, hi = phi_lo, phi_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        c = classify(mid)
        evals.append((mid, c))
        if c == class_low:
            lo = mid
        else:
            hi, c_hi = mid, c
    return Boundary(0.5 * (lo + hi), lo, hi, class_low, c_hi, evals)


@dataclass
class PreservingWindow:
    lower: float | None
    upper: float | None
    boundary: Boundary
    upper_search: Boundary | None = None

    @property
    def width(self) -> float:
        if self.lower is None or self.upper is None:
            return 0.0
        return self.upper - self.lower


def preserving_window(phi_lo: float, phi_hi: float, tol: float,
                      classify: Callable[[float], WaveClass] | None = None) -> PreservingWindow:
    """Locate the Preserving band between an Expanding ``phi_lo`` and a
    Collapsing ``phi_hi``; both edges to within ``tol``."""
    classify = classify or classify_wave
    b = find_regime_boundary(WaveClass.EXPANDING, WaveClass.COLLAPSING, phi_lo, phi_hi, tol, classify)
    preserving = sorted(p for p, c in b.evaluations if c == WaveClass.PRESERVING)
    if not preserving:
        return PreservingWindow(None, None, b)
    start = preserving[0]
    collapsing = sorted(p for p, c in b.evaluations if c == WaveClass.COLLAPSING and p > start)
    top = collapsing[0] if collapsing else phi_hi
    up = find_regime_boundary(WaveClass.PRESERVING, WaveClass.COLLAPSING, start, top, tol,
                              classify, check_endpoints=False)
    return PreservingWindow(b.hi, up.lo, b, up)


# ------------------------------------------------------------ reachability

@dataclass
class ReachabilityGraph:
    sites: tuple[str, ...]
    edges: frozenset[tuple[str, str]]
    phi: float

    def undirected(self) -> set[frozenset[str]]:
        return {frozenset(e) for e in self.edges}

    def is_complete(self) -> bool:
        n = len(self.sites)
        return len(self.edges) == n * (n - 1)

    def to_text(self) -> str:
        lines = [f"# phi {self.phi:.6f}", "# sites " + " ".join(self.sites)]
        lines += [f"{a} -> {b}" for a, b in sorted(self.edges)]
        return "\n".join(lines) + "\n"


def _stimulate(args):
    mask, stim, params = args
    state = new_state(mask)
    apply(state, stim)
    return run(state, params).ever_excited


def site_disc(shape: tuple[int, int], site, radius: float) -> np.ndarray:
    rr, cc = np.ogrid[:shape[0], :shape[1]]
    return (rr - site[0]) ** 2 + (cc - site[1]) ** 2 <= radius * radius


def reachability(template: Template, phi: float, params: SimParams | None = None,
                 radius: float | None = None, edge: int = 20, jobs: int = 1) -> ReachabilityGraph:
    """Stimulate each labelled site in turn; ``a -> b`` when any node within
    ``radius`` (default: channel width) of ``b`` is ever excited."""
    params = (params or SimParams()).with_phi(phi)
    radius = template.channel_width if radius is None else radius
    labels = tuple(template.sites)
    if len(labels) < 2:
        return ReachabilityGraph(labels, frozenset(), phi)
    mask = template.mask
    tasks = [(mask, StimulusSpec.centered(template.sites[a], edge, label=a), params)
             for a in labels]
    evers = run_parallel(_stimulate, tasks, jobs)
    discs = {b: site_disc(mask.shape, template.sites[b], radius) & mask.excitable for b in labels}
    edges = set()
    for a, ever in zip(labels, evers):
        for b in labels:
            if b != a and (ever & discs[b]).any():
                edges.add((a, b))
    return ReachabilityGraph(labels, frozenset(edges), phi)


def check_commutativity(graph: ReachabilityGraph) -> tuple[bool, list[tuple[str, str]]]:
    bad = sorted((a, b) for a, b in graph.edges if (b, a) not in graph.edges)
    return not bad, bad


# ------------------------------------------------------------------- fits

@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    residual: float  # sum of squared errors

    def __call__(self, x):
        return self.slope * np.asarray(x) + self.intercept


def linear_fit(samples: Iterable[tuple[float, float]]) -> LinearFit:
    """Ordinary least squares ``y = slope * x + intercept``."""
    pts = np.asarray(list(samples), dtype=float)
    if pts.ndim != 2 or len(pts) < 2:
        raise DegenerateInput("need at least two samples")
    x, y = pts[:, 0], pts[:, 1]
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    if sxx == 0.0:
        raise DegenerateInput("all abscissae are equal")
    slope = float(((x - xm) * (y - ym)).sum()) / sxx
    intercept = float(ym - slope * xm)
    resid = float(((y - (slope * x + intercept)) ** 2).sum())
    return LinearFit(slope, intercept, resid)


# --------------------------------------------------------------- angle fan

def entered_branches(template: Template, record: RunRecord | np.ndarray) -> list[int]:
    """Fan branch angles whose outer part was excited at least once."""
    ever = record.ever_excited if isinstance(record, RunRecord) else record
    out = []
    for name, region in template.regions.items():
        if name.startswith("branch_") and (ever & region).any():
            out.append(int(name.split("_", 1)[1]))
    return sorted(out)


def fan_run(template: Template, phi: float, params: SimParams | None = None,
            edge: int = 20) -> RunRecord:
    params = (params or SimParams()).with_phi(phi)
    state = new_state(template.mask)
    apply(state, StimulusSpec.centered(template.sites["N"], edge, label="N"))
    return run(state, params)

