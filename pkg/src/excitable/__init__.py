"""Oregonator excitable-medium simulation on masked lattices."""

__version__ = "0.1.0"

from .errors import (BadBracket, ConfigError, DegenerateInput, EmptyMask, ExcitableError,
                     GeometryOverflow, Inconclusive, NumericalBlowup, ParseError,
                     VoidStimulus, ZeroStreets)
from .integrator import Every, SimParams, advance, run, step
from .lattice import DomainMask, MediumState, laplacian_u, new_state
from .metrics import RunRecord, SweepPoint, Termination, coverage, coverage_sweep
from .stimulus import StimulusSpec, apply

__all__ = [
    "BadBracket", "ConfigError", "DegenerateInput", "DomainMask", "EmptyMask", "Every",
    "ExcitableError", "GeometryOverflow", "Inconclusive", "MediumState", "NumericalBlowup",
    "ParseError", "RunRecord", "SimParams", "StimulusSpec", "SweepPoint", "Termination",
    "VoidStimulus", "ZeroStreets", "advance", "apply", "coverage", "coverage_sweep",
    "laplacian_u", "new_state", "run", "step",
]
