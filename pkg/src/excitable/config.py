"""Run configuration files.

Line-oriented ``key = value`` pairs under section headers::

    [experiment]
    kind = sweep
    output = out/city-sweep

    [template]
    kind = synthetic_city
    width = 512
    seed = 1

    [params]
    phi = 0.05

    [stimulus]
    site = S            # or: origin = 0, 240

    [sweep]
    phi_start = 0.05
    phi_end = 0.08
    phi_step = 0.001

Unset SimParams fields take their defaults (the published constants).
Additional stimuli go in ``[stimulus.<name>]`` sections.
"""

from __future__ import annotations

import configparser
import io
import os
import re
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .errors import ConfigError
from .integrator import SimParams
from .renderer import FrameSpec
from .templates import TemplateSpec

KINDS = ("run", "sweep", "classify", "boundary", "reachability")


@dataclass(frozen=True)
class StimulusEntry:
    site: str | None = None
    origin: tuple[int, int] | None = None
    edge: int = 20
    level: float = 1.0
    name: str = ""


@dataclass(frozen=True)
class SweepSpec:
    phi_start: float = 0.05
    phi_end: float = 0.08
    phi_step: float = 0.001


@dataclass(frozen=True)
class ClassifySpec:
    horizon: int = 15_000
    tolerance: float = 0.02
    phi_lo: float = 0.074
    phi_hi: float = 0.079
    tol: float = 1e-5
    class_low: str = "Expanding"
    class_high: str = "Collapsing"


@dataclass(frozen=True)
class ReachabilitySpec:
    phis: tuple[float, ...] = (0.06, 0.0767, 0.078, 0.079)
    radius: float | None = None


@dataclass(frozen=True)
class RunConfig:
    kind: str = "run"
    output: str = "out"
    jobs: int = 1
    template: TemplateSpec = field(default_factory=TemplateSpec)
    params: SimParams = field(default_factory=SimParams)
    stimuli: tuple[StimulusEntry, ...] = ()
    frames: FrameSpec = field(default_factory=FrameSpec)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    classify: ClassifySpec = field(default_factory=ClassifySpec)
    reachability: ReachabilitySpec = field(default_factory=ReachabilitySpec)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["stimuli"] = [asdict(s) for s in self.stimuli]
        return d


# ------------------------------------------------------------------ parsing

def _line_of(text: str, section: str, key: str) -> int | None:
    current = None
    for n, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"^\[(.+)\]$", s)
        if m:
            current = m.group(1).strip()
        elif current == section and re.match(rf"^{re.escape(key)}\s*[=:]", s):
            return n
    return None


def _convert(value: str, typ, key: str):
    typ = str(typ)
    v = value.strip()
    if v.lower() in ("none", ""):
        if "None" in typ:
            return None
        raise ValueError("value required")
    if typ.startswith("int"):
        return int(v)
    if typ.startswith("float"):
        return float(v)
    if typ.startswith("bool"):
        if v.lower() in ("1", "true", "yes", "on"):
            return True
        if v.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {v!r}")
    if typ.startswith("tuple[int, int]"):
        parts = [p for p in re.split(r"[,\s]+", v) if p]
        if len(parts) != 2:
            raise ValueError(f"expected 'row, col', got {v!r}")
        return int(parts[0]), int(parts[1])
    if typ.startswith("tuple[float"):
        return tuple(float(p) for p in re.split(r"[,\s]+", v) if p)
    if typ.startswith("float | None"):
        return float(v)
    if typ.startswith("int | None"):
        return int(v)
    return v


def _build(cls, items: dict, section: str, text: str):
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, raw in items.items():
        if key not in known:
            raise ConfigError(f"unknown key in [{section}]", key, _line_of(text, section, key))
        try:
            kwargs[key] = _convert(raw, known[key].type, key)
        except ValueError as exc:
            raise ConfigError(str(exc), key, _line_of(text, section, key)) from None
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        bad = next((k for k in kwargs if re.search(rf"\b{k}\b", str(exc))), None)
        line = _line_of(text, section, bad) if bad else None
        raise ConfigError(str(exc), bad, line) from None


def parse_text(text: str, base_dir: str | os.PathLike | None = None) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], line=getattr(exc, "lineno", None)) from None

    sections = set(cp.sections())
    allowed = {"experiment", "template", "params", "frames", "sweep", "classify", "reachability"}
    for s in sections:
        if s not in allowed and s != "stimulus" and not s.startswith("stimulus."):
            raise ConfigError(f"unknown section [{s}]", line=_section_line(text, s))

    exp = dict(cp["experiment"]) if "experiment" in sections else {}
    top = {}
    for key, raw in exp.items():
        if key == "kind":
            if raw.strip() not in KINDS:
                raise ConfigError(f"kind must be one of {KINDS}", key, _line_of(text, "experiment", key))
            top["kind"] = raw.strip()
        elif key == "output":
            top["output"] = raw.strip()
        elif key == "jobs":
            try:
                top["jobs"] = int(raw)
            except ValueError:
                raise ConfigError("jobs must be an integer", key, _line_of(text, "experiment", key)) from None
            if top["jobs"] < 1:
                raise ConfigError("jobs must be >= 1", key, _line_of(text, "experiment", key))
        else:
            raise ConfigError("unknown key in [experiment]", key, _line_of(text, "experiment", key))

    def sec(name, cls):
        return _build(cls, dict(cp[name]), name, text) if name in sections else cls()

    template = sec("template", TemplateSpec)
    if template.kind == "raster" and base_dir is not None and not os.path.isabs(template.path):
        template = replace(template, path=str(Path(base_dir) / template.path))
    if template.kind == "raster" and not Path(template.path).is_file():
        raise ConfigError(f"mask file not found: {template.path}", "path", _line_of(text, "template", "path"))

    stimuli = []
    for s in sorted(sections):
        if s == "stimulus" or s.startswith("stimulus."):
            entry = _build(StimulusEntry, dict(cp[s]), s, text)
            entry = replace(entry, name=s.partition(".")[2])
            if (entry.site is None) == (entry.origin is None):
                raise ConfigError(f"[{s}] needs exactly one of `site` or `origin`", line=_section_line(text, s))
            if entry.edge < 1 or not entry.level > 0:
                raise ConfigError(f"[{s}] needs edge >= 1 and level > 0", line=_section_line(text, s))
            stimuli.append(entry)

    return RunConfig(
        template=template,
        params=sec("params", SimParams),
        stimuli=tuple(stimuli),
        frames=sec("frames", FrameSpec),
        sweep=_check_sweep(sec("sweep", SweepSpec), text),
        classify=sec("classify", ClassifySpec),
        reachability=sec("reachability", ReachabilitySpec),
        **top,
    )


def _check_sweep(sw: SweepSpec, text: str) -> SweepSpec:
    if not sw.phi_step > 0:
        raise ConfigError("phi_step must be > 0", "phi_step", _line_of(text, "sweep", "phi_step"))
    if sw.phi_end < sw.phi_start:
        raise ConfigError("phi_end must be >= phi_start", "phi_end", _line_of(text, "sweep", "phi_end"))
    return sw


def _section_line(text: str, section: str) -> int | None:
    for n, line in enumerate(text.splitlines(), 1):
        if line.strip() == f"[{section}]":
            return n
    return None


def parse_config(path: str | os.PathLike) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_text(path.read_text(), base_dir=path.parent)


# -------------------------------------------------------------- serializing

def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    return str(value)


def serialize(cfg: RunConfig) -> str:
    """Canonical text form; every field is written explicitly."""
    out = io.StringIO()

    def section(name, obj, skip=()):
        out.write(f"[{name}]\n")
        for f in fields(obj):
            if f.name in skip:
                continue
            out.write(f"{f.name} = {_fmt(getattr(obj, f.name))}\n")
        out.write("\n")

    out.write("[experiment]\n")
    out.write(f"kind = {cfg.kind}\noutput = {cfg.output}\njobs = {cfg.jobs}\n\n")
    section("template", cfg.template)
    section("params", cfg.params)
    for s in cfg.stimuli:
        name = f"stimulus.{s.name}" if s.name else "stimulus"
        out.write(f"[{name}]\n")
        if s.site is not None:
            out.write(f"site = {s.site}\n")
        else:
            out.write(f"origin = {s.origin[0]}, {s.origin[1]}\n")
        out.write(f"edge = {s.edge}\nlevel = {_fmt(s.level)}\n\n")
    section("frames", cfg.frames)
    section("sweep", cfg.sweep)
    section("classify", cfg.classify)
    section("reachability", cfg.reachability)
    return out.getvalue()
