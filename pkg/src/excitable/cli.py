"""``excitable`` command line: run, sweep, classify, boundary, reachability,
gen-template.

Every experiment writes into its output directory:

- ``manifest.json``  resolved config, seed, package version, results
- ``config.ini``     the resolved config in canonical text form
- ``series.csv``     ``step,excited_count`` (integers)
- ``coverage.csv``   ``phi,coverage,termination,steps_taken`` (sweeps;
                     phi and coverage with 6 decimals)
- ``edges.txt``      reachability edge lists, one block per phi
- ``timelapse.pgm``  overlay of displayed sets (sweeps: montage in phi order)

Exit codes: 0 success, 2 config error, 3 numerical blowup, 4 geometry error,
1 any other failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import __version__, pnm
from .analysis import (WaveClass, check_commutativity, classify_trace, find_regime_boundary,
                       preserving_window, reachability, trace_fragment)
from .config import KINDS, RunConfig, parse_config, serialize
from .errors import (ConfigError, EmptyMask, ExcitableError, GeometryOverflow, NumericalBlowup,
                     ParseError, VoidStimulus, ZeroStreets)
from .integrator import SimParams, run
from .lattice import new_state
from .metrics import RunRecord, phi_grid, run_parallel
from .renderer import TimelapseRecorder, montage
from .stimulus import StimulusSpec, apply
from .templates import Template, TemplateSpec, build, save_raster

EXIT_OK, EXIT_OTHER, EXIT_CONFIG, EXIT_BLOWUP, EXIT_GEOMETRY = 0, 1, 2, 3, 4


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, NumericalBlowup):
        return EXIT_BLOWUP
    if isinstance(exc, (GeometryOverflow, VoidStimulus, EmptyMask, ZeroStreets, ParseError)):
        return EXIT_GEOMETRY
    return EXIT_OTHER


# ------------------------------------------------------------------ helpers

def resolve_stimuli(config: RunConfig, template: Template) -> list[StimulusSpec]:
    """Config stimuli as concrete squares; default is the template's first site."""
    out = []
    for s in config.stimuli:
        if s.site is not None:
            if s.site not in template.sites:
                raise ConfigError(f"template has no site {s.site!r} (sites: {sorted(template.sites)})",
                                  "site")
            out.append(StimulusSpec.centered(template.sites[s.site], s.edge, s.level, s.site))
        else:
            out.append(StimulusSpec(s.origin, s.edge, s.level, s.name or None))
    if not out:
        if not template.sites:
            raise ConfigError("no stimulus given and the template has no labelled site", "stimulus")
        label = next(iter(template.sites))
        out.append(StimulusSpec.centered(template.sites[label], label=label))
    return out


def write_series(path: Path, steps, counts) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("step,excited_count\n")
        for s, c in zip(steps, counts):
            fh.write(f"{int(s)},{int(c)}\n")


def write_coverage(path: Path, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("phi,coverage,termination,steps_taken\n")
        for phi, cov, term, steps in rows:
            fh.write(f"{phi:.6f},{cov:.6f},{term},{int(steps)}\n")


def write_manifest(out: Path, config: RunConfig, results: dict) -> None:
    manifest = {
        "version": __version__,
        "kind": config.kind,
        "seed": config.template.seed,
        "config": config.to_dict(),
        **results,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    (out / "config.ini").write_text(serialize(config))


def _single_run(args) -> tuple[RunRecord, np.ndarray]:
    mask, stimuli, params, frames, frame_dir = args
    state = new_state(mask)
    for s in stimuli:
        apply(state, s)
    recorder = TimelapseRecorder(mask, frames, frame_dir)
    try:
        record = run(state, params, recorder.observers())
    except ExcitableError as exc:
        exc.phi = params.phi
        raise
    return record, recorder.image()


# -------------------------------------------------------------- experiments

def execute(config: RunConfig) -> dict:
    """Run the experiment described by ``config``; returns the manifest
    results. Raises module errors unchanged."""
    out = Path(config.output)
    out.mkdir(parents=True, exist_ok=True)
    handler = {"run": _exec_run, "sweep": _exec_sweep, "classify": _exec_classify,
               "boundary": _exec_boundary, "reachability": _exec_reachability}[config.kind]
    results = handler(config, out)
    write_manifest(out, config, results)
    return results


def _exec_run(config: RunConfig, out: Path) -> dict:
    template = build(config.template)
    stimuli = resolve_stimuli(config, template)
    frame_dir = out / "frames" if config.frames.save_frames else None
    record, image = _single_run((template.mask, stimuli, config.params, config.frames, frame_dir))
    write_series(out / "series.csv", record.sample_steps, record.excited_count_series)
    pnm.write_pgm(out / "timelapse.pgm", image)
    return {
        "termination": str(record.termination),
        "steps_taken": record.steps_taken,
        "coverage": record.coverage,
        "n_excitable": template.mask.n_excitable,
        "stimuli": [asdict(s) for s in stimuli],
    }


def _exec_sweep(config: RunConfig, out: Path) -> dict:
    template = build(config.template)
    stimuli = resolve_stimuli(config, template)
    sw = config.sweep
    phis = phi_grid(sw.phi_start, sw.phi_end, sw.phi_step)
    tasks = [(template.mask, stimuli, config.params.with_phi(phi), config.frames, None)
             for phi in phis]
    results = run_parallel(_single_run, tasks, config.jobs)
    rows = []
    for phi, (record, image) in zip(phis, results):
        rows.append((phi, record.coverage, str(record.termination), record.steps_taken))
        sub = out / "runs" / f"phi_{phi:.6f}"
        sub.mkdir(parents=True, exist_ok=True)
        write_series(sub / "series.csv", record.sample_steps, record.excited_count_series)
        pnm.write_pgm(sub / "timelapse.pgm", image)
    write_coverage(out / "coverage.csv", rows)
    pnm.write_pgm(out / "timelapse.pgm", montage([img for _, img in results]))
    return {
        "termination": {f"{phi:.6f}": t for phi, _, t, _ in rows},
        "points": [{"phi": p, "coverage": c, "termination": t, "steps_taken": s}
                   for p, c, t, s in rows],
        "n_excitable": template.mask.n_excitable,
    }


def _field_dims(config: RunConfig) -> tuple[int, int]:
    t = config.template
    if t.kind != "open_field":
        raise ConfigError("classify/boundary need an open_field template", "kind")
    w = t.width or 400
    return (t.height or w, w)


def _fragment_stimulus(config: RunConfig) -> StimulusSpec | None:
    for s in config.stimuli:
        if s.origin is not None:
            return StimulusSpec(s.origin, s.edge, s.level)
    return None


def _exec_classify(config: RunConfig, out: Path) -> dict:
    dims = _field_dims(config)
    cl = config.classify
    trace = trace_fragment(config.params.phi, dims, _fragment_stimulus(config), cl.horizon,
                           config.params)
    write_series(out / "series.csv", trace.steps, trace.areas)
    result = classify_trace(trace, cl.tolerance)
    return {
        "termination": "Extinguished" if trace.extinct_at is not None else "Horizon",
        "phi": config.params.phi,
        "wave_class": str(result.wave_class),
        "slope": result.slope,
        "threshold": result.threshold,
        "mean_area": result.mean_area,
        "samples": result.samples,
    }


def _exec_boundary(config: RunConfig, out: Path) -> dict:
    dims = _field_dims(config)
    cl = config.classify
    stim = _fragment_stimulus(config)
    try:
        lo_cls, hi_cls = WaveClass(cl.class_low), WaveClass(cl.class_high)
    except ValueError as exc:
        raise ConfigError(str(exc), "class_low") from None

    def classify(phi):
        return classify_trace(trace_fragment(phi, dims, stim, cl.horizon, config.params),
                              cl.tolerance).wave_class

    result = {"termination": "Converged"}
    if (lo_cls, hi_cls) == (WaveClass.EXPANDING, WaveClass.COLLAPSING):
        win = preserving_window(cl.phi_lo, cl.phi_hi, cl.tol, classify)
        b = win.boundary
        evals = b.evaluations + (win.upper_search.evaluations if win.upper_search else [])
        result["preserving_window"] = [win.lower, win.upper]
        result["preserving_width"] = win.width
    else:
        b = find_regime_boundary(lo_cls, hi_cls, cl.phi_lo, cl.phi_hi, cl.tol, classify)
        evals = b.evaluations
    with open(out / "boundary.csv", "w", newline="\n") as fh:
        fh.write("phi,wave_class\n")
        for phi, c in evals:
            fh.write(f"{phi:.9f},{c}\n")
    result.update(boundary=b.phi, lo=b.lo, hi=b.hi, class_above=str(b.class_hi))
    return result


def _exec_reachability(config: RunConfig, out: Path) -> dict:
    template = build(config.template)
    edge = config.stimuli[0].edge if config.stimuli else 20
    blocks, graphs = [], []
    for phi in config.reachability.phis:
        g = reachability(template, phi, config.params, config.reachability.radius, edge,
                         config.jobs)
        ok, bad = check_commutativity(g)
        blocks.append(g.to_text())
        graphs.append({"phi": phi, "edges": sorted(list(e) for e in g.edges),
                       "symmetric": ok, "asymmetric": [list(p) for p in bad],
                       "complete": g.is_complete()})
    (out / "edges.txt").write_text("\n".join(blocks))
    return {"termination": "Completed", "sites": {k: list(v) for k, v in template.sites.items()},
            "graphs": graphs}


def gen_template(spec: TemplateSpec, out: Path) -> Template:
    """Write ``mask.pbm`` and ``template.json`` (sites, meta) for a template."""
    t = build(spec)
    out.mkdir(parents=True, exist_ok=True)
    save_raster(out / "mask.pbm", t.mask)
    info = {"kind": t.kind, "shape": list(t.mask.shape), "n_excitable": t.mask.n_excitable,
            "channel_width": t.channel_width,
            "sites": {k: list(v) for k, v in t.sites.items()}, "meta": t.meta}
    (out / "template.json").write_text(json.dumps(info, indent=2, sort_keys=True) + "\n")
    return t


# --------------------------------------------------------------------- main

def _jobs_default() -> int | None:
    env = os.environ.get("EXCITABLE_THREADS")
    if env is None:
        return None
    try:
        n = int(env)
    except ValueError:
        raise ConfigError(f"EXCITABLE_THREADS must be an integer, got {env!r}") from None
    if n < 1:
        raise ConfigError("EXCITABLE_THREADS must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="excitable", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in KINDS:
        sp = sub.add_parser(name, help=f"{name} experiment from a config file")
        sp.add_argument("--config", required=True, help="experiment config (key = value sections)")
        sp.add_argument("--out", help="output directory (overrides the config)")
        sp.add_argument("--jobs", type=int, help="worker processes (default: $EXCITABLE_THREADS or config)")
        sp.add_argument("--phi", type=float, help="override params.phi")
        sp.add_argument("--seed", type=int, help="override template seed")
    gp = sub.add_parser("gen-template", help="write a template mask and its site table")
    gp.add_argument("--config", help="take the [template] section from this config")
    gp.add_argument("--kind", default="synthetic_city", choices=TemplateSpec.KINDS)
    gp.add_argument("--width", type=int)
    gp.add_argument("--height", type=int)
    gp.add_argument("--seed", type=int)
    gp.add_argument("--out", default="template")
    gp.add_argument("--jobs", type=int, help=argparse.SUPPRESS)
    gp.add_argument("--phi", type=float, help=argparse.SUPPRESS)
    return p


def _apply_overrides(config: RunConfig, args) -> RunConfig:
    changes = {"kind": args.command}
    if args.out:
        changes["output"] = args.out
    jobs = args.jobs if args.jobs is not None else _jobs_default()
    if jobs is not None:
        if jobs < 1:
            raise ConfigError("--jobs must be >= 1", "jobs")
        changes["jobs"] = jobs
    if args.phi is not None:
        try:
            changes["params"] = config.params.with_phi(args.phi)
        except ValueError as exc:
            raise ConfigError(str(exc), "phi") from None
    if args.seed is not None:
        changes["template"] = replace(config.template, seed=args.seed)
    return replace(config, **changes)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen-template":
            if args.config:
                spec = parse_config(args.config).template
            else:
                spec = TemplateSpec(kind=args.kind, width=args.width, height=args.height)
            if args.seed is not None:
                spec = replace(spec, seed=args.seed)
            t = gen_template(spec, Path(args.out))
            print(f"{t.kind}: {t.mask.shape[0]}x{t.mask.shape[1]}, "
                  f"{t.mask.n_excitable} excitable nodes -> {args.out}")
            return EXIT_OK
        config = _apply_overrides(parse_config(args.config), args)
        results = execute(config)
        print(f"{config.kind}: {results.get('termination')} -> {config.output}")
        return EXIT_OK
    except (ExcitableError, ValueError, OSError) as exc:
        code = exit_code(exc) if isinstance(exc, ExcitableError) else EXIT_OTHER
        where = f" (phi={exc.phi})" if getattr(exc, "phi", None) is not None else ""
        print(f"error: {type(exc).__name__}{where}: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
