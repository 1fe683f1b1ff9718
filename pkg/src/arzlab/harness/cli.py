"""Command-line entry point: ``arzlab list`` and ``arzlab run``."""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import traceback
from importlib import resources
from pathlib import Path

import numpy as np

from .. import __version__
from ..errors import ConfigurationError
from .config import ExperimentConfig, load_config
from .experiments import REGISTRY, Context, Outputs
from .plotting import field_plot, line_plot


def source_hash() -> str:
    """SHA-256 over the package sources, in sorted path order."""
    h = hashlib.sha256()
    root = resources.files("arzlab")
    for path in sorted(Path(str(root)).rglob("*.py")):
        h.update(path.relative_to(Path(str(root))).as_posix().encode())
        h.update(path.read_bytes())
    return h.hexdigest()


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v)) if math.isfinite(v) else str(float(v))
    return str(v)


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def _write_dat(path: Path, series) -> None:
    """gnuplot data file: one block per series, separated by two blank lines."""
    with path.open("w") as fh:
        for i, (x, y, label) in enumerate(series):
            if i:
                fh.write("\n\n")
            fh.write(f"# {label}\n")
            for a, b in zip(np.asarray(x, float), np.asarray(y, float)):
                fh.write(f"{a!r} {b!r}\n")


def write_outputs(cfg: ExperimentConfig, out: Outputs, error: str | None = None) -> Path:
    d = Path(cfg.output_dir) / cfg.experiment
    d.mkdir(parents=True, exist_ok=True)
    files = []
    _write_csv(d / "checks.csv", ["check", "passed", "value", "bound", "detail"],
               [[c.name, c.passed, c.value, c.bound, c.detail] for c in out.checks])
    files.append("checks.csv")
    for name, (header, rows) in sorted(out.tables.items()):
        _write_csv(d / f"{name}.csv", header, rows)
        files.append(f"{name}.csv")
    for name, fld in sorted(out.fields.items()):
        fld.save(d / f"{name}.grid")
        files.append(f"{name}.grid")
    for fig in out.figures:
        if fig.kind == "line":
            _write_dat(d / f"{fig.name}.dat", fig.series)
            line_plot(d / f"{fig.name}.png", fig.series, fig.xlabel, fig.ylabel, fig.title, fig.logx, fig.logy)
            files += [f"{fig.name}.dat", f"{fig.name}.png"]
        else:
            field_plot(d / f"{fig.name}.png", fig.fld, fig.title)
            files.append(f"{fig.name}.png")
    (d / "config.ini").write_text(cfg.resolved_text())
    files.append("config.ini")
    manifest = {
        "experiment": cfg.experiment,
        "config_source": cfg.source,
        "seed": cfg.seed,
        "version": __version__,
        "source_sha256": source_hash(),
        "config": {s: dict(sorted(v.items())) for s, v in sorted(cfg.sections.items())},
        "checks": {c.name: c.passed for c in out.checks},
        "passed": error is None and all(c.passed for c in out.checks),
        "error": error,
        "files": sorted(files),
    }
    (d / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return d


def run_one(cfg: ExperimentConfig, jobs: int = 1, stream=None) -> bool:
    """Run one experiment, write its outputs and report. Returns overall pass."""
    stream = sys.stdout if stream is None else stream
    exp = REGISTRY[cfg.experiment]
    missing = [s for s in exp.required if s not in cfg.sections]
    out = Outputs()
    error = None
    if missing:
        error = f"missing required sections: {', '.join(missing)}"
    else:
        try:
            out = exp.run(cfg, Context(seed=cfg.seed, jobs=jobs))
        except Exception as exc:  # reported as a failed check, not a crash
            error = f"{type(exc).__name__}: {exc}"
            traceback.print_exc(file=sys.stderr)
    if error is not None:
        out.check("completed", False, math.nan, "no error", error)
    d = write_outputs(cfg, out, error)
    ok = error is None and all(c.passed for c in out.checks)
    for c in out.checks:
        print(f"  {'PASS' if c.passed else 'FAIL'} {c.name}: {_fmt(c.value)} ({c.bound}) {c.detail}".rstrip(),
              file=stream)
    print(f"{cfg.experiment}: {'PASS' if ok else 'FAIL'} -> {d}", file=stream)
    return ok


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="arzlab", description="Verification experiments for the relaxed ARZ model.")
    p.add_argument("--version", action="version", version=f"arzlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list registered experiments")
    r = sub.add_parser("run", help="run experiments from config files or by name")
    r.add_argument("configs", nargs="+", help="config file paths or experiment names")
    r.add_argument("--jobs", type=int, default=1, help="worker threads inside an experiment")
    r.add_argument("--output-dir", default=None, help="override the output root")
    r.add_argument("--seed", type=int, default=None, help="override the random seed")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for name in sorted(REGISTRY):
            e = REGISTRY[name]
            print(f"{name:24s} {e.description}  [requires: {', '.join(e.required)}]")
        return 0
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        cfgs = [load_config(c, args.seed, args.output_dir) for c in args.configs]
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    ok = True
    for cfg in cfgs:
        ok &= run_one(cfg, args.jobs)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
