"""Command-line runner for the registered experiments.

    lqgnest list
    lqgnest run <experiment> [--config path] [--seed n] [--samples n]
                [--out path] [--format csv|json] [--workers n] [-p key=value ...]

Config files are INI with an ``[experiment]`` section (name, seed, samples,
out, format, workers) and a ``[params]`` section of experiment parameters.
Exit codes: 0 pass, 2 tolerance failure, 1 configuration error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import re
import subprocess
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import __version__
from . import experiments as ex
from .specfun import DomainError

__all__ = ["ConfigError", "ExperimentSpec", "parse_config", "render_config", "run", "list_experiments", "main"]

FORMATS = ("csv", "json")
_SPEC_KEYS = ("name", "seed", "samples", "out", "format", "workers")
_SAMPLE_KEYS = ("n", "n_pilot", "n_tuples", "n_pairs", "draws")


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    samples: int | None = None
    out: str | None = None
    format: str = "json"
    workers: int = 1

    def __post_init__(self):
        if self.name not in ex.REGISTRY:
            raise ConfigError(f"unknown experiment {self.name!r}; run 'lqgnest list'")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        unknown = set(self.params) - set(ex.REGISTRY[self.name].defaults)
        if unknown:
            raise ConfigError(f"unknown parameters for {self.name}: {', '.join(sorted(unknown))}")
        if self.samples is not None and self.samples < 1:
            raise ConfigError("samples must be positive")

    def resolved(self) -> dict:
        """Defaults, then config bindings, then the sample count."""
        prm = dict(ex.REGISTRY[self.name].defaults)
        prm.update(self.params)
        if self.samples is not None:
            key = next((k for k in _SAMPLE_KEYS if k in prm), None)
            if key is None:
                raise ConfigError(f"{self.name} has no sample-count parameter")
            prm[key] = self.samples
        return prm


# ---------------------------------------------------------------------------
# config files


def _coerce(text: str, like=None):
    """Typed value: follows the default's type when known, else int, float, bool, string."""
    t = text.strip()
    if isinstance(like, bool) or (like is None and t.lower() in ("true", "false")):
        if t.lower() in ("true", "yes", "1", "on"):
            return True
        if t.lower() in ("false", "no", "0", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if isinstance(like, int) and not isinstance(like, bool):
        return int(float(t)) if re.fullmatch(r"[+-]?\d+(\.0*)?([eE]\+?\d+)?", t) else int(t)
    if isinstance(like, float):
        return float(t)
    if like is None:
        for cast in (int, float):
            try:
                return cast(t)
            except ValueError:
                pass
    return t


def _prescan(text: str) -> None:
    """Duplicate keys, with both line numbers (configparser reports only one)."""
    seen: dict = {}
    section = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {no}: malformed section header {raw!r}")
            section = line[1:-1].strip()
            continue
        m = re.match(r"([^=:]+?)\s*[=:]", line)
        if not m:
            raise ConfigError(f"line {no}: expected key = value, got {raw!r}")
        if section is None:
            raise ConfigError(f"line {no}: key outside of any section")
        key = (section, m.group(1).strip())
        if key in seen:
            raise ConfigError(f"duplicate key {key[1]!r} in [{section}] at lines {seen[key]} and {no}")
        seen[key] = no


def _key_line(text: str, section: str, key: str) -> int:
    cur = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("["):
            cur = line[1:-1].strip()
        elif cur == section and re.match(rf"{re.escape(key)}\s*[=:]", line):
            return no
    return 0


def parse_config_text(text: str, name: str | None = None) -> ExperimentSpec:
    _prescan(text)
    cp = configparser.ConfigParser(interpolation=None, strict=True)
    cp.optionxform = str  # parameter names are case-sensitive (Lam)
    try:
        cp.read_string(text)
    except configparser.Error as err:
        raise ConfigError(str(err)) from err
    for sec in cp.sections():
        if sec not in ("experiment", "params"):
            no = next((i for i, raw in enumerate(text.splitlines(), 1) if raw.strip() == f"[{sec}]"), 0)
            raise ConfigError(f"line {no}: unknown section [{sec}]")
    exp = dict(cp["experiment"]) if cp.has_section("experiment") else {}
    for k in exp:
        if k not in _SPEC_KEYS:
            raise ConfigError(f"line {_key_line(text, 'experiment', k)}: unknown key {k!r} in [experiment]")
    nm = exp.get("name", name)
    if nm is None:
        raise ConfigError("no experiment name given")
    if name is not None and nm != name:
        raise ConfigError(f"config names experiment {nm!r} but {name!r} was requested")
    if nm not in ex.REGISTRY:
        raise ConfigError(f"unknown experiment {nm!r}; run 'lqgnest list'")
    defaults = ex.REGISTRY[nm].defaults
    params = {}
    if cp.has_section("params"):
        for k, v in cp["params"].items():
            if k not in defaults:
                raise ConfigError(f"line {_key_line(text, 'params', k)}: unknown parameter {k!r} for {nm}")
            try:
                params[k] = _coerce(v, defaults[k])
            except ValueError as err:
                raise ConfigError(f"line {_key_line(text, 'params', k)}: {err}") from err
    try:
        kw = {
            "seed": int(exp["seed"]) if "seed" in exp else 0,
            "samples": int(exp["samples"]) if exp.get("samples", "") not in ("", "none") else None,
            "out": exp.get("out") or None,
            "format": exp.get("format", "json"),
            "workers": int(exp.get("workers", 1)),
        }
    except ValueError as err:
        raise ConfigError(f"[experiment]: {err}") from err
    return ExperimentSpec(nm, params, **kw)


def parse_config(path: str | Path, name: str | None = None) -> ExperimentSpec:
    """Spec from an INI file; an empty file gives the defaults of ``name``."""
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    return parse_config_text(text, name)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v) if isinstance(v, float) else str(v)


def render_config(spec: ExperimentSpec) -> str:
    lines = ["[experiment]", f"name = {spec.name}", f"seed = {spec.seed}"]
    if spec.samples is not None:
        lines.append(f"samples = {spec.samples}")
    if spec.out is not None:
        lines.append(f"out = {spec.out}")
    lines += [f"format = {spec.format}", f"workers = {spec.workers}", "", "[params]"]
    lines += [f"{k} = {_fmt(v)}" for k, v in sorted(spec.params.items())]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# output


def version_string() -> str:
    """Package version plus ``git describe`` of the source tree when available."""
    try:
        here = Path(__file__).resolve().parent
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"], cwd=here, capture_output=True,
                             text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if hasattr(v, "item"):  # numpy scalars
        return _clean(v.item())
    return v


def _csv_text(rows: list) -> str:
    cols: list = []
    for r in rows:
        cols += [k for k in r if k not in cols]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\r\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(_clean(r[k])) if k in r and r[k] is not None else "" for k in cols})
    return buf.getvalue()


def _result_text(spec: ExperimentSpec, prm: dict, outcome: ex.Outcome, version: str) -> str:
    if spec.format == "csv":
        return _csv_text(outcome.rows)
    obj = {"experiment": spec.name, "criterion": ex.REGISTRY[spec.name].criterion, "passed": outcome.passed,
           "provenance": {"params": prm, "seed": spec.seed, "workers": spec.workers, "version": version},
           "summary": outcome.summary, "rows": outcome.rows}
    return json.dumps(_clean(obj), indent=1, sort_keys=False, allow_nan=False) + "\n"


def run(spec: ExperimentSpec, stream=None) -> int:
    """Run one experiment and write its artifacts; returns the exit code.

    The result file depends only on the ExperimentSpec and the source version. Wall
    time goes to the provenance sidecar ``<out>.provenance.json``.
    """
    stream = sys.stdout if stream is None else stream
    try:
        prm = spec.resolved()
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    version = version_string()
    t0 = time.perf_counter()
    try:
        outcome = ex.REGISTRY[spec.name].run(prm, spec.seed, spec.workers)
    except (DomainError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    wall = time.perf_counter() - t0
    text = _result_text(spec, prm, outcome, version)
    prov = {"experiment": spec.name, "passed": outcome.passed, "params": prm, "seed": spec.seed,
            "workers": spec.workers, "version": version, "wall_time_s": round(wall, 3), "summary": outcome.summary}
    if spec.out:
        out = Path(spec.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, newline="")
        Path(str(out) + ".provenance.json").write_text(json.dumps(_clean(prov), indent=1) + "\n")
    else:
        stream.write(text)
    status = "PASS" if outcome.passed else "FAIL"
    print(f"{spec.name}: {status} ({wall:.1f} s, seed {spec.seed}, {version})", file=sys.stderr)
    return 0 if outcome.passed else 2


def list_experiments() -> list:
    return [(e.criterion, e.name, e.description) for e in (ex.REGISTRY[n] for n in ex.names())]


# ---------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lqgnest", description="Run the lqgnest experiments.")
    sub = ap.add_subparsers(dest="cmd", required=True)
    sub.add_parser("list", help="show the registered experiments")
    r = sub.add_parser("run", help="run one experiment")
    r.add_argument("experiment")
    r.add_argument("--config")
    r.add_argument("--seed", type=int)
    r.add_argument("--samples", type=int)
    r.add_argument("--out")
    r.add_argument("--format", choices=FORMATS)
    r.add_argument("--workers", type=int)
    r.add_argument("-p", "--param", action="append", default=[], metavar="KEY=VALUE")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.cmd == "list":
        for crit, name, desc in list_experiments():
            print(f"{crit:>3}  {name:<26} {desc}")
        return 0
    try:
        if args.config:
            spec = parse_config(args.config, args.experiment)
        else:
            spec = ExperimentSpec(args.experiment)
        over = {k: v for k, v in (("seed", args.seed), ("samples", args.samples), ("out", args.out),
                                  ("format", args.format), ("workers", args.workers)) if v is not None}
        params = dict(spec.params)
        defaults = ex.REGISTRY[spec.name].defaults
        for item in args.param:
            k, sep, v = item.partition("=")
            k = k.strip()
            if not sep or k not in defaults:
                raise ConfigError(f"bad parameter binding {item!r}")
            params[k] = _coerce(v, defaults[k])
        spec = replace(spec, params=params, **over)
    except (ConfigError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return run(spec)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
