"""Experiment configuration files.

A config is an INI file.  ``[experiment] name`` selects the experiment; the
other sections hold model parameters, grids, initial data and options.  A
user config is layered over the shipped default for the same experiment, so
it only needs the keys it changes.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from ..arz import ArzParams, pressure_from_name
from ..dwe import GridSpec
from ..errors import ConfigurationError
from ..kernel import DampedWaveCoeffs
from ..profiles import Profile, make_profile, zero


def default_config_text(name: str) -> str:
    path = resources.files("arzlab.harness") / "defaults" / f"{name}.ini"
    if not path.is_file():
        raise ConfigurationError(f"no shipped default config for {name!r}")
    return path.read_text()


def _parser() -> configparser.ConfigParser:
    p = configparser.ConfigParser(interpolation=None)
    p.optionxform = str  # keep key case
    return p


@dataclass
class ExperimentConfig:
    """Resolved configuration: the experiment name plus raw string sections."""

    experiment: str
    sections: dict[str, dict[str, str]]
    seed: int = 0
    output_dir: Path = Path("results")
    source: str = "<defaults>"

    # --- typed accessors -----------------------------------------------------
    def raw(self, section: str, key: str, default: Any = None) -> str | None:
        return self.sections.get(section, {}).get(key, default)

    def _typed(self, section, key, default, conv, kind):
        val = self.raw(section, key)
        if val is None:
            if default is _REQUIRED:
                raise ConfigurationError(f"missing [{section}] {key}")
            return default
        try:
            return conv(val)
        except ValueError as exc:
            raise ConfigurationError(f"[{section}] {key} = {val!r} is not a valid {kind}") from exc

    def float(self, section: str, key: str, default: Any = None) -> float:
        return self._typed(section, key, _REQUIRED if default is None else default, float, "number")

    def int(self, section: str, key: str, default: Any = None) -> int:
        return self._typed(section, key, _REQUIRED if default is None else default, int, "integer")

    def str(self, section: str, key: str, default: Any = None) -> str:
        return self._typed(section, key, _REQUIRED if default is None else default, str.strip, "string")

    def floats(self, section: str, key: str, default: Any = None) -> list[float]:
        def conv(s):
            return [float(v) for v in s.replace(",", " ").split()]
        return self._typed(section, key, _REQUIRED if default is None else default, conv, "number list")

    def bool(self, section: str, key: str, default: Any = None) -> bool:
        def conv(s):
            s = s.strip().lower()
            if s in ("1", "yes", "true", "on"):
                return True
            if s in ("0", "no", "false", "off"):
                return False
            raise ValueError(s)
        return self._typed(section, key, _REQUIRED if default is None else default, conv, "boolean")

    # --- domain objects ------------------------------------------------------
    def arz_params(self, section: str = "params") -> ArzParams:
        law = pressure_from_name(self.str(section, "pressure", "log"),
                                 self.float(section, "pressure_c", 1.0),
                                 self.float(section, "pressure_gamma", 1.0))
        return ArzParams(self.float(section, "rho0"), self.float(section, "uf"),
                         self.float(section, "tau"), law)

    def coeffs(self, section: str = "coeffs") -> DampedWaveCoeffs:
        try:
            return DampedWaveCoeffs(self.float(section, "lambda1"), self.float(section, "lambda2"),
                                    self.float(section, "delta"))
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from exc

    def grid(self, section: str = "grid") -> GridSpec:
        return GridSpec(self.float(section, "x_min"), self.float(section, "x_max"),
                        self.float(section, "dx"), self.float(section, "t_end"),
                        self.float(section, "dt"))

    def profile(self, section: str) -> Profile:
        if section not in self.sections:
            return zero()
        try:
            return make_profile(self.str(section, "family", "gaussian"),
                                self.float(section, "amplitude", 0.0),
                                self.floats(section, "centers", [0.0]),
                                self.float(section, "width", 1.0),
                                self.float(section, "separation", 0.0))
        except ValueError as exc:
            raise ConfigurationError(f"[{section}]: {exc}") from exc

    def resolved_text(self) -> str:
        p = _parser()
        for sec in sorted(self.sections):
            p[sec] = dict(sorted(self.sections[sec].items()))
        lines = []
        for sec in p.sections():
            lines.append(f"[{sec}]")
            lines.extend(f"{k} = {v}" for k, v in p[sec].items())
            lines.append("")
        return "\n".join(lines)


_REQUIRED = object()


def _read(text: str, origin: str) -> configparser.ConfigParser:
    p = _parser()
    try:
        p.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config {origin}: {exc}") from exc
    return p


def load_config(source: str | Path, seed: int | None = None,
                output_dir: str | Path | None = None) -> ExperimentConfig:
    """Load a config file, or the shipped default when ``source`` is an experiment name."""
    from .experiments import REGISTRY

    src = str(source)
    if src in REGISTRY:
        text, origin = default_config_text(src), f"<default:{src}>"
    else:
        path = Path(src)
        if not path.is_file():
            raise ConfigurationError(f"{src!r} is neither a config file nor a registered experiment")
        text, origin = path.read_text(), str(path)
    user = _read(text, origin)
    name = user.get("experiment", "name", fallback=None)
    if name is None:
        raise ConfigurationError(f"{origin}: missing [experiment] name")
    name = name.strip()
    if name not in REGISTRY:
        raise ConfigurationError(f"unknown experiment {name!r}")
    base = _read(default_config_text(name), f"<default:{name}>")
    sections: dict[str, dict[str, str]] = {s: dict(base[s]) for s in base.sections()}
    for s in user.sections():
        sections.setdefault(s, {}).update(dict(user[s]))
    run_seed = seed if seed is not None else int(sections.get("run", {}).get("seed", "0"))
    sections.setdefault("run", {})["seed"] = str(run_seed)
    out = Path(output_dir) if output_dir is not None else Path(sections.get("run", {}).get("output_dir", "results"))
    return ExperimentConfig(name, sections, run_seed, out, origin)
