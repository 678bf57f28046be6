"""Sweep configuration: schema, defaults, file loading and validation.

The file is YAML (JSON is accepted too, being a subset). Every key is
optional; unknown keys are rejected. Layout::

    model:
      site_energies: [1.0, 1.0, 1.0]   # E_alpha - mu, units of k_B T
      couplings: [0.5, 0.5, 0.5]       # gamma_alpha
      hopping: 1.0                     # t'
      temperature: 1.0
      mu: 0.0
    grids:
      phi:        {start: 0.05, stop: 6.2331853, count: 80}
      delta:      {start: 0.05, stop: 2.0, count: 80}
      epsilon:    {start: 0.01, stop: 1.99, count: 100}
      power_gain: {start: -1.0, stop: 0.0, count: 101}
      x:          {start: -5.0, stop: 5.0, count: 401}
      d_values:   [0.1, 0.5, 1.0, 3.0, 5.0]            # figure 3/4 panels
      h_d_values: [-5, -3, -1, -0.5, -0.1, 0.1, 0.5, 1, 3, 5]   # figure 2
      y_values:   [0.5, 1, 2, 5, 10, 50]
      force_scales: [0.001]            # X_L^T values of the sweep
    sweep:
      regimes: [L, P, LP, REFRIGERATOR]
      branch: plus
    quadrature: {window: 40.0, tol: 1.0e-10}
    output: {format: csv, path: null}
    workers: 1
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field, replace

import numpy as np
import yaml

from ..dotring import DotRingModel
from ..errors import ConfigError
from ..labels import Branch, Regime

WORKERS_ENV = "PROBE_ENGINE_WORKERS"
FORMATS = ("csv", "json")


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    count: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class ModelParams:
    site_energies: tuple = (1.0, 1.0, 1.0)
    couplings: tuple = (0.5, 0.5, 0.5)
    hopping: float = 1.0
    temperature: float = 1.0
    mu: float = 0.0

    def build(self, phi: float = 0.0, field: int = 1) -> DotRingModel:
        return DotRingModel(
            site_energies=tuple(self.site_energies),
            couplings=tuple(self.couplings),
            hopping=self.hopping,
            phi=float(phi),
            field=field,
            temperature=self.temperature,
            mu=self.mu,
        )


@dataclass(frozen=True)
class Grids:
    phi: GridSpec = GridSpec(0.05, 2 * math.pi - 0.05, 80)
    delta: GridSpec = GridSpec(0.05, 2.0, 80)
    epsilon: GridSpec = GridSpec(0.01, 1.99, 100)
    power_gain: GridSpec = GridSpec(-1.0, 0.0, 101)
    x: GridSpec = GridSpec(-5.0, 5.0, 401)
    d_values: tuple = (0.1, 0.5, 1.0, 3.0, 5.0)
    h_d_values: tuple = (-5.0, -3.0, -1.0, -0.5, -0.1, 0.1, 0.5, 1.0, 3.0, 5.0)
    y_values: tuple = (0.5, 1.0, 2.0, 5.0, 10.0, 50.0)
    force_scales: tuple = (1e-3,)


@dataclass(frozen=True)
class Quadrature:
    window: float = 40.0
    tol: float = 1e-10


@dataclass(frozen=True)
class Output:
    format: str = "csv"
    path: str | None = None


@dataclass(frozen=True)
class SweepConfig:
    model: ModelParams = field(default_factory=ModelParams)
    grids: Grids = field(default_factory=Grids)
    regimes: tuple = ("L", "P", "LP", "REFRIGERATOR")
    branch: str = "plus"
    quadrature: Quadrature = field(default_factory=Quadrature)
    output: Output = field(default_factory=Output)
    workers: int = 1

    def to_dict(self) -> dict:
        d = asdict(self)
        sweep = {"regimes": list(d.pop("regimes")), "branch": d.pop("branch")}
        d["sweep"] = sweep
        return _listify(d)

    def numeric_dict(self) -> dict:
        """Settings that affect computed values (no output or worker options)."""
        d = self.to_dict()
        d.pop("output")
        d.pop("workers")
        return d

    def fingerprint(self) -> str:
        """Short content hash of the numerically relevant settings."""
        d = self.numeric_dict()
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _listify(obj):
    if isinstance(obj, dict):
        return {k: _listify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_listify(v) for v in obj]
    return obj


# --------------------------------------------------------------------------
# Loading
# --------------------------------------------------------------------------


_SECTIONS = {
    "model": ("site_energies", "couplings", "hopping", "temperature", "mu"),
    "grids": tuple(Grids.__dataclass_fields__),
    "sweep": ("regimes", "branch"),
    "quadrature": ("window", "tol"),
    "output": ("format", "path"),
}
_GRID_SPECS = ("phi", "delta", "epsilon", "power_gain", "x")


def default_config() -> SweepConfig:
    cfg = SweepConfig()
    env = os.environ.get(WORKERS_ENV)
    if env is not None:
        try:
            cfg = replace(cfg, workers=int(env))
        except ValueError:
            raise ConfigError([(WORKERS_ENV, f"not an integer: {env!r}")]) from None
    return cfg


def merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], value)
        else:
            out[key] = value
    return out


def load_file(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError([("--config", f"cannot read {path}: {exc.strerror}")]) from None
    except yaml.YAMLError as exc:
        raise ConfigError([("--config", f"cannot parse {path}: {exc}")]) from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError([("--config", "top level must be a mapping")])
    return data


def parse_assignment(text: str) -> dict:
    """``a.b.c=value`` -> {'a': {'b': {'c': value}}} with a YAML-parsed value."""
    if "=" not in text:
        raise ConfigError([("--set", f"expected key=value, got {text!r}")])
    key, raw = text.split("=", 1)
    value = yaml.safe_load(raw)
    out: dict = value
    for part in reversed(key.strip().split(".")):
        out = {part: out}
    return out


def from_mapping(data: dict) -> SweepConfig:
    """Build and validate a config; collects every problem before raising."""
    problems: list[tuple[str, str]] = []
    base = default_config()
    cfg = base.to_dict()

    for key in data:
        if key not in (*_SECTIONS, "workers"):
            problems.append((key, "unknown key"))
    for section, keys in _SECTIONS.items():
        sub = data.get(section, {})
        if sub is None:
            continue
        if not isinstance(sub, dict):
            problems.append((section, "must be a mapping"))
            continue
        for key in sub:
            if key not in keys:
                problems.append((f"{section}.{key}", "unknown key"))
    if problems:
        raise ConfigError(problems)

    cfg = merge(cfg, {k: v for k, v in data.items() if v is not None})
    m, g, q, o, s = cfg["model"], cfg["grids"], cfg["quadrature"], cfg["output"], cfg["sweep"]

    def number(path, value, positive=False, integer=False):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        if ok and integer:
            ok = float(value).is_integer()
        if not ok or not math.isfinite(float(value)):
            problems.append((path, f"expected a finite {'integer' if integer else 'number'}, got {value!r}"))
            return None
        if positive and not value > 0:
            problems.append((path, f"must be positive, got {value!r}"))
            return None
        return int(value) if integer else float(value)

    def triple(path, value, positive=False):
        if not isinstance(value, (list, tuple)) or len(value) != 3:
            problems.append((path, "expected a list of three numbers"))
            return None
        vals = [number(f"{path}[{i}]", v, positive=positive) for i, v in enumerate(value)]
        return None if None in vals else tuple(vals)

    def numbers(path, value, nonempty=True):
        if not isinstance(value, (list, tuple)) or (nonempty and not value):
            problems.append((path, "expected a non-empty list of numbers"))
            return None
        vals = [number(f"{path}[{i}]", v) for i, v in enumerate(value)]
        return None if None in vals else tuple(vals)

    model = ModelParams(
        site_energies=triple("model.site_energies", m["site_energies"]),
        couplings=triple("model.couplings", m["couplings"], positive=True),
        hopping=number("model.hopping", m["hopping"]),
        temperature=number("model.temperature", m["temperature"], positive=True),
        mu=number("model.mu", m["mu"]),
    )

    specs = {}
    for name in _GRID_SPECS:
        raw = g[name]
        path = f"grids.{name}"
        if not isinstance(raw, dict) or set(raw) - {"start", "stop", "count"}:
            problems.append((path, "expected {start, stop, count}"))
            continue
        start = number(f"{path}.start", raw.get("start"))
        stop = number(f"{path}.stop", raw.get("stop"))
        count = number(f"{path}.count", raw.get("count"), integer=True)
        if None in (start, stop, count):
            continue
        if count < 2:
            problems.append((f"{path}.count", "must be >= 2"))
        if not start < stop:
            problems.append((path, "range is degenerate: need start < stop"))
        specs[name] = GridSpec(start, stop, count)
    if "power_gain" in specs:
        pg = specs["power_gain"]
        if pg.start < -1 or pg.stop > 0:
            problems.append(("grids.power_gain", "must lie within [-1, 0]"))
    if "epsilon" in specs:
        ep = specs["epsilon"]
        if ep.start <= 0 or ep.stop >= 2:
            problems.append(("grids.epsilon", "must lie strictly inside (0, 2)"))
    if "delta" in specs and specs["delta"].start <= 0 < specs["delta"].stop:
        problems.append(("grids.delta", "must not contain delta = 0"))

    scales = numbers("grids.force_scales", g["force_scales"])
    if scales and any(v == 0 for v in scales):
        problems.append(("grids.force_scales", "X_L^T must be nonzero"))

    regimes = s["regimes"]
    if not isinstance(regimes, (list, tuple)) or not regimes:
        problems.append(("sweep.regimes", "expected a non-empty list"))
        regimes = ()
    for r in regimes:
        try:
            Regime(str(r))
        except ValueError:
            problems.append(("sweep.regimes", f"unknown regime {r!r}"))
    try:
        branch = Branch.parse(s["branch"]).value
    except ValueError as exc:
        problems.append(("sweep.branch", str(exc)))
        branch = "plus"

    quad = Quadrature(
        window=number("quadrature.window", q["window"], positive=True),
        tol=number("quadrature.tol", q["tol"], positive=True),
    )
    fmt = o["format"]
    if fmt not in FORMATS:
        problems.append(("output.format", f"must be one of {FORMATS}, got {fmt!r}"))
    path = o["path"]
    if path is not None and not isinstance(path, str):
        problems.append(("output.path", "must be a string or null"))
    workers = number("workers", cfg["workers"], positive=True, integer=True)
    lists = {k: numbers(f"grids.{k}", g[k]) for k in ("d_values", "h_d_values", "y_values")}

    if problems:
        raise ConfigError(problems)
    return SweepConfig(
        model=model,
        grids=Grids(**specs, **lists, force_scales=scales),
        regimes=tuple(str(r) for r in regimes),
        branch=branch,
        quadrature=quad,
        output=Output(format=fmt, path=path),
        workers=workers,
    )


def load_config(path=None, overrides: list[dict] | None = None) -> SweepConfig:
    data = load_file(path) if path else {}
    for extra in overrides or ():
        data = merge(data, extra)
    return from_mapping(data)
