"""Run configuration and output files.

Configuration is an INI-style file read with :mod:`configparser`::

    [run]
    experiment = dispersion-roots
    model = A

    [law]
    kind = affine
    intercept = 1.0
    slope = -1.0

    [grid]
    zeta = 0.3183, 0.5
    nu = 0, 1e-2

    [numerics]
    N_modes = 128
    dt_time = 0.01
    T_time = 50

List values are comma separated.  ``linspace(a, b, n)`` and
``logspace(a, b, n)`` (exponents) are accepted for grids.
"""
from __future__ import annotations

import configparser
import csv
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import VelocityLaw, law_from_config, make_velocity_law


class ConfigError(ValueError):
    pass


NUMERIC_DEFAULTS = {
    "N_modes": 128,
    "dt_time": 0.01,
    "T_time": 50.0,
    "tol_abs": 1e-10,
    "re_points": 100,
    "im_points": 200,
    "im_max": 6.0,
    "delta_over_nu": 0.25,
}

_SPACE = re.compile(r"^(linspace|logspace)\(([^)]*)\)$")


def parse_list(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    m = _SPACE.match(text)
    if m:
        try:
            a, b, n = (x.strip() for x in m.group(2).split(","))
            fn = np.linspace if m.group(1) == "linspace" else np.logspace
            return [float(x) for x in fn(float(a), float(b), int(n))]
        except ValueError as exc:
            raise ConfigError(f"bad grid expression {text!r}") from exc
    try:
        return [float(_expr(x)) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad number list {text!r}") from exc


def _expr(x: str) -> float:
    """A number, optionally written with pi (e.g. 1/pi, 1/(4*pi))."""
    x = x.strip()
    try:
        return float(x)
    except ValueError:
        pass
    if not re.fullmatch(r"[0-9eE+\-*/(). pi]+", x):
        raise ValueError(x)
    return float(eval(x, {"__builtins__": {}}, {"pi": math.pi}))  # noqa: S307 (restricted charset)


@dataclass
class RunConfig:
    experiment: str
    model: str = "A"
    law: VelocityLaw | None = None
    grids: dict = field(default_factory=dict)
    numerics: dict = field(default_factory=dict)
    out: str | None = None
    raw: dict = field(default_factory=dict)

    def grid(self, name: str, default=None) -> list[float]:
        if name in self.grids:
            return self.grids[name]
        if default is None:
            raise ConfigError(f"grid {name!r} missing")
        return list(default)

    def num(self, name: str):
        return self.numerics.get(name, NUMERIC_DEFAULTS.get(name))

    def echo(self) -> dict:
        return self.raw


def read_config(path=None, text: str | None = None, experiment: str | None = None) -> RunConfig:
    cp = configparser.ConfigParser()
    cp.optionxform = str
    if path is not None:
        if not Path(path).exists():
            raise ConfigError(f"config file {path} not found")
        try:
            cp.read(path)
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from exc
    elif text is not None:
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from exc
    run = dict(cp["run"]) if cp.has_section("run") else {}
    exp = run.get("experiment", experiment)
    if exp is None:
        raise ConfigError("no experiment named")
    model = run.get("model", "A").upper()
    if model not in ("A", "B"):
        raise ConfigError(f"model must be A or B, got {model!r}")
    law = law_from_config(dict(cp["law"])) if cp.has_section("law") else make_velocity_law("affine")
    grids = {}
    if cp.has_section("grid"):
        for k, v in cp["grid"].items():
            vals = parse_list(v)
            if not vals:
                raise ConfigError(f"grid {k!r} is empty")
            grids[k] = vals
    numerics = {}
    if cp.has_section("numerics"):
        for k, v in cp["numerics"].items():
            try:
                x = _expr(v)
            except ValueError as exc:
                raise ConfigError(f"numeric knob {k!r} = {v!r}") from exc
            if (k.startswith("tol") or k.startswith("dt") or k.startswith("T_")) and x <= 0:
                raise ConfigError(f"{k} must be positive")
            numerics[k] = int(x) if k in ("N_modes", "re_points", "im_points") else x
    raw = {s: dict(cp[s]) for s in cp.sections()}
    return RunConfig(exp, model, law, grids, numerics, run.get("out"), raw)


# --------------------------------------------------------------------------
# output


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x)) if math.isfinite(x) else str(float(x))
    return str(x)


def write_csv(path, header, rows) -> int:
    n = 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
            n += 1
    return n


def read_csv(path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [row for row in r]


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")
