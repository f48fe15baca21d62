"""Experiment configuration.

Configs are INI-style text files (``configparser``) or JSON documents with
the same section/key layout.  The grammar is::

    [shape]
    alphas = 0, 2/3 pi, 4/3 pi      ; radians or rational multiples of pi
    betas  = 0, 0, 0
    masses = equal                  ; "equal", "solve" or a comma list

    [fiber]                         ; initial reduced state
    r = 0.3
    rdot = 0.1
    theta = 0
    phi = 0
    c_theta = 0.3
    c_phi = 0

    [state]                         ; optional explicit bodies (simulate)
    masses = 1, 1
    q1 = 1, 0, 0, 0
    v1 = 0, 0, 0, 0
    q2 = 0, 1, 0, 0
    v2 = 0, 0, 0, 0

    [integrator]
    dt = 0.001
    t_end = 1
    rtol = 1e-10
    atol = 1e-12
    dt_min = 1e-12
    adaptive = true

    [analysis]
    polygon_tol = 1e-9
    criterion_tol = 1e-9
    feas_tol = 1e-10
    mass_floor = 1e-8
    rank_tol = 1e-8
    r_grid =                        ; empty: 7 Chebyshev points in (0.1, 0.9)
    lemma_r_grid = 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9

    [sweep]                         ; slot = start, stop, cells (stop excluded)
    alpha3 = 0, 2 pi, 360

Body indices in keys (``q1``, ``alpha3``) start at 1.
"""

import configparser
import json
import math
import re
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction

from .errors import RotopulsatorError


class ConfigError(RotopulsatorError, ValueError):
    pass


_PI_RE = re.compile(
    r"^\s*(?P<sign>[+-])?\s*(?P<num>\d+(?:\.\d+)?)?\s*(?:/\s*(?P<den1>\d+))?\s*\*?\s*pi\s*(?:/\s*(?P<den2>\d+))?\s*$",
    re.IGNORECASE,
)


def parse_angle_exact(text):
    """Return ``("pi", Fraction)`` for rational multiples of pi, else ``("rad", float)``."""
    text = str(text).strip()
    m = _PI_RE.match(text)
    if m:
        coef = Fraction(m["num"]) if m["num"] else Fraction(1)
        for den in (m["den1"], m["den2"]):
            if den:
                if int(den) == 0:
                    raise ConfigError(f"zero denominator in angle {text!r}")
                coef /= int(den)
        if m["sign"] == "-":
            coef = -coef
        return "pi", coef
    try:
        return "rad", float(Fraction(text)) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"cannot parse angle {text!r}") from None


def pi_multiple(coef):
    """``coef * pi`` rounded once."""
    return coef.numerator * math.pi / coef.denominator


def parse_angle(text):
    kind, value = parse_angle_exact(text)
    return pi_multiple(value) if kind == "pi" else value


def _split(text):
    if isinstance(text, (list, tuple)):
        return list(text)
    text = str(text).strip()
    return [p.strip() for p in text.split(",")] if text else []


def parse_floats(text):
    try:
        return [float(x) for x in _split(text)]
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}") from None


def parse_angles(text):
    return [parse_angle(x) for x in _split(text)]


@dataclass
class ShapeConfig:
    alphas: list = field(default_factory=list)
    betas: list = field(default_factory=list)
    masses: object = "equal"  # "equal", "solve" or list of floats


@dataclass
class FiberConfig:
    r: float = 0.3
    rdot: float = 0.0
    theta: float = 0.0
    phi: float = 0.0
    c_theta: float = 0.0
    c_phi: float = 0.0


@dataclass
class StateConfig:
    masses: list = field(default_factory=list)
    q: list = field(default_factory=list)
    v: list = field(default_factory=list)


@dataclass
class IntegratorConfig:
    dt: float = 1e-3
    t_end: float = 1.0
    rtol: float = 1e-10
    atol: float = 1e-12
    dt_min: float = 1e-12
    adaptive: bool = True


@dataclass
class AnalysisConfig:
    polygon_tol: float = 1e-9
    criterion_tol: float = 1e-9
    feas_tol: float = 1e-10
    mass_floor: float = 1e-8
    rank_tol: float = 1e-8
    r_grid: object = None
    lemma_r_grid: list = field(default_factory=lambda: [0.1 * k for k in range(1, 10)])


@dataclass
class SweepAxis:
    slot: str
    start: tuple
    stop: tuple
    cells: int


@dataclass
class ExperimentConfig:
    shape: ShapeConfig = None
    fiber: FiberConfig = field(default_factory=FiberConfig)
    state: StateConfig = None
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    sweep: list = field(default_factory=list)
    source: str = ""

    def echo(self):
        """JSON-safe dictionary of the effective configuration."""
        d = {
            "shape": asdict(self.shape) if self.shape else None,
            "fiber": asdict(self.fiber),
            "state": asdict(self.state) if self.state else None,
            "integrator": asdict(self.integrator),
            "analysis": asdict(self.analysis),
            "sweep": [
                {"slot": a.slot, "start": _angle_repr(a.start), "stop": _angle_repr(a.stop), "cells": a.cells}
                for a in self.sweep
            ],
        }
        return d


def _angle_repr(spec):
    kind, value = spec
    return f"{value} pi" if kind == "pi" else value


class _Locator:
    """Map ``(section, key)`` to a line number in the source text."""

    def __init__(self, text):
        self.lines = {}
        section = None
        for no, line in enumerate(text.splitlines(), 1):
            s = line.strip()
            if s.startswith("[") and s.endswith("]"):
                section = s[1:-1].strip().lower()
            elif section and ("=" in s or ":" in s) and not s.startswith((";", "#")):
                key = re.split(r"[=:]", s, 1)[0].strip().lower()
                self.lines[(section, key)] = no

    def where(self, section, key):
        no = self.lines.get((section, key))
        return f"line {no}, [{section}] {key}" if no else f"[{section}] {key}"


def _bool(text):
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _fill(cls, section, data, loc, converters=None):
    converters = converters or {}
    obj = cls()
    known = {f.name: f for f in fields(cls)}
    for key, raw in data.items():
        if key not in known:
            raise ConfigError(f"{loc.where(section, key)}: unknown key")
        try:
            if key in converters:
                value = converters[key](raw)
            elif isinstance(getattr(obj, key), bool):
                value = _bool(raw)
            elif isinstance(getattr(obj, key), float):
                value = float(raw)
            else:
                value = raw
        except (ConfigError, ValueError) as exc:
            raise ConfigError(f"{loc.where(section, key)}: {exc}") from None
        setattr(obj, key, value)
    return obj


def _masses(raw):
    if isinstance(raw, str) and raw.strip().lower() in ("equal", "solve"):
        return raw.strip().lower()
    return parse_floats(raw)


def _grid(raw):
    values = parse_floats(raw)
    return values or None


def _sweep_axis(slot, raw, loc):
    parts = _split(raw)
    if len(parts) != 3:
        raise ConfigError(f"{loc.where('sweep', slot)}: expected 'start, stop, cells'")
    if not re.fullmatch(r"(alpha|beta)[1-9]\d*", slot):
        raise ConfigError(f"{loc.where('sweep', slot)}: slot must look like alpha<i> or beta<i>")
    try:
        cells = int(parts[2])
    except ValueError:
        raise ConfigError(f"{loc.where('sweep', slot)}: cell count must be an integer") from None
    if cells < 0:
        raise ConfigError(f"{loc.where('sweep', slot)}: cell count must be non-negative")
    return SweepAxis(slot, parse_angle_exact(parts[0]), parse_angle_exact(parts[1]), cells)


def _state(data, loc):
    st = StateConfig()
    n = 0
    if "masses" in data:
        st.masses = parse_floats(data["masses"])
        n = len(st.masses)
    for i in range(1, n + 1):
        for name, target in (("q", st.q), ("v", st.v)):
            key = f"{name}{i}"
            if key not in data:
                if name == "v":
                    target.append([0.0] * 4)
                    continue
                raise ConfigError(f"[state] {key}: missing position for body {i}")
            vec = parse_floats(data[key])
            if len(vec) != 4:
                raise ConfigError(f"{loc.where('state', key)}: expected 4 components")
            target.append(vec)
    extra = set(data) - {"masses"} - {f"{c}{i}" for c in "qv" for i in range(1, n + 1)}
    if extra:
        key = sorted(extra)[0]
        raise ConfigError(f"{loc.where('state', key)}: unknown key")
    return st


def from_mapping(data, text=""):
    """Build an :class:`ExperimentConfig` from a nested ``{section: {key: value}}`` mapping."""
    loc = _Locator(text)
    data = {str(k).lower(): {str(kk).lower(): vv for kk, vv in (v or {}).items()} for k, v in data.items()}
    unknown = set(data) - {"shape", "fiber", "state", "integrator", "analysis", "sweep"}
    if unknown:
        raise ConfigError(f"unknown section [{sorted(unknown)[0]}]")
    cfg = ExperimentConfig()
    if "shape" in data:
        cfg.shape = _fill(
            ShapeConfig, "shape", data["shape"], loc, {"alphas": parse_angles, "betas": parse_angles, "masses": _masses}
        )
        n = len(cfg.shape.alphas)
        if not cfg.shape.betas:
            cfg.shape.betas = [0.0] * n
        if len(cfg.shape.betas) != n:
            raise ConfigError(f"{loc.where('shape', 'betas')}: expected {n} angles, got {len(cfg.shape.betas)}")
        if isinstance(cfg.shape.masses, list) and len(cfg.shape.masses) != n:
            raise ConfigError(f"{loc.where('shape', 'masses')}: expected {n} masses")
        if n < 2:
            raise ConfigError(f"{loc.where('shape', 'alphas')}: need at least two bodies")
    if "fiber" in data:
        cfg.fiber = _fill(FiberConfig, "fiber", data["fiber"], loc, {"theta": parse_angle, "phi": parse_angle})
        if not 0.0 < cfg.fiber.r < 1.0:
            raise ConfigError(f"{loc.where('fiber', 'r')}: r must lie in (0, 1)")
    if "state" in data:
        cfg.state = _state(data["state"], loc)
    if "integrator" in data:
        cfg.integrator = _fill(IntegratorConfig, "integrator", data["integrator"], loc)
        if cfg.integrator.dt <= 0:
            raise ConfigError(f"{loc.where('integrator', 'dt')}: dt must be positive")
        if cfg.integrator.t_end <= 0:
            raise ConfigError(f"{loc.where('integrator', 't_end')}: t_end must be positive")
    if "analysis" in data:
        cfg.analysis = _fill(
            AnalysisConfig, "analysis", data["analysis"], loc, {"r_grid": _grid, "lemma_r_grid": parse_floats}
        )
    if "sweep" in data:
        cfg.sweep = [_sweep_axis(slot, raw, loc) for slot, raw in data["sweep"].items()]
        total = math.prod(a.cells for a in cfg.sweep)
        if total > 1_000_000:
            raise ConfigError(f"[sweep]: {total} cells exceeds the 1e6 limit")
    return cfg


def loads(text, fmt="ini"):
    if fmt == "json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"line {exc.lineno}: {exc.msg}") from None
        return from_mapping(data)
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc).replace("\n", " ")) from None
    return from_mapping({s: dict(parser[s]) for s in parser.sections()}, text)


def load(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    cfg = loads(text, "json" if str(path).endswith(".json") else "ini")
    cfg.source = str(path)
    return cfg
