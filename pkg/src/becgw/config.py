"""Experiment configuration documents (TOML, or JSON with the same tree).

Sections: ``[bec]``, ``[squeeze]``, ``[plan]`` are required; ``[decoherence]``,
``[sweep]`` and ``[figure]`` are optional.  Every problem found is reported
together in one :class:`ConfigError`.
"""

from dataclasses import asdict, dataclass, field
import json
import math
from pathlib import Path
import sys
from typing import Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .decoherence import DecoherenceParams
from .errors import ConfigError
from .metrology import SqueezeParams, db_to_r
from .mode_dynamics import BecConfig
from .sensitivity import MeasurementPlan

FIGURE_IDS = ("1", "2a", "2b", "3")

_SCHEMA = {
    "bec": {"atom_mass": True, "number_density": True, "sound_speed": True, "box_length": True},
    "squeeze": {"r": False, "db": False, "phi": False},
    "plan": {"tau": True, "t_obs": True, "n_becs": False},
    "decoherence": {"mu0": False, "mu_inf": False, "gamma_b": False},
    "sweep": {"start": True, "stop": True, "points": True, "spacing": False},
    "figure": {"id": True, "lengths": False, "r_values": False, "reference_r": False},
}
_REQUIRED_SECTIONS = ("bec", "squeeze", "plan")


@dataclass(frozen=True)
class SweepSpec:
    start: float
    stop: float
    points: int
    spacing: str = "log"

    def grid(self):
        if self.points == 1:
            return np.array([self.start])
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class FigureSpec:
    id: str
    lengths: tuple = ()
    r_values: tuple = ()
    reference_r: Optional[float] = None


@dataclass(frozen=True)
class DecoherenceSpec:
    """Purity settings; ``gamma_b=None`` means per-mode Beliaev rates."""

    mu0: float = 1.0
    mu_inf: float = 1.0
    gamma_b: Optional[float] = None

    def params(self, r0, gamma_b=None):
        rate = self.gamma_b if gamma_b is None else gamma_b
        return DecoherenceParams(r0, self.mu0, self.mu_inf, 0.0 if rate is None else rate)


@dataclass(frozen=True)
class ExperimentConfig:
    bec: BecConfig
    squeeze: SqueezeParams
    plan: MeasurementPlan
    decoherence: DecoherenceSpec = field(default_factory=DecoherenceSpec)
    sweep: Optional[SweepSpec] = None
    figure: Optional[FigureSpec] = None
    source: Optional[str] = None

    def resolved(self):
        """Plain-data view of every resolved parameter, for echoing."""
        out = {
            "bec": {k: v for k, v in asdict(self.bec).items() if k not in ("hbar", "c_light")},
            "squeeze": asdict(self.squeeze),
            "plan": asdict(self.plan),
            "decoherence": asdict(self.decoherence),
        }
        if self.sweep is not None:
            out["sweep"] = asdict(self.sweep)
        if self.figure is not None:
            out["figure"] = {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self.figure).items()}
        return out


def _number(section, key, value, errors, positive=True, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errors.append(f"{section}.{key} must be a number, got {value!r}")
        return None
    if not math.isfinite(value):
        errors.append(f"{section}.{key} must be finite")
        return None
    if positive and not value > 0:
        errors.append(f"{section}.{key} must be > 0, got {value}")
        return None
    if integer and int(value) != value:
        errors.append(f"{section}.{key} must be an integer, got {value}")
        return None
    return int(value) if integer else float(value)


def _numbers(section, key, value, errors):
    if not isinstance(value, list) or not value:
        errors.append(f"{section}.{key} must be a non-empty array of numbers")
        return ()
    out = [_number(section, key, v, errors, positive=False) for v in value]
    return tuple(v for v in out if v is not None)


def _build(doc, errors):
    if not isinstance(doc, dict):
        errors.append("document must be a table of sections")
        return None
    for name in doc:
        if name not in _SCHEMA:
            errors.append(f"unknown section [{name}]")
    sections = {}
    for name, keys in _SCHEMA.items():
        sec = doc.get(name)
        if sec is None:
            if name in _REQUIRED_SECTIONS:
                errors.extend(f"missing required field {name}.{k}" for k, req in keys.items() if req)
                if name == "squeeze":
                    errors.append("missing squeeze.r or squeeze.db")
            continue
        if not isinstance(sec, dict):
            errors.append(f"[{name}] must be a table")
            continue
        for k in sec:
            if k not in keys:
                errors.append(f"unknown field {name}.{k}")
        for k, req in keys.items():
            if req and k not in sec:
                errors.append(f"missing required field {name}.{k}")
        sections[name] = sec

    bec = squeeze = plan = None
    if "bec" in sections:
        s = sections["bec"]
        vals = {k: _number("bec", k, s[k], errors) for k in _SCHEMA["bec"] if k in s}
        if len(vals) == 4 and None not in vals.values():
            try:
                bec = BecConfig(**vals)
            except ValueError as exc:
                errors.append(f"bec: {exc}")

    if "squeeze" in sections:
        s = sections["squeeze"]
        phi = math.pi / 2 if "phi" not in s else _number("squeeze", "phi", s["phi"], errors, positive=False)
        has_r, has_db = "r" in s, "db" in s
        if has_r == has_db:
            errors.append("exactly one of squeeze.r and squeeze.db is required" + (", both given" if has_r else ""))
        else:
            key = "r" if has_r else "db"
            v = _number("squeeze", key, s[key], errors, positive=False)
            if v is not None and v < 0:
                errors.append(f"squeeze.{key} must be >= 0, got {v}")
            elif v is not None and phi is not None:
                squeeze = SqueezeParams(v if has_r else db_to_r(v), phi)

    if "plan" in sections:
        s = sections["plan"]
        tau = _number("plan", "tau", s["tau"], errors) if "tau" in s else None
        t_obs = _number("plan", "t_obs", s["t_obs"], errors) if "t_obs" in s else None
        n_becs = _number("plan", "n_becs", s.get("n_becs", 1), errors, integer=True)
        if None not in (tau, t_obs, n_becs):
            if tau > t_obs:
                errors.append(f"plan.tau = {tau} exceeds plan.t_obs = {t_obs}")
            else:
                plan = MeasurementPlan(tau, t_obs, n_becs)

    dec = DecoherenceSpec()
    if "decoherence" in sections:
        s = sections["decoherence"]
        vals = {}
        for k in ("mu0", "mu_inf"):
            if k in s:
                v = _number("decoherence", k, s[k], errors)
                if v is not None and v > 1:
                    errors.append(f"decoherence.{k} must lie in (0, 1], got {v}")
                vals[k] = v
        if "gamma_b" in s:
            v = _number("decoherence", "gamma_b", s["gamma_b"], errors, positive=False)
            if v is not None and v < 0:
                errors.append(f"decoherence.gamma_b must be >= 0, got {v}")
            vals["gamma_b"] = v
        if None not in vals.values():
            dec = DecoherenceSpec(**vals)

    sweep = None
    if "sweep" in sections:
        s = sections["sweep"]
        start = _number("sweep", "start", s["start"], errors) if "start" in s else None
        stop = _number("sweep", "stop", s["stop"], errors) if "stop" in s else None
        points = _number("sweep", "points", s["points"], errors, integer=True) if "points" in s else None
        spacing = s.get("spacing", "log")
        if spacing not in ("log", "linear"):
            errors.append(f"sweep.spacing must be 'log' or 'linear', got {spacing!r}")
        if start is not None and stop is not None and not start < stop:
            errors.append(f"sweep.start = {start} must be below sweep.stop = {stop}")
        if None not in (start, stop, points) and spacing in ("log", "linear") and start < stop:
            sweep = SweepSpec(start, stop, points, spacing)

    figure = None
    if "figure" in sections:
        s = sections["figure"]
        fid = str(s.get("id", ""))
        if "id" in s and fid not in FIGURE_IDS:
            errors.append(f"figure.id must be one of {', '.join(FIGURE_IDS)}, got {fid!r}")
        lengths = _numbers("figure", "lengths", s["lengths"], errors) if "lengths" in s else ()
        if any(v <= 0 for v in lengths):
            errors.append("figure.lengths must be positive")
        r_values = _numbers("figure", "r_values", s["r_values"], errors) if "r_values" in s else ()
        if any(v < 0 for v in r_values):
            errors.append("figure.r_values must be >= 0")
        ref = _number("figure", "reference_r", s["reference_r"], errors) if "reference_r" in s else None
        if fid in FIGURE_IDS:
            figure = FigureSpec(fid, lengths, r_values, ref)

    if errors:
        return None
    return ExperimentConfig(bec, squeeze, plan, dec, sweep, figure)


def parse_document(text, fmt=None):
    """Parse and validate a config document given as text."""
    if fmt is None:
        fmt = "json" if text.lstrip().startswith("{") else "toml"
    try:
        doc = json.loads(text) if fmt == "json" else tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError([f"cannot parse {fmt} document: {exc}"]) from None
    errors = []
    cfg = _build(doc, errors)
    if errors:
        raise ConfigError(errors)
    return cfg


def parse_config(path):
    """Read ``path`` (``'-'`` for stdin); ``.json`` files are read as JSON."""
    if str(path) == "-":
        return parse_document(sys.stdin.read())
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    cfg = parse_document(text, "json" if p.suffix.lower() == ".json" else None)
    return ExperimentConfig(cfg.bec, cfg.squeeze, cfg.plan, cfg.decoherence, cfg.sweep, cfg.figure, str(p))


def preset_path(name):
    """Path of a bundled preset such as ``'figure1'``."""
    p = Path(__file__).parent / "presets" / f"{name}.toml"
    if not p.exists():
        raise FileNotFoundError(f"no bundled preset {name!r} at {p}")
    return p
