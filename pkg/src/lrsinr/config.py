"""JSON run configuration.

A config names one experiment plus its parameters::

    {"scenario": {"m": 100, "jammer_aoas_deg": [-20, 0, 20], "jammer_powers": [6, 2, 1]},
     "experiment": "sweep-k", "theta_deg": 20.5, "k_grid": [6, 10, 20],
     "trials": 1000, "seed": 0}

Grids are either explicit lists or ``{"start": a, "stop": b, "step": h}``
objects (``stop`` included when it lies on the grid). Unknown keys are
rejected.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from typing import Any, Optional

from lrsinr.errors import LrsinrError, ParseError, ValidationError
from lrsinr.scenario import ScenarioConfig

EXPERIMENTS = ("predict", "simulate", "sweep-k", "sweep-theta", "mse-qf", "mse-sinr", "eig-pdf", "separation")
FORMATS = ("csv", "json")

SCENARIO_KEYS = {"m", "jammer_aoas_deg", "jammer_powers", "jnr_db", "sigma2",
                 "spacing_over_wavelength", "normalize_trace"}

GRID_KEYS = ("k_grid", "theta_grid", "m_grid", "c_grid", "jnr_db_grid")

# required / optional parameters per experiment
REQUIRED = {
    "predict": {"c"},
    "simulate": {"K"},
    "sweep-k": {"theta_deg", "k_grid"},
    "sweep-theta": {"K", "theta_grid"},
    "mse-qf": {"eigenvalues", "c", "m_grid"},
    "mse-sinr": {"c", "m_grid", "theta_deg"},
    "eig-pdf": {"c"},
    "separation": {"jnr_db_grid", "c_grid"},
}
OPTIONAL = {
    "predict": {"theta_deg"},
    "simulate": {"theta_deg"},
    "sweep-k": set(),
    "sweep-theta": set(),
    "mse-qf": {"jammer_index"},
    "mse-sinr": set(),
    "eig-pdf": {"bins", "eigenvalues", "multiplicity"},
    "separation": set(),
}
COMMON = {"scenario", "experiment", "trials", "seed", "threads", "output", "format"}

DEFAULT_THETA_DEG = 50.0


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioConfig
    experiment: str
    trials: int = 1000
    seed: int = 0
    threads: int = 1
    output: Optional[str] = None
    format: str = "csv"
    theta_deg: Optional[float] = None
    c: Optional[float] = None
    K: Optional[int] = None
    k_grid: Optional[tuple] = None
    theta_grid: Optional[tuple] = None
    m_grid: Optional[tuple] = None
    c_grid: Optional[tuple] = None
    jnr_db_grid: Optional[tuple] = None
    eigenvalues: Optional[tuple] = None
    jammer_index: int = 0
    bins: int = 200
    multiplicity: str = "fixed"

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


def _grid(name: str, spec: Any) -> tuple:
    if isinstance(spec, dict):
        extra = set(spec) - {"start", "stop", "step"}
        if extra or len(spec) != 3:
            raise ValidationError(name, "grid object needs exactly start, stop and step")
        start, stop, step = (float(spec[k]) for k in ("start", "stop", "step"))
        if not step > 0 or stop < start:
            raise ValidationError(name, "grid needs step > 0 and stop >= start")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        # rounding keeps values like 20.05 exact in the CSV
        values = tuple(round(start + i * step, 10) for i in range(n))
    elif isinstance(spec, list):
        values = tuple(spec)
    else:
        raise ValidationError(name, "grid must be a list or a {start, stop, step} object")
    if not values:
        raise ValidationError(name, "grid must be non-empty")
    if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in values):
        raise ValidationError(name, "grid entries must be numbers")
    return values


def _int(name: str, v: Any, lo: int) -> int:
    if isinstance(v, bool) or not isinstance(v, int) and not (isinstance(v, float) and v.is_integer()):
        raise ValidationError(name, "must be an integer")
    v = int(v)
    if v < lo:
        raise ValidationError(name, f"must be >= {lo}")
    return v


def _num(name: str, v: Any) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ValidationError(name, "must be a finite number")
    return float(v)


def _scenario(raw: Any) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ValidationError("scenario", "must be an object")
    unknown = set(raw) - SCENARIO_KEYS
    if unknown:
        raise ValidationError(f"scenario.{sorted(unknown)[0]}", "unknown key")
    for key in ("m", "jammer_aoas_deg", "jammer_powers"):
        if key not in raw:
            raise ValidationError(f"scenario.{key}", "required")
    kw = dict(raw)
    kw["m"] = _int("scenario.m", raw["m"], 2)
    for key in ("jammer_aoas_deg", "jammer_powers"):
        if not isinstance(raw[key], list):
            raise ValidationError(f"scenario.{key}", "must be a list")
        kw[key] = tuple(_num(f"scenario.{key}", v) for v in raw[key])
    for key in ("jnr_db", "sigma2", "spacing_over_wavelength"):
        if key in raw:
            kw[key] = _num(f"scenario.{key}", raw[key])
    if "normalize_trace" in raw and not isinstance(raw["normalize_trace"], bool):
        raise ValidationError("scenario.normalize_trace", "must be true or false")
    return ScenarioConfig(**kw)


def from_dict(doc: Any) -> RunConfig:
    if not isinstance(doc, dict):
        raise ValidationError("<root>", "config must be a JSON object")
    exp = doc.get("experiment")
    if exp not in EXPERIMENTS:
        raise ValidationError("experiment", f"must be one of {', '.join(EXPERIMENTS)}")
    allowed = COMMON | REQUIRED[exp] | OPTIONAL[exp]
    for key in doc:
        if key not in allowed:
            raise ValidationError(key, f"unknown key for experiment {exp!r}")
    for key in sorted(REQUIRED[exp] | {"scenario"}):
        if key not in doc:
            raise ValidationError(key, f"required for experiment {exp!r}")

    kw: dict = {"scenario": _scenario(doc["scenario"]), "experiment": exp}
    if "trials" in doc:
        kw["trials"] = _int("trials", doc["trials"], 1)
    if "seed" in doc:
        kw["seed"] = _int("seed", doc["seed"], 0)
        if kw["seed"] >= 2**64:
            raise ValidationError("seed", "must fit in 64 bits")
    if "threads" in doc:
        kw["threads"] = _int("threads", doc["threads"], 0)
    if "output" in doc:
        if not isinstance(doc["output"], str) or not doc["output"]:
            raise ValidationError("output", "must be a non-empty path string")
        kw["output"] = doc["output"]
    if "format" in doc:
        if doc["format"] not in FORMATS:
            raise ValidationError("format", "must be csv or json")
        kw["format"] = doc["format"]
    for key in ("theta_deg", "c"):
        if key in doc:
            kw[key] = _num(key, doc[key])
    if "c" in kw and not kw["c"] > 0:
        raise ValidationError("c", "must be positive")
    if "K" in doc:
        kw["K"] = _int("K", doc["K"], 1)
    for key in GRID_KEYS:
        if key in doc:
            kw[key] = _grid(key, doc[key])
    for key in ("k_grid", "m_grid"):
        if key in kw:
            kw[key] = tuple(_int(key, v, 1) for v in kw[key])
    if "eigenvalues" in doc:
        if not isinstance(doc["eigenvalues"], list) or len(doc["eigenvalues"]) < 2:
            raise ValidationError("eigenvalues", "need a list of at least two values")
        kw["eigenvalues"] = tuple(_num("eigenvalues", v) for v in doc["eigenvalues"])
        if min(kw["eigenvalues"]) <= 0:
            raise ValidationError("eigenvalues", "must be positive")
    if "jammer_index" in doc:
        kw["jammer_index"] = _int("jammer_index", doc["jammer_index"], 0)
        if kw["jammer_index"] >= kw["scenario"].r:
            raise ValidationError("jammer_index", "exceeds the number of jammers")
    if "bins" in doc:
        kw["bins"] = _int("bins", doc["bins"], 10)
    if "multiplicity" in doc:
        if doc["multiplicity"] not in ("fixed", "proportional"):
            raise ValidationError("multiplicity", "must be fixed or proportional")
        kw["multiplicity"] = doc["multiplicity"]
    if exp in ("predict", "simulate") and "theta_deg" not in kw:
        kw["theta_deg"] = DEFAULT_THETA_DEG
    return RunConfig(**kw)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON config document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    try:
        return from_dict(doc)
    except LrsinrError:
        raise
    except (TypeError, ValueError) as exc:
        raise ValidationError("config", str(exc)) from exc


def to_dict(cfg: RunConfig) -> dict:
    sc = cfg.scenario
    doc: dict = {
        "scenario": {
            "m": sc.m,
            "jammer_aoas_deg": list(sc.jammer_aoas_deg),
            "jammer_powers": list(sc.jammer_powers),
            "jnr_db": sc.jnr_db,
            "sigma2": sc.sigma2,
            "spacing_over_wavelength": sc.spacing_over_wavelength,
            "normalize_trace": sc.normalize_trace,
        },
        "experiment": cfg.experiment,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "threads": cfg.threads,
        "format": cfg.format,
    }
    if cfg.output is not None:
        doc["output"] = cfg.output
    exp = cfg.experiment
    for key in sorted(REQUIRED[exp] | OPTIONAL[exp]):
        value = getattr(cfg, key)
        if value is None:
            continue
        doc[key] = list(value) if isinstance(value, tuple) else value
    return doc


def serialize(cfg: RunConfig) -> str:
    return json.dumps(to_dict(cfg), indent=2)
