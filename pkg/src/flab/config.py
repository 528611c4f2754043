"""Experiment configuration: strict JSON parsing with defaults."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

from .spin_model import DEFAULT_BOUNDS, DEFAULT_MAX_QUBITS

EXPERIMENTS = (
    "periodicity-scalar",
    "periodicity-rdm",
    "lemma-suite",
    "nondegeneracy-scan",
    "dtc-demo",
    "perturbation-bound",
)
MODEL_TYPES = ("random", "model_b", "ensemble", "zero")


class ConfigError(ValueError):
    pass


def _default_model():
    return {"type": "random"}


def _default_observable():
    return {"pauli": "z", "sites": [1]}


@dataclass
class ExperimentConfig:
    """One experiment run.

    ``draws`` parameter draws of the model are made, and for each of them
    ``samples`` Haar-random product initial states (``mc_samples`` for the
    Monte Carlo lemma checks).
    """

    experiment: str
    N: int
    seed: int = 0
    model: dict = field(default_factory=_default_model)
    bounds: list = field(default_factory=lambda: list(DEFAULT_BOUNDS))
    M: int = 500
    K: int = 32
    subsystem: list = field(default_factory=lambda: [1])
    observable: dict = field(default_factory=_default_observable)
    draws: int = 1
    samples: int = 5
    mc_samples: int = 2000
    cluster_tol: float = 1e-8
    ratio_tol: float = 1e-8
    delta: float = 1e-3
    eps_list: list = field(default_factory=lambda: [1e-1, 3e-2, 1e-2, 3e-3, 1e-3])
    t_grid: list = field(default_factory=lambda: [1.0, 5.0, 10.0])
    max_qubits: int = DEFAULT_MAX_QUBITS
    out: str = "results"

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]

    @property
    def subsystem_warning(self) -> bool:
        return self.experiment == "periodicity-rdm" and len(self.subsystem) > 0.29248 * self.N


FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _fail(name, constraint):
    raise ConfigError(f"field {name!r}: {constraint}")


def _int(data, name, minimum):
    v = data[name]
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(name, "must be an integer")
    if v < minimum:
        _fail(name, f"must be >= {minimum}")


def _positive_float(data, name):
    v = data[name]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
        _fail(name, "must be a positive number")
    data[name] = float(v)


def _check_model(model, N):
    if not isinstance(model, dict) or model.get("type") not in MODEL_TYPES:
        _fail("model", f"must be an object with type in {MODEL_TYPES}")
    kind = model["type"]
    allowed = {
        "random": {"type"},
        "zero": {"type"},
        "model_b": {"type", "h", "J"},
        "ensemble": {"type", "n", "T", "alpha", "gamma"},
    }[kind]
    extra = set(model) - allowed
    if extra:
        _fail("model", f"unknown key(s) {sorted(extra)} for type {kind!r}")
    if kind == "model_b":
        if len(model.get("h", [])) != 2 * N or len(model.get("J", [])) != N - 1:
            _fail("model", f"model_b needs h with 2N={2 * N} and J with N-1={N - 1} values")
    if kind == "ensemble":
        missing = allowed - set(model)
        if missing:
            _fail("model", f"ensemble is missing {sorted(missing)}")


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    data = cfg.__dict__
    if cfg.experiment not in EXPERIMENTS:
        _fail("experiment", f"must be one of {EXPERIMENTS}")
    _int(data, "N", 1)
    _int(data, "max_qubits", 1)
    if cfg.N > cfg.max_qubits:
        _fail("N", f"must be <= max_qubits={cfg.max_qubits} (dense-matrix cap)")
    _int(data, "seed", 0)
    for name in ("M", "K", "draws", "samples", "mc_samples"):
        _int(data, name, 1)
    for name in ("cluster_tol", "ratio_tol", "delta"):
        _positive_float(data, name)
    if not (isinstance(cfg.bounds, list) and len(cfg.bounds) == 2 and cfg.bounds[0] <= cfg.bounds[1]):
        _fail("bounds", "must be [low, high] with low <= high")
    sub = cfg.subsystem
    if not (isinstance(sub, list) and sub and all(isinstance(s, int) and 1 <= s <= cfg.N for s in sub)):
        _fail("subsystem", f"must be a non-empty list of sites in 1..{cfg.N}")
    if len(set(sub)) != len(sub):
        _fail("subsystem", "sites must be distinct")
    obs = cfg.observable
    if not (isinstance(obs, dict) and set(obs) == {"pauli", "sites"}):
        _fail("observable", "must be {pauli: str, sites: [int]}")
    if len(obs["pauli"]) != len(obs["sites"]) or not set(obs["pauli"].lower()) <= set("xyz"):
        _fail("observable", "needs one of x/y/z per listed site")
    if not all(isinstance(s, int) and 1 <= s <= cfg.N for s in obs["sites"]):
        _fail("observable", f"sites must lie in 1..{cfg.N}")
    for name in ("eps_list", "t_grid"):
        v = data[name]
        if not (isinstance(v, list) and v and all(
                isinstance(x, (int, float)) and not isinstance(x, bool) and x >= 0 for x in v)):
            _fail(name, "must be a non-empty list of non-negative numbers")
    _check_model(cfg.model, cfg.N)
    if cfg.experiment == "lemma-suite" and cfg.mc_samples < 1000:
        _fail("mc_samples", "must be >= 1000 for the Monte Carlo projector check")
    if cfg.experiment in ("periodicity-scalar", "periodicity-rdm") and cfg.M < 2:
        _fail("M", "periodicity needs M >= 2")
    if cfg.experiment == "dtc-demo" and cfg.M < 2:
        _fail("M", "the DTC demo needs M >= 2")
    return cfg


def parse_config(text: str) -> ExperimentConfig:
    """Parse JSON text into a validated config; unknown keys are rejected."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(data) - set(FIELDS))
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(repr(k) for k in unknown)}")
    for required in ("experiment", "N"):
        if required not in data:
            raise ConfigError(f"field {required!r}: is required")
    return validate(ExperimentConfig(**data))


def serialize_config(cfg: ExperimentConfig) -> str:
    return cfg.to_json()
