"""Flat ``key = value`` scenario files.

Every key carries its unit in its name.  Unknown keys, duplicates and
malformed numbers are hard errors.  ``#`` starts a comment line.
"""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass, field

from .cow import CowSetup
from .domain import (
    CODATA_G,
    CODATA_HBAR,
    DEFAULT_VALIDITY_RATIO,
    EARTH_MASS,
    EARTH_RADIUS,
    NEUTRON_MASS,
    Constants,
    ExperimentScenario,
    GravitySource,
    Particle,
    PathEndpoints,
)
from .errors import ConfigError
from .records import DEFAULT_POINTS, MeasurementRecord, make_record

_RECORD_PARAMS = {
    "c_m": "c",
    "l0_m": "l0",
    "v0_m_per_s": "v0",
    "g_m_per_s2": "g",
    "A_m": "A",
    "omega0_rad_per_s": "omega0",
    "phi_rad": "phi",
}

NUMERIC_KEYS = {
    "constants.G_SI", "constants.hbar_SI",
    "source.M_kg", "source.R_m",
    "particle.m_kg",
    "endpoints.x_P_m", "endpoints.y_P_m", "endpoints.l_P_m",
    "endpoints.x_Q_m", "endpoints.y_Q_m", "endpoints.l_Q_m",
    "endpoints.tau_start_s", "endpoints.tau_end_s",
    "scenario.validity_ratio",
    "measurement.delta_alpha_m", "measurement.delta_beta_m",
    "record.points", "record_beta.points",
    "cow.L_m", "cow.l_b_m", "cow.Lambda_m",
    "estimate.T_s", "estimate.delta_alpha_m",
} | {f"record.{k}" for k in _RECORD_PARAMS} | {f"record_beta.{k}" for k in _RECORD_PARAMS}

TEXT_KEYS = {"record.kind", "record_beta.kind", "cow.include_correction", "cow.heights_m"}

KNOWN_KEYS = NUMERIC_KEYS | TEXT_KEYS


def _defaults(toy: bool) -> dict[str, float | str]:
    d: dict[str, float | str] = {
        "constants.G_SI": 1.0 if toy else CODATA_G,
        "constants.hbar_SI": 1.0 if toy else CODATA_HBAR,
        "source.M_kg": 1.0 if toy else EARTH_MASS,
        "source.R_m": 1.0 if toy else EARTH_RADIUS,
        "particle.m_kg": 1.0 if toy else NEUTRON_MASS,
        "endpoints.x_P_m": 0.0, "endpoints.y_P_m": 0.0, "endpoints.l_P_m": 0.0,
        "endpoints.x_Q_m": 0.0, "endpoints.y_Q_m": 0.0, "endpoints.l_Q_m": 0.0,
        "endpoints.tau_start_s": 0.0, "endpoints.tau_end_s": 1.0,
        "scenario.validity_ratio": math.inf if toy else DEFAULT_VALIDITY_RATIO,
        "measurement.delta_alpha_m": math.inf,
        "record.points": float(DEFAULT_POINTS),
    }
    return d


def _parse_float(key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: not a number: {text!r}") from None


def parse_text(text: str) -> dict[str, str]:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#",),
                                   inline_comment_prefixes=None, strict=True, default_section="\x00")
    cp.optionxform = str
    try:
        cp.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    raw = dict(cp["config"])
    unknown = sorted(set(raw) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    return raw


@dataclass(frozen=True)
class RunConfig:
    values: dict = field(default_factory=dict)
    toy_units: bool = False
    explicit: frozenset = frozenset()

    @classmethod
    def from_text(cls, text: str, toy_units: bool = False) -> "RunConfig":
        raw = parse_text(text)
        vals: dict = _defaults(toy_units)
        for k, v in raw.items():
            vals[k] = v.strip() if k in TEXT_KEYS else _parse_float(k, v.strip())
        return cls(vals, toy_units, frozenset(raw))

    @classmethod
    def from_file(cls, path, toy_units: bool = False) -> "RunConfig":
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_text(text, toy_units)

    @classmethod
    def empty(cls, toy_units: bool = False) -> "RunConfig":
        return cls(_defaults(toy_units), toy_units)

    def with_override(self, key: str, value: float) -> "RunConfig":
        if key not in NUMERIC_KEYS:
            raise ConfigError(f"cannot sweep {key!r}: not a numeric config key")
        vals = dict(self.values)
        vals[key] = float(value)
        return RunConfig(vals, self.toy_units, self.explicit | {key})

    def get(self, key: str, default=None):
        return self.values.get(key, default)

    def canonical(self) -> str:
        lines = [f"toy_units={int(self.toy_units)}"]
        for k in sorted(self.values):
            v = self.values[k]
            lines.append(f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    # -- builders --------------------------------------------------------------

    def constants(self) -> Constants:
        return Constants(G=self.values["constants.G_SI"], hbar=self.values["constants.hbar_SI"])

    def scenario(self) -> ExperimentScenario:
        v = self.values
        try:
            return ExperimentScenario(
                constants=self.constants(),
                source=GravitySource(M=v["source.M_kg"], R=v["source.R_m"]),
                particle=Particle(m=v["particle.m_kg"]),
                endpoints=PathEndpoints(
                    x_P=v["endpoints.x_P_m"], y_P=v["endpoints.y_P_m"], l_P=v["endpoints.l_P_m"],
                    x_Q=v["endpoints.x_Q_m"], y_Q=v["endpoints.y_Q_m"], l_Q=v["endpoints.l_Q_m"],
                    tau_start=v["endpoints.tau_start_s"], tau_end=v["endpoints.tau_end_s"],
                ),
                validity_ratio=v["scenario.validity_ratio"],
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def has_record(self, prefix: str = "record") -> bool:
        return f"{prefix}.kind" in self.values

    def record(self, prefix: str = "record", resolution: float | None = None) -> MeasurementRecord | None:
        v = self.values
        if f"{prefix}.kind" not in v:
            return None
        res = v["measurement.delta_alpha_m"] if resolution is None else resolution
        params = {name: v[f"{prefix}.{key}"] for key, name in _RECORD_PARAMS.items() if f"{prefix}.{key}" in v}
        points = int(v.get(f"{prefix}.points", v["record.points"]))
        try:
            return make_record(v[f"{prefix}.kind"], v["endpoints.tau_start_s"], v["endpoints.tau_end_s"],
                               points, res, **params)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{prefix}: {exc}") from None

    def delta_beta(self) -> float:
        return self.values.get("measurement.delta_beta_m", self.values["measurement.delta_alpha_m"])

    def cow_setup(self) -> CowSetup:
        v = self.values
        missing = [k for k in ("cow.L_m", "cow.l_b_m", "cow.Lambda_m") if k not in v]
        if missing:
            raise ConfigError(f"missing config key(s): {', '.join(missing)}")
        flag = str(v.get("cow.include_correction", "true")).lower()
        if flag not in ("true", "false", "1", "0", "yes", "no"):
            raise ConfigError(f"cow.include_correction: expected a boolean, got {flag!r}")
        try:
            return CowSetup(v["cow.L_m"], v["cow.l_b_m"], v["cow.Lambda_m"], flag in ("true", "1", "yes"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def cow_heights(self) -> list[float] | None:
        text = self.values.get("cow.heights_m")
        if text is None:
            return None
        return [_parse_float("cow.heights_m", t) for t in str(text).split(",") if t.strip()]
