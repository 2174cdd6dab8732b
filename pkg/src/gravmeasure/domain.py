"""Physical constants, scenario types and validity checks.

Every computation in the package takes its constants explicitly, so toy-unit
runs (hbar = m = G = 1) are as natural as SI runs with CODATA values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

CODATA_G = 6.67430e-11
CODATA_HBAR = 1.054571817e-34

EARTH_MASS = 5.9722e24
EARTH_RADIUS = 6.371e6
NEUTRON_MASS = 1.675e-27

DEFAULT_VALIDITY_RATIO = 0.01


@dataclass(frozen=True)
class Constants:
    G: float = CODATA_G
    hbar: float = CODATA_HBAR

    def __post_init__(self):
        if not (self.G > 0 and self.hbar > 0):
            raise ValueError("constants must be strictly positive")

    @classmethod
    def toy(cls) -> "Constants":
        return cls(G=1.0, hbar=1.0)


@dataclass(frozen=True)
class GravitySource:
    M: float = EARTH_MASS
    R: float = EARTH_RADIUS

    def __post_init__(self):
        if not (self.M > 0 and self.R > 0):
            raise ValueError("source mass and radius must be positive")


@dataclass(frozen=True)
class Particle:
    m: float = NEUTRON_MASS

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError("particle mass must be positive")


@dataclass(frozen=True)
class PathEndpoints:
    """Start point P at ``tau_start`` and end point Q at ``tau_end``.

    ``l`` is the height above the source surface; ``x`` and ``y`` are the
    transverse coordinates, which stay free.
    """

    x_P: float = 0.0
    y_P: float = 0.0
    l_P: float = 0.0
    x_Q: float = 0.0
    y_Q: float = 0.0
    l_Q: float = 0.0
    tau_start: float = 0.0
    tau_end: float = 1.0

    @property
    def T(self) -> float:
        return self.tau_end - self.tau_start


@dataclass(frozen=True)
class ExperimentScenario:
    constants: Constants = field(default_factory=Constants)
    source: GravitySource = field(default_factory=GravitySource)
    particle: Particle = field(default_factory=Particle)
    endpoints: PathEndpoints = field(default_factory=PathEndpoints)
    validity_ratio: float = DEFAULT_VALIDITY_RATIO

    @property
    def T(self) -> float:
        return self.endpoints.T

    @property
    def GM(self) -> float:
        return self.constants.G * self.source.M

    def with_source(self, **changes) -> "ExperimentScenario":
        return replace(self, source=replace(self.source, **changes))

    def with_endpoints(self, **changes) -> "ExperimentScenario":
        return replace(self, endpoints=replace(self.endpoints, **changes))


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_scenario(s: ExperimentScenario) -> ValidationResult:
    """Check a scenario against the second-order expansion regime.

    Failures are returned as data; nothing is raised and the input is
    untouched.
    """
    problems = []
    T = s.endpoints.T
    if not (math.isfinite(T) and T > 0):
        problems.append("non-positive duration")
    if not s.validity_ratio > 0:
        problems.append("validity ratio must be positive")
    l_max = max(abs(s.endpoints.l_P), abs(s.endpoints.l_Q))
    if l_max > s.validity_ratio * s.source.R:
        problems.append(
            f"approximation regime violated: max|l|/R = {l_max / s.source.R:.3g}"
            f" exceeds {s.validity_ratio:g}"
        )
    return ValidationResult(tuple(problems))


def surface_gravity(source: GravitySource, c: Constants) -> float:
    return c.G * source.M / source.R**2


def gamma_parameter(scenario: ExperimentScenario, resolution: float) -> float:
    """Dimensionless measurement strength 2 hbar R^3 / (G M m T resolution^2).

    An infinite resolution (no measurement) gives exactly zero.
    """
    c, src = scenario.constants, scenario.source
    if math.isinf(resolution):
        return 0.0
    return 2.0 * c.hbar * src.R**3 / (scenario.GM * scenario.particle.m * scenario.T * resolution**2)


def resolution_for_gamma(scenario: ExperimentScenario, gamma_tilde: float) -> float:
    """Inverse of :func:`gamma_parameter`; ``gamma_tilde = 0`` maps to ``inf``."""
    if gamma_tilde == 0:
        return math.inf
    c, src = scenario.constants, scenario.source
    return math.sqrt(2.0 * c.hbar * src.R**3 / (scenario.GM * scenario.particle.m * scenario.T * gamma_tilde))


def toy_scenario(l_P: float = 0.0, l_Q: float = 0.0, T: float = 1.0, R: float = 1.0,
                 M: float = 1.0, m: float = 1.0, **endpoint_kw) -> ExperimentScenario:
    """Nondimensional scenario with G = hbar = 1, used by the oracle checks."""
    return ExperimentScenario(
        constants=Constants.toy(),
        source=GravitySource(M=M, R=R),
        particle=Particle(m=m),
        endpoints=PathEndpoints(l_P=l_P, l_Q=l_Q, tau_start=0.0, tau_end=T, **endpoint_kw),
        validity_ratio=math.inf,
    )
