"""Neutron-interferometer (COW) phase with the first inhomogeneous correction,
its R dependence next to that of the monitored interference terms, and the
order-of-magnitude estimate for trap-grade position resolution."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domain import (
    EARTH_MASS,
    EARTH_RADIUS,
    NEUTRON_MASS,
    Constants,
    GravitySource,
    Particle,
    surface_gravity,
)
from .interference import BeamPair, term_I1, term_I2, term_I3

PAUL_TRAP_RESOLUTION = 2e-6
DEFAULT_FLIGHT_TIME = 1.0


@dataclass(frozen=True)
class CowSetup:
    L: float
    l_b: float
    Lambda: float
    include_correction: bool = True

    def __post_init__(self):
        if not (self.L > 0 and self.Lambda > 0):
            raise ValueError("L and Lambda must be positive")
        if not self.l_b >= 0:
            raise ValueError("l_b must be non-negative")


def correction_factor(setup: CowSetup, source: GravitySource) -> float:
    if not setup.include_correction:
        return 1.0
    if not setup.l_b < source.R:
        raise ValueError("l_b must be smaller than R when the correction is on")
    return 1.0 - setup.l_b / source.R


def cow_phase(setup: CowSetup, source: GravitySource, particle: Particle, c: Constants) -> float:
    """-g m^2 L l_b Lambda / hbar^2 * (1 - l_b/R)."""
    g = surface_gravity(source, c)
    base = -g * particle.m**2 * setup.L * setup.l_b * setup.Lambda / c.hbar**2
    return base * correction_factor(setup, source)


def cow_intensity(setup: CowSetup, source: GravitySource, particle: Particle, c: Constants) -> float:
    return math.cos(cow_phase(setup, source, particle, c))


def cow_phase_R_derivative(setup: CowSetup, source: GravitySource, particle: Particle,
                           c: Constants) -> float:
    """d(phase)/dR at fixed M.  The phase is negative and shrinks in
    magnitude as R grows, so this derivative is positive."""
    K = c.G * source.M * particle.m**2 * setup.L * setup.l_b * setup.Lambda / c.hbar**2
    R = source.R
    if setup.include_correction:
        return K * (2 / R**3 - 3 * setup.l_b / R**4)
    return K * 2 / R**3


def cow_magnitude_R_derivative(setup, source, particle, c) -> float:
    """d|phase|/dR; negative whenever the bracket is positive."""
    return -cow_phase_R_derivative(setup, source, particle, c)


@dataclass(frozen=True)
class RDependenceReport:
    heights: np.ndarray
    delta_cow_phase: np.ndarray
    delta_I1: np.ndarray
    delta_I2: np.ndarray
    delta_I3: np.ndarray
    cow_phase_derivative: float
    cow_magnitude_derivative: float
    I_derivatives: tuple[float, float, float]

    CSV_COLUMNS = ("R_tilde_m", "delta_cow_phase", "delta_I1", "delta_I2", "delta_I3")

    def csv_rows(self) -> list[list[float]]:
        return [[float(h), float(a), float(b), float(c_), float(d)] for h, a, b, c_, d in
                zip(self.heights, self.delta_cow_phase, self.delta_I1, self.delta_I2, self.delta_I3)]

    def as_dict(self) -> dict:
        return {
            "cow_phase_derivative": self.cow_phase_derivative,
            "cow_magnitude_derivative": self.cow_magnitude_derivative,
            "dI1_dR": self.I_derivatives[0],
            "dI2_dR": self.I_derivatives[1],
            "dI3_dR": self.I_derivatives[2],
            "rows": self.csv_rows(),
        }


def _terms_at(pair: BeamPair, R: float) -> np.ndarray:
    p = BeamPair(pair.scenario.with_source(R=R), pair.record_alpha, pair.record_beta)
    return np.array([term_I1(p), term_I2(p), term_I3(p)])


def r_dependence_comparison(setup: CowSetup, source: GravitySource, particle: Particle,
                            pair: BeamPair, c: Constants, heights) -> RDependenceReport:
    """COW phase and I1..I3 at R + R_tilde minus their values at R.

    The COW side uses ``source``; the interference side moves the pair's own
    source radius at fixed M, with records and resolutions unchanged, so the
    dimensionless measurement strengths grow like R^3.
    """
    heights = np.asarray(heights, dtype=float)
    R0 = pair.scenario.source.R
    phi0 = cow_phase(setup, source, particle, c)
    base = _terms_at(pair, R0)
    d_phi, d_terms = [], []
    for h in heights:
        d_phi.append(cow_phase(setup, GravitySource(source.M, source.R + h), particle, c) - phi0)
        d_terms.append(_terms_at(pair, R0 + h) - base if h != 0 else np.zeros(3))
    d_terms = np.array(d_terms).reshape(len(heights), 3)
    step = 1e-4 * R0
    deriv = (_terms_at(pair, R0 + step) - _terms_at(pair, R0 - step)) / (2 * step)
    return RDependenceReport(
        heights=heights,
        delta_cow_phase=np.array(d_phi),
        delta_I1=d_terms[:, 0],
        delta_I2=d_terms[:, 1],
        delta_I3=d_terms[:, 2],
        cow_phase_derivative=cow_phase_R_derivative(setup, source, particle, c),
        cow_magnitude_derivative=cow_magnitude_R_derivative(setup, source, particle, c),
        I_derivatives=tuple(float(x) for x in deriv),
    )


@dataclass(frozen=True)
class EstimateResult:
    gamma_tilde: float
    sqrt_gamma: float
    frequency_bound: float
    assumptions: tuple[str, ...] = field(default_factory=tuple)

    def as_dict(self) -> dict:
        return {
            "gamma_tilde": self.gamma_tilde,
            "sqrt_gamma": self.sqrt_gamma,
            "frequency_bound": self.frequency_bound,
            "assumptions": list(self.assumptions),
        }


def paul_trap_estimate(source: GravitySource | None = None, particle: Particle | None = None,
                       T: float | None = None, resolution: float | None = None,
                       c: Constants | None = None) -> EstimateResult:
    """gamma = 2 hbar R^3 / (G M m T res^2) and the frequency bound
    sqrt(2GM/R^3) (1 + gamma^2)^(1/4).  Any input left as None takes a
    default that is listed in ``assumptions``."""
    assumptions = []
    if source is None:
        source = GravitySource(EARTH_MASS, EARTH_RADIUS)
        assumptions.append(f"source: Earth, M = {EARTH_MASS!r} kg, R = {EARTH_RADIUS!r} m")
    if particle is None:
        particle = Particle(NEUTRON_MASS)
        assumptions.append(f"particle: thermal neutron, m = {NEUTRON_MASS!r} kg")
    if T is None:
        T = DEFAULT_FLIGHT_TIME
        assumptions.append(f"flight time T = {DEFAULT_FLIGHT_TIME!r} s")
    if resolution is None:
        resolution = PAUL_TRAP_RESOLUTION
        assumptions.append(f"resolution = {PAUL_TRAP_RESOLUTION!r} m (ion-trap grade)")
    if c is None:
        c = Constants()
        assumptions.append("constants: CODATA G and hbar")
    if not (T > 0 and resolution > 0):
        raise ValueError("T and resolution must be positive")
    GM = c.G * source.M
    gamma = 2 * c.hbar * source.R**3 / (GM * particle.m * T * resolution**2)
    bound = math.sqrt(2 * GM / source.R**3) * (1 + gamma * gamma) ** 0.25
    return EstimateResult(gamma, math.sqrt(gamma), bound, tuple(assumptions))
