"""Closed-form propagators for a particle in the second-order expanded field of
a spherical source, with and without continuous monitoring of its height l.

Every propagator is quadratic in the endpoint heights, so the height part is
returned as a :class:`QuadraticKernel`: six complex coefficients of

    log U = c_QQ l_Q^2 + c_PP l_P^2 + c_QP l_Q l_P + c_Q l_Q + c_P l_P + c_0 + log_prefactor

evaluated in log domain.  The transverse x, y motion stays free and contributes
:func:`free_transverse_factor`.

Frequencies follow the sinh convention of the field problem: a kernel of
frequency ``Omega`` belongs to the Lagrangian ``m/2 ldot^2 + m/2 Omega^2 l^2 + f l``
(an inverted oscillator for real ``Omega``); the ordinary oscillator of
frequency ``w`` is ``Omega = i w``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .domain import Constants, ExperimentScenario, GravitySource, Particle, PathEndpoints
from .errors import SingularKernel
from .logdomain import (
    double_sinh_moment,
    fold_right,
    half_tanh_over,
    log_sinh,
    log_sinhc,
    wrap_phase,
    z_coth,
)
from .quadrature import cumulative_simpson_matrix, simpson_weights
from .records import (
    MeasurementRecord,
    functional_F,
    functional_F1_nested,
    functional_F3,
    record_norm,
)

CAUSTIC_TOL = 1e-12


@dataclass(frozen=True)
class LogComplexAmplitude:
    """A complex amplitude stored as (log|U|, arg U); the phase is not wrapped."""

    log_magnitude: float
    phase: float

    @classmethod
    def from_log(cls, log_value) -> "LogComplexAmplitude":
        log_value = np.asarray(log_value, dtype=complex)
        if log_value.ndim == 0:
            return cls(float(log_value.real), float(log_value.imag))
        return cls(log_value.real, log_value.imag)

    @property
    def log(self):
        return self.log_magnitude + 1j * np.asarray(self.phase)

    def to_complex(self):
        return np.exp(self.log)

    @property
    def principal_phase(self):
        return wrap_phase(self.phase)

    def __mul__(self, other: "LogComplexAmplitude") -> "LogComplexAmplitude":
        return LogComplexAmplitude(self.log_magnitude + other.log_magnitude, self.phase + other.phase)

    def conj(self) -> "LogComplexAmplitude":
        return LogComplexAmplitude(self.log_magnitude, -np.asarray(self.phase) if np.ndim(self.phase) else -self.phase)

    def as_dict(self) -> dict:
        return {"log_magnitude": float(self.log_magnitude), "phase": float(self.phase)}


def relative_difference(a: LogComplexAmplitude, b: LogComplexAmplitude):
    """|a/b - 1|, computed without leaving log domain; phases compared mod 2 pi."""
    d_mag = np.asarray(a.log_magnitude) - np.asarray(b.log_magnitude)
    d_ph = wrap_phase(np.asarray(a.phase) - np.asarray(b.phase))
    out = np.abs(np.expm1(d_mag + 1j * d_ph))
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class PotentialExpansion:
    """V(l) = V0 + V1 l + V2 l^2 for the potential energy -GMm/(R + l)."""

    V0: float
    V1: float
    V2: float

    def __call__(self, l):
        return self.V0 + self.V1 * l + self.V2 * l**2


@dataclass(frozen=True)
class EffectiveParameters:
    F_const: complex
    omega_hat_sq: complex
    Omega_hat: complex
    gamma: complex
    coupling: float
    """4 hbar / (T resolution^2): the record enters the force as -i * coupling * alpha(t)."""


@dataclass(frozen=True)
class QuadraticKernel:
    c_QQ: complex
    c_PP: complex
    c_QP: complex
    c_Q: complex
    c_P: complex
    c_0: complex
    log_prefactor: complex

    def exponent(self, l_Q, l_P):
        """The braced exponent only: no prefactor, weight or constant phase."""
        return (self.c_QQ * l_Q**2 + self.c_PP * l_P**2 + self.c_QP * l_Q * l_P
                + self.c_Q * l_Q + self.c_P * l_P + self.c_0)

    def log_value(self, l_Q, l_P):
        return self.exponent(l_Q, l_P) + self.log_prefactor

    def __call__(self, l_Q, l_P) -> LogComplexAmplitude:
        return LogComplexAmplitude.from_log(self.log_value(l_Q, l_P))


@dataclass(frozen=True)
class DrivingForce:
    """f(t) = constant + samples(t); samples live on a uniform grid over the
    kernel interval and are integrated by Simpson, the constant analytically."""

    constant: complex = 0.0
    times: np.ndarray | None = None
    values: np.ndarray | None = None


def potential_expansion(source: GravitySource, particle: Particle, c: Constants) -> PotentialExpansion:
    k = c.G * source.M * particle.m / source.R
    return PotentialExpansion(V0=-k, V1=k / source.R, V2=-k / source.R**2)


def classical_frequency(source: GravitySource, c: Constants) -> float:
    """sqrt(2GM/R^3), the growth rate of the inverted oscillator."""
    return math.sqrt(2.0 * c.G * source.M / source.R**3)


def _check_duration(T: float) -> None:
    if not T > 0:
        raise ValueError(f"degenerate duration T = {T!r}")


def free_transverse_factor(endpoints: PathEndpoints, particle: Particle, c: Constants) -> LogComplexAmplitude:
    """(m / 2 pi i hbar T) exp{i m (dx^2 + dy^2) / 2 hbar T}."""
    T = endpoints.T
    _check_duration(T)
    m, hbar = particle.m, c.hbar
    d2 = (endpoints.x_Q - endpoints.x_P) ** 2 + (endpoints.y_Q - endpoints.y_P) ** 2
    return LogComplexAmplitude(math.log(m / (2 * math.pi * hbar * T)), m * d2 / (2 * hbar * T) - math.pi / 2)


def _prefactor_1d(m: float, hbar: float, T: float, z: complex) -> complex:
    """log sqrt(m Omega / (2 pi i hbar sinh(Omega T))) with the continuous branch."""
    L = log_sinhc(z)
    if not (np.isfinite(L.real) and L.real > math.log(CAUSTIC_TOL)):
        raise SingularKernel(f"|sinh(z)/z| below {CAUSTIC_TOL:g} at z = Omega T = {z}")
    return 0.5 * math.log(m / (2 * math.pi * hbar * T)) - 0.25j * math.pi - 0.5 * L


def _oscillator_quadratic_terms(m: float, hbar: float, T: float, z: complex):
    """c_QQ (= c_PP) and c_QP of a kernel with Omega T = z."""
    c_sq = 0.5j * m / (hbar * T) * z_coth(z)
    c_cross = -1j * m / (hbar * T) * np.exp(-log_sinhc(z))
    return complex(c_sq), complex(c_cross)


# -- generic driven oscillator -----------------------------------------------

def driven_oscillator_quadratic(m: float, Omega: complex, T: float, c: Constants,
                                force: DrivingForce | None = None) -> QuadraticKernel:
    """Kernel of ``m/2 ldot^2 + m/2 Omega^2 l^2 + f(t) l`` over [0, T].

    The classical action used is

        S = m/(2T) [(l_Q^2 + l_P^2) z coth z - 2 l_Q l_P z/sinh z]
            + l_Q int f sinh(Omega u)/sinh(Omega T) + l_P int f sinh(Omega (T-u))/sinh(Omega T)
            - (1/m) int_{s<t} f(t) f(s) sinh(Omega (T-t)) sinh(Omega s) / (Omega sinh(Omega T)),

    with z = Omega T.  All ratios are formed through ``log_sinhc`` so the
    result is regular at Omega -> 0 and free of overflow for large Re z.
    """
    _check_duration(T)
    force = force or DrivingForce()
    hbar = c.hbar
    Omega = fold_right(Omega)
    z = Omega * T
    log_pref = _prefactor_1d(m, hbar, T, z)
    c_sq, c_cross = _oscillator_quadratic_terms(m, hbar, T, z)

    f0 = complex(force.constant)
    I_Q = f0 * T * half_tanh_over(z)
    I_P = I_Q
    D = f0**2 * T**3 * double_sinh_moment(z)

    if force.values is not None:
        t = np.asarray(force.times, dtype=float)
        f1 = np.asarray(force.values, dtype=complex)
        if t.size < 3 or abs(t[-1] - t[0] - T) > 1e-12 * max(T, abs(t[0])):
            raise ValueError("force samples must span the kernel interval")
        n = t.size
        h = T / (n - 1)
        u = t - t[0]
        u[-1] = T
        w = simpson_weights(n, h)
        L_T = log_sinhc(z)
        ratio_fwd = (u / T) * np.exp(log_sinhc(Omega * u) - L_T)
        ratio_bwd = ratio_fwd[::-1]
        I_Q = I_Q + np.dot(w, f1 * ratio_fwd)
        I_P = I_P + np.dot(w, f1 * ratio_bwd)

        # f0 * f1 cross terms: weight of f1(t) with the constant at earlier / later times
        wA = ((T - u) * u**2 / (2 * T)) * np.exp(
            log_sinhc(Omega * (T - u)) + 2 * log_sinhc(Omega * u / 2) - L_T)
        wB = wA[::-1]
        D = D + f0 * np.dot(w, f1 * (wA + wB))

        # f1 * f1: nested quadrature on s <= t
        Wc = cumulative_simpson_matrix(n, h)
        mask = Wc != 0
        ti, sj = u[:, None], u[None, :]
        with np.errstate(invalid="ignore"):
            g = np.where(
                mask,
                ((T - ti) * sj / T) * np.exp(log_sinhc(Omega * (T - ti)) + log_sinhc(Omega * sj) - L_T),
                0.0,
            )
        inner = (Wc * g) @ f1
        D = D + np.dot(w, f1 * inner)

    return QuadraticKernel(
        c_QQ=c_sq, c_PP=c_sq, c_QP=c_cross,
        c_Q=complex(1j * I_Q / hbar), c_P=complex(1j * I_P / hbar),
        c_0=complex(-1j * D / (m * hbar)),
        log_prefactor=log_pref,
    )


def driven_oscillator_kernel(m: float, Omega: complex, l_P: float, l_Q: float, T: float,
                             c: Constants, force: DrivingForce | None = None) -> LogComplexAmplitude:
    return driven_oscillator_quadratic(m, Omega, T, c, force)(l_Q, l_P)


def frequency_from_omega_sq(omega_sq: complex) -> complex:
    """Convert the Lagrangian convention -m/2 w^2 l^2 to the sinh-convention
    frequency used by the kernels (Omega^2 = -w^2)."""
    return fold_right(cmath.sqrt(-complex(omega_sq)))


# -- unmonitored propagator ----------------------------------------------------

def unmeasured_kernel_l(scenario: ExperimentScenario) -> QuadraticKernel:
    """Height part of the unmonitored propagator, including the constant phase
    exp{i GMm T / hbar R} of the zeroth-order potential."""
    c, src, m = scenario.constants, scenario.source, scenario.particle.m
    T = scenario.T
    _check_duration(T)
    hbar, R, GM = c.hbar, src.R, scenario.GM
    Omega = classical_frequency(src, c)
    z = complex(Omega * T)
    log_pref = _prefactor_1d(m, hbar, T, z) + 1j * GM * m * T / (hbar * R)
    c_sq, c_cross = _oscillator_quadratic_terms(m, hbar, T, z)
    # R Omega (1 - cosh)/sinh = -R Omega^2 T tanh(z/2)/z
    lin = -R * Omega**2 * T * half_tanh_over(z)
    c_lin = 0.5j * m / hbar * lin
    c_0 = 0.5j * m / hbar * (-lin * R / 2 - math.sqrt(GM * R / 8) * T * Omega)
    return QuadraticKernel(c_sq, c_sq, c_cross, complex(c_lin), complex(c_lin), complex(c_0), complex(log_pref))


def unmeasured_propagator(scenario: ExperimentScenario) -> LogComplexAmplitude:
    e = scenario.endpoints
    height = unmeasured_kernel_l(scenario)(e.l_Q, e.l_P)
    return free_transverse_factor(e, scenario.particle, scenario.constants) * height


# -- monitored propagator -----------------------------------------------------

def effective_parameters(scenario: ExperimentScenario, resolution: float,
                         c: Constants | None = None) -> EffectiveParameters:
    c = c or scenario.constants
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    m, T, R = scenario.particle.m, scenario.T, scenario.source.R
    GM = c.G * scenario.source.M
    inv_res2 = 0.0 if math.isinf(resolution) else 1.0 / resolution**2
    coupling = 4.0 * c.hbar * inv_res2 / T
    omega_hat_sq = complex(-2.0 * GM / R**3, -coupling / m)
    gamma = complex(0.0, 2.0 * c.hbar * R**3 * inv_res2 / (GM * m * T))
    Omega_hat = cmath.sqrt((2.0 * GM / R**3) * (1.0 + gamma))
    return EffectiveParameters(
        F_const=complex(-GM * m / R**2),
        omega_hat_sq=omega_hat_sq,
        Omega_hat=Omega_hat,
        gamma=gamma,
        coupling=coupling,
    )


@dataclass(frozen=True)
class RecordFunctionals:
    """F1, F2, F4, F3 and the nested F1-sinh integral, each divided by
    sinh(Omega_hat T)."""

    F1: complex
    F2: complex
    F3: complex
    F4: complex
    nested: complex
    norm: float


def scaled_record_functionals(record: MeasurementRecord, Omega: complex,
                              tau_start: float, tau_end: float) -> RecordFunctionals:
    T = tau_end - tau_start
    ls = log_sinh(Omega * T)
    vals = {
        "F1": functional_F(1, record, Omega, tau_start, tau_end),
        "F2": functional_F(2, record, Omega, tau_start, tau_end),
        "F4": functional_F(4, record, Omega, tau_start, tau_end),
        "F3": functional_F3(record, Omega, tau_start, tau_end),
        "nested": functional_F1_nested(record, Omega, tau_start, tau_end),
    }
    scaled = {k: complex(v.scaled_by(ls)) for k, v in vals.items()}
    return RecordFunctionals(norm=record_norm(record).value, **scaled)


def measured_kernel_l(scenario: ExperimentScenario, record: MeasurementRecord,
                      form: str = "derived") -> QuadraticKernel:
    """Height part of the continuously monitored propagator.

    ``form="derived"`` assembles the driven-oscillator action with the complex
    force -GMm/R^2 - i coupling alpha(t) and frequency Omega_hat; this is the
    form the oracles confirm.  ``form="printed"`` evaluates the published
    closed form term by term, whose record cross term (the F2 - F4 - nested
    block) carries a different prefactor; both are exposed so the two can be
    compared.
    """
    if form not in ("derived", "printed"):
        raise ValueError(f"form must be 'derived' or 'printed', got {form!r}")
    e = scenario.endpoints
    c, m, T, R = scenario.constants, scenario.particle.m, scenario.T, scenario.source.R
    _check_duration(T)
    hbar, GM = c.hbar, scenario.GM
    p = effective_parameters(scenario, record.resolution)
    Omega = fold_right(p.Omega_hat)
    z = Omega * T
    f0 = p.F_const
    kappa = p.coupling

    weight = -kappa / (2 * hbar) * record_norm(record).value if kappa else 0.0
    log_pref = _prefactor_1d(m, hbar, T, z) + 1j * GM * m * T / (hbar * R) + weight
    c_sq, c_cross = _oscillator_quadratic_terms(m, hbar, T, z)

    if kappa:
        rf = scaled_record_functionals(record, Omega, e.tau_start, e.tau_end)
        var_Q = -1j * kappa * rf.F1
        var_P = -1j * kappa * rf.F2
        F3_term = 1j * kappa**2 * rf.F3 / (hbar * m * Omega)
    else:
        rf = None
        var_Q = var_P = F3_term = 0.0

    if form == "derived":
        const_lin = f0 * T * half_tanh_over(z)
        c_Q = 1j / hbar * (const_lin + var_Q)
        c_P = 1j / hbar * (const_lin + var_P)
        D_const = f0**2 * T**3 * double_sinh_moment(z)
        c_0 = -1j * D_const / (m * hbar) + F3_term
        if rf is not None:
            cross = -1j * kappa * f0 * ((rf.F4 - rf.F2) / Omega**2 + rf.nested / Omega)
            c_0 += -1j * cross / (m * hbar)
    else:
        R_g = R / (1 + p.gamma)
        lin = -R_g * Omega * z * half_tanh_over(z)
        root = math.sqrt(GM * R / 8) * cmath.exp(-1.5 * cmath.log(1 + p.gamma))
        c_Q = 0.5j * m / hbar * lin + 1j / hbar * var_Q
        c_P = 0.5j * m / hbar * lin + 1j / hbar * var_P
        c_0 = 0.5j * m / hbar * (-lin * R_g / 2 - root * T * Omega) + F3_term
        if rf is not None:
            c_0 += -kappa * R / (2 * hbar) * (rf.F2 - rf.F4 - rf.nested)

    return QuadraticKernel(c_sq, c_sq, c_cross, complex(c_Q), complex(c_P), complex(c_0), complex(log_pref))


def measured_propagator(scenario: ExperimentScenario, record: MeasurementRecord,
                        form: str = "derived") -> LogComplexAmplitude:
    e = scenario.endpoints
    height = measured_kernel_l(scenario, record, form)(e.l_Q, e.l_P)
    return free_transverse_factor(e, scenario.particle, scenario.constants) * height


def homogeneous_field_kernel_l(m: float, g: float, T: float, record: MeasurementRecord,
                               c: Constants, tau_start: float = 0.0) -> QuadraticKernel:
    """Monitored kernel in a uniform field of strength g: purely imaginary
    frequency w^2 = -4 i hbar / (m T resolution^2) and force -m g - i coupling alpha(t).

    No constant phase from a reference potential is included.
    """
    inv_res2 = 0.0 if math.isinf(record.resolution) else 1.0 / record.resolution**2
    coupling = 4.0 * c.hbar * inv_res2 / T
    Omega = frequency_from_omega_sq(-1j * coupling / m)
    force = DrivingForce(constant=-m * g, times=record.times,
                         values=-1j * coupling * record.values)
    k = driven_oscillator_quadratic(m, Omega, T, c, force)
    weight = -coupling / (2 * c.hbar) * record_norm(record).value
    return QuadraticKernel(k.c_QQ, k.c_PP, k.c_QP, k.c_Q, k.c_P, k.c_0, k.log_prefactor + weight)
