"""Interference between two monitored beams sharing endpoints P and Q.

Each beam has its own record and resolution.  The five closed-form terms
I1..I5 are evaluated exactly as written in terms of the split frequencies,
and compared with a direct cross term built from the two monitored
propagators.  The closed-form terms are real parts of the exponent of
U_alpha * conj(U_beta); the report therefore carries both the direct phase
and the direct log contrast of the braced exponents.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, fields

import numpy as np

from .domain import Constants, ExperimentScenario, gamma_parameter
from .errors import DegenerateDenominator
from .kernels import measured_kernel_l, measured_propagator, scaled_record_functionals
from .logdomain import wrap_phase
from .records import MeasurementRecord, _check_span, functional_f

ASYMPTOTIC_SWITCH = 30.0
DENOMINATOR_FLOOR = 1e-300


@dataclass(frozen=True)
class SplitFrequency:
    tilde: float
    check: float
    gamma_param: float
    branch: str

    def __post_init__(self):
        if self.branch not in ("alpha", "beta"):
            raise ValueError(f"branch must be 'alpha' or 'beta', got {self.branch!r}")

    @property
    def complex(self) -> complex:
        return complex(self.tilde, self.check)


def split_frequency(scenario: ExperimentScenario, resolution: float, branch: str = "alpha",
                    c: Constants | None = None) -> SplitFrequency:
    """Polar decomposition of sqrt((2GM/R^3)(1 +- i g)), g the dimensionless
    measurement strength; the beta branch takes the negative half angle."""
    c = c or scenario.constants
    sc = scenario if c is scenario.constants else ExperimentScenario(c, scenario.source, scenario.particle,
                                                                    scenario.endpoints, scenario.validity_ratio)
    g = gamma_parameter(sc, resolution)
    base = math.sqrt(2.0 * c.G * scenario.source.M / scenario.source.R**3)
    radius = base * (1.0 + g * g) ** 0.25
    half = 0.5 * math.atan(g)
    if branch == "beta":
        half = -half
    elif branch != "alpha":
        raise ValueError(f"branch must be 'alpha' or 'beta', got {branch!r}")
    return SplitFrequency(radius * math.cos(half), radius * math.sin(half), g, branch)


@dataclass(frozen=True)
class BeamPair:
    scenario: ExperimentScenario
    record_alpha: MeasurementRecord
    record_beta: MeasurementRecord

    def __post_init__(self):
        e = self.scenario.endpoints
        _check_span(self.record_alpha, e.tau_start, e.tau_end)
        _check_span(self.record_beta, e.tau_start, e.tau_end)

    def swapped(self) -> "BeamPair":
        return BeamPair(self.scenario, self.record_beta, self.record_alpha)

    @property
    def split_alpha(self) -> SplitFrequency:
        return split_frequency(self.scenario, self.record_alpha.resolution, "alpha")

    @property
    def split_beta(self) -> SplitFrequency:
        return split_frequency(self.scenario, self.record_beta.resolution, "beta")


@dataclass(frozen=True)
class _Trig:
    """Hyperbolic-trigonometric ratios of one beam.

    With k = 0 (direct) or k = aT (scaled, used once 2aT exceeds the switch):
    ``rS = rS_s exp(-k)``, ``rC = rC_s exp(-k)``, ``cc = cc_s exp(k)``,
    ``ss = ss_s exp(k)``; products rS*cc etc. are therefore plain products of
    the stored values.
    """

    r1: float
    rS_s: float
    rC_s: float
    cc_s: float
    ss_s: float
    k: float


def _trig(a: float, b: float, T: float, force_scaled: bool | None = None) -> _Trig:
    aT, bT = a * T, b * T
    scaled = 2 * aT > ASYMPTOTIC_SWITCH if force_scaled is None else force_scaled
    if scaled:
        e2 = math.exp(-2 * aT)
        sh, ch = 0.5 * (1 - e2), 0.5 * (1 + e2)
        D = 0.5 * (1 + e2 * e2) - math.cos(2 * bT) * e2
        r1 = (a * math.sin(2 * bT) * e2 - b * 0.5 * (1 - e2 * e2)) / D
        k = aT
        cc = math.exp(-aT) - ch * math.cos(bT)
    else:
        sh, ch = math.sinh(aT), math.cosh(aT)
        D = math.cosh(2 * aT) - math.cos(2 * bT)
        if D < DENOMINATOR_FLOOR:
            raise DegenerateDenominator(f"cosh(2aT) - cos(2bT) = {D!r} at aT = {aT!r}, bT = {bT!r}")
        r1 = (a * math.sin(2 * bT) - b * math.sinh(2 * aT)) / D
        k = 0.0
        cc = 1 - ch * math.cos(bT)
    rS = (-b * sh * math.cos(bT) + a * ch * math.sin(bT)) / D
    rC = (b * ch * math.sin(bT) + a * sh * math.cos(bT)) / D
    ss = sh * math.sin(bT)
    return _Trig(r1, rS, rC, cc, ss, k)


def _coupling(T: float, res: float) -> float:
    """8 / (T res^2), zero for an unmonitored beam."""
    return 0.0 if math.isinf(res) else 8.0 / (T * res**2)


def _pieces(pair: BeamPair):
    s = pair.scenario
    c = s.constants
    sa, sb = pair.split_alpha, pair.split_beta
    T = s.T
    return s, c, sa, sb, T, _trig(sa.tilde, sa.check, T), _trig(sb.tilde, sb.check, T)


def term_I1(pair: BeamPair) -> float:
    s, c, sa, sb, T, ta, tb = _pieces(pair)
    e = s.endpoints
    m = s.particle.m
    return m / (2 * c.hbar) * (e.l_Q**2 + e.l_P**2) * (ta.r1 - tb.r1)


def term_I2(pair: BeamPair) -> float:
    s, c, sa, sb, T, ta, tb = _pieces(pair)
    e = s.endpoints
    m, hbar = s.particle.m, c.hbar
    g, eta = sa.gamma_param, sb.gamma_param
    first = -2 * e.l_Q * e.l_P * m / hbar * (ta.rS_s * math.exp(-ta.k) - tb.rS_s * math.exp(-tb.k))
    blk_a = (1 + g * g) ** -0.75 * (-sa.check * math.cos(1.5 * math.atan(g))
                                    + sa.tilde * math.sin(1.5 * math.atan(g)))
    blk_b = (1 + eta * eta) ** -0.75 * (-sb.check * math.cos(-1.5 * math.atan(eta))
                                        + sb.tilde * math.sin(-1.5 * math.atan(eta)))
    second = m * T / (2 * hbar) * math.sqrt(c.G * s.source.M * s.source.R / 8) * (blk_a - blk_b)
    return first + second


def term_I3(pair: BeamPair) -> float:
    s, c, sa, sb, T, ta, tb = _pieces(pair)
    e = s.endpoints
    R = s.source.R
    mh = s.particle.m / c.hbar
    lsum = e.l_Q + e.l_P
    g, eta = sa.gamma_param, sb.gamma_param
    qa, qb = 1 + g * g, 1 + eta * eta
    shift_a = lsum - R * (1 - g * g) / (2 * qa)
    shift_b = lsum - R * (1 - eta * eta) / (2 * qb)

    out = mh * ta.rS_s * (ta.cc_s * R / qa * shift_a + R * g / qa * (R / qa - lsum) * ta.ss_s)
    out -= mh * ta.rC_s * (ta.cc_s * R * g / qa * (R / qa - lsum) - R / qa * shift_a * ta.ss_s)
    out -= mh * tb.rS_s * (tb.cc_s * R / qb * shift_b + R * eta / qb * (lsum - R / qb) * tb.ss_s)
    out += mh * tb.rC_s * (tb.cc_s * R * eta / qb * (lsum - R / qb) - R / qb * shift_b * tb.ss_s)
    return float(out)


def term_I4(pair: BeamPair) -> float:
    s, c, sa, sb, T, ta, tb = _pieces(pair)
    e = s.endpoints
    t0, t1 = e.tau_start, e.tau_end
    ra, rb = pair.record_alpha, pair.record_beta

    def beam(split, trig, rec, v_sc, v_cs, sign_first):
        kappa = _coupling(T, rec.resolution)
        if kappa == 0.0:
            return 0.0
        f = {}
        for v in (v_sc, v_cs):
            for tl in (False, True):
                fv = functional_f(v, tl, rec, split, t0, t1)
                f[v, tl] = fv.value * math.exp(fv.log_scale - trig.k)
        A = e.l_Q * f[v_sc, False] + e.l_P * f[v_sc, True]
        B = e.l_Q * f[v_cs, False] + e.l_P * f[v_cs, True]
        a, b = split.tilde, split.check
        n2 = a * a + b * b
        return kappa * (trig.rC_s * (a / n2 * A + b / n2 * B)
                        + trig.rS_s * (sign_first * b / n2 * A + (-sign_first) * a / n2 * B))

    # alpha: rS block carries [check A - tilde B]; beta: [-check A + tilde B]
    return float(beam(sa, ta, ra, 1, 2, +1) - beam(sb, tb, rb, 3, 4, -1))


def term_I5(pair: BeamPair) -> float:
    s = pair.scenario
    c = s.constants
    e = s.endpoints
    m, hbar, T, R = s.particle.m, c.hbar, s.T, s.source.R
    GM = c.G * s.source.M
    total = 0.0j
    for rec, split, sign in ((pair.record_alpha, pair.split_alpha, +1),
                             (pair.record_beta, pair.split_beta, -1)):
        if math.isinf(rec.resolution):
            continue
        W = split.complex
        one_pm = 1 + 1j * sign * split.gamma_param
        rf = scaled_record_functionals(rec, W, e.tau_start, e.tau_end)
        lam = 4 * hbar / (T * rec.resolution**2 * m)
        A = 1j * m * W / (2 * hbar) * lam**2 * R**3 / (GM * one_pm)
        B = -2 * R * W / (T * rec.resolution**2) * cmath.sqrt(R**3 / (2 * GM * one_pm))
        total += sign * A * rf.F3 + sign * B * (rf.F2 - rf.F4 - rf.nested)
    return float(total.real)


@dataclass(frozen=True)
class DirectCrossTerm:
    phase: float
    log_contrast: float
    phase_unwrapped: float


def direct_cross_phase(pair: BeamPair) -> DirectCrossTerm:
    """Phase of U_alpha conj(U_beta) from the two monitored propagators
    (principal value) and log|U_alpha| + log|U_beta|."""
    ua = measured_propagator(pair.scenario, pair.record_alpha)
    ub = measured_propagator(pair.scenario, pair.record_beta)
    raw = float(ua.phase - ub.phase)
    return DirectCrossTerm(float(wrap_phase(raw)), float(ua.log_magnitude + ub.log_magnitude), raw)


def exponent_log_contrast(pair: BeamPair) -> float:
    """Re of the braced exponents of U_alpha and conj(U_beta), without
    prefactors, weights or constant phases."""
    e = pair.scenario.endpoints
    ka = measured_kernel_l(pair.scenario, pair.record_alpha)
    kb = measured_kernel_l(pair.scenario, pair.record_beta)
    return float(ka.exponent(e.l_Q, e.l_P).real + kb.exponent(e.l_Q, e.l_P).real)


@dataclass(frozen=True)
class InterferenceReport:
    I1: float
    I2: float
    I3: float
    I4: float
    I5: float
    I_total: float
    direct_phase: float
    direct_log_contrast: float
    deviation: float
    exponent_log_contrast: float
    deviation_log_contrast: float
    phase_is_principal: bool = True

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def csv_header(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def csv_row(self) -> list:
        return [getattr(self, f.name) for f in fields(self)]


def interference_report(pair: BeamPair) -> InterferenceReport:
    terms = [term_I1(pair), term_I2(pair), term_I3(pair), term_I4(pair), term_I5(pair)]
    total = terms[0] + terms[1] + terms[2] + terms[3] + terms[4]
    direct = direct_cross_phase(pair)
    elc = exponent_log_contrast(pair)
    vals = [float(t) for t in terms] + [float(total)]
    if not all(np.isfinite(vals)):
        raise ArithmeticError("non-finite interference term")
    return InterferenceReport(
        *vals,
        direct_phase=direct.phase,
        direct_log_contrast=direct.log_contrast,
        deviation=abs(total - direct.phase),
        exponent_log_contrast=elc,
        deviation_log_contrast=abs(total - elc),
    )
