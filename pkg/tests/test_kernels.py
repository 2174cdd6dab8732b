import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gravmeasure.domain import (
    EARTH_MASS,
    EARTH_RADIUS,
    Constants,
    ExperimentScenario,
    GravitySource,
    Particle,
    PathEndpoints,
    resolution_for_gamma,
    toy_scenario,
)
from gravmeasure.errors import GridMismatch, SingularKernel
from gravmeasure.kernels import (
    DrivingForce,
    LogComplexAmplitude,
    classical_frequency,
    driven_oscillator_kernel,
    driven_oscillator_quadratic,
    effective_parameters,
    free_transverse_factor,
    frequency_from_omega_sq,
    measured_kernel_l,
    measured_propagator,
    potential_expansion,
    relative_difference,
    unmeasured_kernel_l,
    unmeasured_propagator,
)
from gravmeasure.records import make_record, zero_record

TOY = Constants.toy()


def close(a: LogComplexAmplitude, b, tol):
    return relative_difference(a, b) <= tol


def test_potential_expansion_examples():
    p = potential_expansion(GravitySource(1, 1), Particle(1), TOY)
    assert (p.V0, p.V1, p.V2) == (-1, 1, -1)
    p = potential_expansion(GravitySource(1, 2), Particle(1), TOY)
    assert (p.V0, p.V1, p.V2) == (-0.5, 0.25, -0.125)


def test_potential_expansion_taylor():
    src, part = GravitySource(EARTH_MASS, EARTH_RADIUS), Particle(1.675e-27)
    p = potential_expansion(src, part, Constants())
    l = 1e-3 * src.R
    exact = -Constants().G * src.M * part.m / (src.R + l)
    assert abs(p(l) - exact) / abs(exact) < 1e-8


def test_classical_frequency():
    assert classical_frequency(GravitySource(1, 1), TOY) == pytest.approx(math.sqrt(2))
    assert classical_frequency(GravitySource(2, 2), TOY) == pytest.approx(math.sqrt(0.5))
    assert classical_frequency(GravitySource(), Constants()) == pytest.approx(1.756e-3, rel=1e-3)


def test_free_transverse_factor():
    f = free_transverse_factor(PathEndpoints(tau_end=2 * math.pi), Particle(1), TOY)
    assert f.log_magnitude == pytest.approx(-math.log(4 * math.pi**2))
    assert f.phase == pytest.approx(-math.pi / 2)
    g = free_transverse_factor(PathEndpoints(x_Q=1.0), Particle(1), TOY)
    assert g.phase == pytest.approx(0.5 - math.pi / 2)
    h = free_transverse_factor(PathEndpoints(x_Q=3.0, y_Q=-2.0), Particle(1), TOY)
    assert h.log_magnitude == free_transverse_factor(PathEndpoints(), Particle(1), TOY).log_magnitude
    with pytest.raises(ValueError):
        free_transverse_factor(PathEndpoints(tau_end=0.0), Particle(1), TOY)


def free_1d(m, hbar, lP, lQ, T):
    return 0.5 * cmath.log(m / (2j * math.pi * hbar * T)) + 1j * m * (lQ - lP) ** 2 / (2 * hbar * T)


def test_driven_kernel_free_limit():
    k = driven_oscillator_kernel(1.0, 1e-6, 0.1, 0.4, 1.0, TOY)
    assert relative_difference(k, LogComplexAmplitude.from_log(free_1d(1, 1, 0.1, 0.4, 1.0))) < 1e-8


def test_driven_kernel_real_frequency_zero_heights():
    k = driven_oscillator_kernel(1.0, 1.0, 0.0, 0.0, 1.0, TOY)
    assert math.exp(k.log_magnitude) == pytest.approx(math.sqrt(1 / (2 * math.pi * math.sinh(1))), rel=1e-14)
    q = driven_oscillator_quadratic(1.0, 1.0, 1.0, TOY)
    assert q.exponent(0.0, 0.0) == 0


@pytest.mark.parametrize("lP, lQ, T", [(0.0, 0.3, 1.0), (0.2, -0.1, 2.0), (0.5, 0.5, 0.4)])
def test_driven_kernel_imaginary_frequency_is_ordinary_oscillator(lP, lQ, T):
    k = driven_oscillator_kernel(1.0, 1j, lP, lQ, T, TOY)
    s, c = math.sin(T), math.cos(T)
    ref = (0.5 * cmath.log(1 / (2j * math.pi * s))
           + 1j / (2 * s) * ((lQ**2 + lP**2) * c - 2 * lQ * lP))
    assert relative_difference(k, LogComplexAmplitude.from_log(ref)) < 1e-12


def test_driven_kernel_at_caustic_is_refused():
    with pytest.raises(SingularKernel):
        driven_oscillator_kernel(1.0, 1j, 0.0, 0.1, math.pi, TOY)


def test_sampled_force_matches_constant_force():
    t = np.linspace(0, 1.3, 513)
    a = driven_oscillator_quadratic(1.0, 0.7 + 0.2j, 1.3, TOY, DrivingForce(constant=-0.4 + 0.1j))
    b = driven_oscillator_quadratic(1.0, 0.7 + 0.2j, 1.3, TOY,
                                    DrivingForce(times=t, values=np.full(t.size, -0.4 + 0.1j)))
    for l in [(0.0, 0.0), (0.3, -0.2)]:
        assert abs(a.log_value(*l) - b.log_value(*l)) < 1e-10


def test_printed_unmeasured_exponent_matches_assembly():
    for R, lP, lQ, T in [(1, 0.1, 0.25, 1), (2, 0.0, 0.3, 0.5), (1, 0, 0, 1), (0.7, -0.05, 0.02, 2.2)]:
        s = toy_scenario(l_P=lP, l_Q=lQ, T=T, R=R)
        W = math.sqrt(2 / R**3)
        sh, ch = math.sinh(W * T), math.cosh(W * T)
        braced = ((lQ**2 + lP**2) * ch - 2 * lQ * lP + R * (1 - ch) * (lQ + lP - R / 2)
                  - math.sqrt(R / 8) * T * sh)
        printed = 1j * W / (2 * sh) * braced
        assert abs(unmeasured_kernel_l(s).exponent(lQ, lP) - printed) < 1e-14


def test_unmeasured_equals_generic_driven_kernel():
    s = toy_scenario(l_P=0.1, l_Q=0.25, R=1.5, M=2.0)
    e = s.endpoints
    generic = driven_oscillator_kernel(1.0, classical_frequency(s.source, TOY), e.l_P, e.l_Q, 1.0, TOY,
                                       DrivingForce(constant=-s.GM / s.source.R**2))
    phase = LogComplexAmplitude(0.0, s.GM * s.T / s.source.R)
    assert relative_difference(unmeasured_kernel_l(s)(e.l_Q, e.l_P), generic * phase) < 1e-13


def test_unmeasured_gm_to_zero_is_free():
    s = toy_scenario(l_P=0.1, l_Q=0.3, M=1e-12)
    e = s.endpoints
    free3 = free_transverse_factor(e, s.particle, TOY) * LogComplexAmplitude.from_log(free_1d(1, 1, 0.1, 0.3, 1))
    assert relative_difference(unmeasured_propagator(s), free3) < 1e-8


def test_effective_parameters_examples():
    s = toy_scenario()
    p = effective_parameters(s, math.sqrt(2))
    assert p.gamma == pytest.approx(1j)
    p = effective_parameters(s, 1.0)
    assert p.Omega_hat**2 == pytest.approx(2 + 4j, rel=1e-15)
    assert p.Omega_hat.real == pytest.approx(1.799, abs=1e-3)
    assert p.Omega_hat.imag == pytest.approx(1.112, abs=1e-3)
    assert p.omega_hat_sq == pytest.approx(-2 - 4j)
    inf = effective_parameters(s, math.inf)
    assert inf.gamma == 0 and inf.Omega_hat == pytest.approx(math.sqrt(2))
    with pytest.raises(ValueError):
        effective_parameters(s, 0.0)


@settings(max_examples=200)
@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(1e-2, 1e2))
def test_effective_frequency_identity(M, R, res):
    s = toy_scenario(M=M, R=R)
    p = effective_parameters(s, res)
    assert abs(p.Omega_hat**2 - (2 * M / R**3) * (1 + p.gamma)) <= 1e-14 * abs(p.Omega_hat**2)


def test_measured_huge_resolution_is_unmeasured():
    s = toy_scenario(l_P=0.1, l_Q=0.25)
    rec = zero_record(0.0, 1.0, resolution_for_gamma(s, 0.5) * 1e4, 1025)
    assert relative_difference(measured_propagator(s, rec), unmeasured_propagator(s)) <= 1e-6


def test_measured_infinite_resolution_is_exactly_unmeasured():
    s = toy_scenario(l_P=0.1, l_Q=0.25)
    rec = zero_record(0.0, 1.0, math.inf)
    assert relative_difference(measured_propagator(s, rec), unmeasured_propagator(s)) < 1e-14


def test_measured_requires_matching_span():
    s = toy_scenario(l_P=0.1, l_Q=0.25)
    with pytest.raises(GridMismatch):
        measured_propagator(s, make_record("constant", 0.0, 0.9, 101, 1.0, c=0.0))


def test_forms_agree_without_record_signal():
    # printed and derived differ only in the record cross term
    s = toy_scenario(l_P=0.1, l_Q=0.25)
    rec = zero_record(0.0, 1.0, 1.0, 1025)
    assert relative_difference(measured_propagator(s, rec, "printed"), measured_propagator(s, rec)) < 1e-13
    with pytest.raises(ValueError):
        measured_kernel_l(s, rec, "guess")


def test_derived_form_equals_generic_complex_force_kernel():
    s = toy_scenario(l_P=0.1, l_Q=0.25)
    res = resolution_for_gamma(s, 2.0)
    rec = make_record("sinusoid", 0.0, 1.0, 1025, res, A=0.2, omega0=2 * math.pi)
    p = effective_parameters(s, res)
    force = DrivingForce(constant=p.F_const, times=rec.times, values=-1j * p.coupling * rec.values)
    k = driven_oscillator_quadratic(1.0, p.Omega_hat, 1.0, TOY, force)
    e = s.endpoints
    a = measured_kernel_l(s, rec)
    # same exponent; the prefactors differ by the weight and the constant phase only
    assert abs(a.exponent(e.l_Q, e.l_P) - k.exponent(e.l_Q, e.l_P)) < 1e-9


def test_si_scale_measured_propagator_is_finite():
    earth = ExperimentScenario(Constants(), GravitySource(), Particle(), PathEndpoints(l_P=0.01, l_Q=0.02))
    rec = make_record("free_fall", 0.0, 1.0, 1001, 2e-6, l0=0.01, v0=0.0, g=9.8)
    u = measured_propagator(earth, rec)
    assert math.isfinite(u.log_magnitude) and math.isfinite(u.phase)


def test_log_amplitude_helpers():
    a = LogComplexAmplitude(0.5, 7.0)
    assert a.principal_phase == pytest.approx(7.0 - 2 * math.pi)
    assert a.conj().phase == -7.0
    assert (a * a.conj()).phase == 0
    assert relative_difference(a, LogComplexAmplitude(0.5, 7.0 - 2 * math.pi)) < 1e-15
    assert a.as_dict() == {"log_magnitude": 0.5, "phase": 7.0}


def test_frequency_conversion():
    assert frequency_from_omega_sq(-2.0) == pytest.approx(math.sqrt(2))
    assert frequency_from_omega_sq(1.0) == pytest.approx(1j)


@settings(max_examples=100)
@given(st.floats(0.05, 10.0), st.floats(-3.0, 3.0), st.floats(-1, 1), st.floats(-1, 1))
def test_log_domain_matches_direct_evaluation(a, b, lP, lQ):
    W = complex(a, b)
    if abs(cmath.sinh(W)) < 1e-3:
        return
    k = driven_oscillator_kernel(1.0, W, lP, lQ, 1.0, TOY)
    sh, ch = cmath.sinh(W), cmath.cosh(W)
    direct = cmath.sqrt(W / (2j * math.pi * sh)) * cmath.exp(1j * W / (2 * sh) * ((lQ**2 + lP**2) * ch - 2 * lQ * lP))
    assert abs(k.to_complex() - direct) <= 1e-12 * abs(direct) or abs(k.to_complex() + direct) <= 1e-12 * abs(direct)
    assert abs(abs(k.to_complex()) - abs(direct)) <= 1e-12 * abs(direct)


def test_phase_is_continuous_along_duration_sweep():
    phases = [unmeasured_propagator(toy_scenario(l_P=0.1, l_Q=0.25, T=T)).phase for T in np.linspace(0.2, 3.0, 300)]
    assert np.max(np.abs(np.diff(phases))) < 0.5
