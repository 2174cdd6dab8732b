"""Verification inventory: oracle agreement, limits, convergence orders and
numerical stability, each check returning measured values against a
tolerance.  Used by ``gravmeasure verify`` and by the acceptance tests."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .corpus import CORPUS, CorpusEntry, corpus_entry
from .domain import (
    EARTH_MASS,
    EARTH_RADIUS,
    NEUTRON_MASS,
    Constants,
    ExperimentScenario,
    GravitySource,
    Particle,
    PathEndpoints,
    resolution_for_gamma,
    toy_scenario,
)
from .interference import (
    BeamPair,
    direct_cross_phase,
    interference_report,
    split_frequency,
    term_I4,
    term_I5,
)
from .kernels import (
    LogComplexAmplitude,
    driven_oscillator_kernel,
    homogeneous_field_kernel_l,
    measured_kernel_l,
    measured_propagator,
    relative_difference,
    unmeasured_kernel_l,
    unmeasured_propagator,
)
from .logdomain import wrap_phase
from .oracle import (
    EffectiveHamiltonianSpec,
    SpatialGrid,
    WavePacket,
    compare_l2,
    compose_over_midpoint,
    evolve,
    propagate_closed_form,
    time_sliced_kernel,
)
from .records import functional_F, functional_F3, make_record, zero_record

ORACLE_GRID = SpatialGrid(-20.0, 20.0, 2001)
CN_STEPS = 1024
SLICES = 256


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool
    relation: str = "<="
    detail: str = ""

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "relation": self.relation,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "detail": self.detail,
        }


def _upper(name, value, tol, scale=1.0, detail=""):
    t = tol * scale
    return CheckResult(name, float(value), t, bool(np.isfinite(value) and value <= t), "<=", detail)


def _lower(name, value, tol, scale=1.0, detail=""):
    t = tol / scale
    return CheckResult(name, float(value), t, bool(np.isfinite(value) and value >= t), ">=", detail)


def _monotone_detail(errors) -> str:
    return " > ".join(f"{e:.3e}" for e in errors)


def _is_decreasing(errors) -> bool:
    return all(b < a for a, b in zip(errors, errors[1:]))


# -- oracle triangle -----------------------------------------------------------

def cn_vs_closed_form(entry: CorpusEntry, steps: int = CN_STEPS, grid: SpatialGrid = ORACLE_GRID) -> dict:
    s = entry.scenario()
    rec = entry.record()
    packet = WavePacket.gaussian(grid, entry.packet_center, entry.packet_width, entry.packet_momentum)
    spec = EffectiveHamiltonianSpec.from_scenario(s, rec)
    psi_cn = evolve(spec, packet, grid, s.T, steps)
    psi_cf = propagate_closed_form(measured_kernel_l(s, rec), packet)
    return compare_l2(psi_cf, psi_cn)


def sliced_vs_closed_form(entry: CorpusEntry, N: int = SLICES) -> dict:
    s = entry.scenario()
    rec = entry.record()
    sliced = time_sliced_kernel(s, N, rec)
    closed = measured_kernel_l(s, rec)(s.endpoints.l_Q, s.endpoints.l_P)
    return {
        "extrapolated": relative_difference(sliced.value, closed),
        "raw": relative_difference(sliced.raw_N, closed),
        "raw_half": relative_difference(sliced.raw_half, closed),
    }


def check_cn_oracle(scale=1.0, entries=CORPUS):
    out = []
    for e in entries:
        r = cn_vs_closed_form(e)
        out.append(_upper(f"cn_vs_closed_form[{e.name}]", r["relative_l2_unaligned"], 1e-4, scale,
                          f"aligned {r['relative_l2']:.3e}"))
    return out


def check_sliced_oracle(scale=1.0, entries=CORPUS):
    out = []
    for e in entries:
        r = sliced_vs_closed_form(e)
        out.append(_upper(f"sliced_vs_closed_form[{e.name}]", r["extrapolated"], 1e-6, scale,
                          f"raw N={SLICES}: {r['raw']:.3e}"))
    s = toy_scenario(l_P=0.0, l_Q=0.01, T=0.1)
    r = relative_difference(time_sliced_kernel(s, SLICES).value, unmeasured_kernel_l(s)(0.01, 0.0))
    out.append(_upper("sliced_vs_unmeasured[T=0.1]", r, 1e-6, scale))
    return out


def check_sliced_order(scale=1.0, entries=CORPUS):
    out = []
    for e in entries:
        s, rec = e.scenario(), e.record()
        closed = measured_kernel_l(s, rec)(s.endpoints.l_Q, s.endpoints.l_P)
        errs = [relative_difference(time_sliced_kernel(s, N, rec).raw_N, closed) for N in (32, 64, 128)]
        ratio = min(errs[0] / errs[1], errs[1] / errs[2])
        out.append(_lower(f"sliced_order[{e.name}]", ratio, 3.5, scale, _monotone_detail(errs)))
    return out


def check_cn_order(scale=1.0, entries=(corpus_entry("strong_sinusoid"), corpus_entry("unmonitored"))):
    out = []
    for e in entries:
        s, rec = e.scenario(), e.record()
        grid = ORACLE_GRID
        packet = WavePacket.gaussian(grid, e.packet_center, e.packet_width, e.packet_momentum)
        spec = EffectiveHamiltonianSpec.from_scenario(s, rec)
        ref = evolve(spec, packet, grid, s.T, 4096)
        errs = [compare_l2(ref, evolve(spec, packet, grid, s.T, n))["relative_l2_unaligned"]
                for n in (128, 256)]
        out.append(_lower(f"cn_order[{e.name}]", errs[0] / errs[1], 3.5, scale, _monotone_detail(errs)))
    return out


def check_semigroup(scale=1.0, entries=CORPUS):
    out = []
    seen = set()
    for e in entries:
        s = e.scenario()
        key = (s.endpoints.l_P, s.endpoints.l_Q)
        if key in seen:
            continue
        seen.add(key)
        half = s.with_endpoints(tau_end=s.T / 2)
        k_half = unmeasured_kernel_l(half)
        composed = compose_over_midpoint(k_half, k_half, s.endpoints.l_P, s.endpoints.l_Q)
        direct = unmeasured_kernel_l(s).log_value(s.endpoints.l_Q, s.endpoints.l_P)
        out.append(_upper(f"semigroup[l_P={key[0]}, l_Q={key[1]}]", abs(np.expm1(composed - direct)), 1e-6, scale))
    for T in (0.3, 2.0):
        s = toy_scenario(l_P=-0.4, l_Q=0.7, T=T)
        half = s.with_endpoints(tau_end=T / 2)
        k_half = unmeasured_kernel_l(half)
        composed = compose_over_midpoint(k_half, k_half, -0.4, 0.7)
        direct = unmeasured_kernel_l(s).log_value(0.7, -0.4)
        out.append(_upper(f"semigroup[T={T}]", abs(np.expm1(composed - direct)), 1e-6, scale))
    return out


# -- limits --------------------------------------------------------------------

def check_limit_resolution(scale=1.0):
    s = toy_scenario(l_P=0.1, l_Q=0.25)
    ref = unmeasured_propagator(s)
    errs = []
    for res in (1e2, 1e3, 1e4):
        errs.append(relative_difference(measured_propagator(s, zero_record(0.0, 1.0, res, 1025)), ref))
    r = _upper("limit_resolution_to_unmeasured", errs[-1], 1e-6, scale, _monotone_detail(errs))
    return [r, CheckResult("limit_resolution_monotone", float(_is_decreasing(errs)), 1.0,
                           _is_decreasing(errs), "==", _monotone_detail(errs))]


def check_limit_gm(scale=1.0):
    c = Constants.toy()
    errs = []
    for M in (1e-8, 1e-9, 1e-10):
        s = toy_scenario(l_P=0.1, l_Q=0.25, M=M)
        e = s.endpoints
        free_l = driven_oscillator_kernel(1.0, 0.0, e.l_P, e.l_Q, 1.0, c)
        errs.append(relative_difference(unmeasured_kernel_l(s)(e.l_Q, e.l_P), free_l))
    r = _upper("limit_gm_to_free", errs[-1], 1e-8, scale, _monotone_detail(errs))
    return [r, CheckResult("limit_gm_monotone", float(_is_decreasing(errs)), 1.0,
                           _is_decreasing(errs), "==", _monotone_detail(errs))]


def check_limit_homogeneous(scale=1.0):
    """R -> infinity at fixed g: the monitored kernel tends to the uniform-field
    kernel; the constant phase GMmT/(hbar R) of the reference potential is
    removed before comparing."""
    c = Constants.toy()
    g = 1.0
    rec = make_record("sinusoid", 0.0, 1.0, 1025, 1.0, A=0.2, omega0=2 * math.pi)
    h = homogeneous_field_kernel_l(1.0, g, 1.0, rec, c).log_value(0.25, 0.1)
    errs = []
    for R in (1e2, 1e3, 1e4):
        s = toy_scenario(l_P=0.1, l_Q=0.25, R=R, M=g * R * R)
        d = measured_kernel_l(s, rec).log_value(0.25, 0.1) - h - 1j * g * R
        errs.append(abs(np.expm1(complex(d.real, wrap_phase(d.imag)))))
    ok = _is_decreasing(errs)
    return [CheckResult("limit_homogeneous_monotone", float(ok), 1.0, ok, "==", _monotone_detail(errs))]


# -- closed-form properties -----------------------------------------------------

def check_split_identity(scale=1.0, draws=10_000, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    base = toy_scenario()
    for _ in range(draws):
        R = 10 ** rng.uniform(-1, 1)
        M = 10 ** rng.uniform(-1, 1)
        g_t = 10 ** rng.uniform(-4, 4)
        s = ExperimentScenario(base.constants, GravitySource(M, R), base.particle, base.endpoints, math.inf)
        res = resolution_for_gamma(s, g_t)
        w2 = 2 * M / R**3
        for branch, sign in (("alpha", 1), ("beta", -1)):
            sp = split_frequency(s, res, branch)
            target = w2 * complex(1, sign * sp.gamma_param)
            worst = max(worst, abs(sp.complex**2 - target) / abs(target))
    return [_upper("split_frequency_identity", worst, 1e-13, scale, f"{draws} draws, both branches")]


def check_trivial_zero(scale=1.0, entries=CORPUS):
    worst_phase, worst_terms = 0.0, 0.0
    for e in entries:
        s, rec = e.scenario(), e.record()
        worst_phase = max(worst_phase, abs(direct_cross_phase(BeamPair(s, rec, rec)).phase))
        z_a = zero_record(0.0, 1.0, e.resolution if e.gamma_tilde else math.inf, 1025)
        z_b = zero_record(0.0, 1.0, resolution_for_gamma(s, 1.0), 1025)
        pair = BeamPair(s, z_a, z_b)
        worst_terms = max(worst_terms, abs(term_I4(pair)), abs(term_I5(pair)))
    return [_upper("identical_beams_direct_phase", worst_phase, 1e-12, scale),
            _upper("zero_records_I4_I5", worst_terms, 1e-12, scale)]


def check_resolution_induced(scale=1.0, entries=CORPUS):
    best = 0.0
    for e in entries:
        s, rec = e.scenario(), e.record()
        other = rec.with_resolution(resolution_for_gamma(s, 1.0 if e.gamma_tilde != 1.0 else 2.0))
        best = max(best, abs(direct_cross_phase(BeamPair(s, rec, other)).phase))
    return [_lower("resolution_induced_phase", best, 1e-6, scale)]


def check_simpson_order(scale=1.0):
    W = 1.3 + 0.7j
    out = []
    ref_rec = make_record("sinusoid", 0.0, 1.0, 4097, 1.0, A=1.0, omega0=3.0, phi=0.4)
    for label, fn in (("F2", lambda r: functional_F(2, r, W, 0.0, 1.0)),
                      ("F4", lambda r: functional_F(4, r, W, 0.0, 1.0)),
                      ("F3", lambda r: functional_F3(r, W, 0.0, 1.0))):
        ref = fn(ref_rec).full
        errs = []
        for n in (33, 65, 129):
            rec = make_record("sinusoid", 0.0, 1.0, n, 1.0, A=1.0, omega0=3.0, phi=0.4)
            errs.append(abs(fn(rec).full - ref))
        ratio = min(errs[0] / errs[1], errs[1] / errs[2])
        out.append(_lower(f"simpson_order[{label}]", ratio, 12.0, scale, _monotone_detail(errs)))
    return out


def earth_scenario(T: float = 1.0, l_P: float = 0.01, l_Q: float = 0.02) -> ExperimentScenario:
    return ExperimentScenario(Constants(), GravitySource(EARTH_MASS, EARTH_RADIUS), Particle(NEUTRON_MASS),
                              PathEndpoints(l_P=l_P, l_Q=l_Q, tau_start=0.0, tau_end=T))


def resolution_for_growth(scenario: ExperimentScenario, two_a_T: float) -> float:
    """Resolution at which 2 * Re(Omega_hat) * T equals ``two_a_T``."""
    c, src = scenario.constants, scenario.source
    w = math.sqrt(2 * c.G * src.M / src.R**3)
    a = two_a_T / (2 * scenario.T)
    # a = w (1 + g^2)^(1/4) cos(atan(g)/2), solved for g by bisection in log space
    lo, hi = -6.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        g = 10**mid
        val = w * (1 + g * g) ** 0.25 * math.cos(0.5 * math.atan(g))
        lo, hi = (mid, hi) if val < a else (lo, mid)
    return resolution_for_gamma(scenario, 10 ** (0.5 * (lo + hi)))


def check_si_stability(scale=1.0, growths=(1.0, 30.0, 100.0, 355.0, 500.0)):
    worst_ok = True
    details = []
    for G2 in growths:
        s = earth_scenario()
        res = resolution_for_growth(s, G2)
        rec = make_record("sinusoid", 0.0, 1.0, 1025, res, A=0.015, omega0=2 * math.pi)
        rec_b = rec.with_resolution(res * 1.3)
        vals = [measured_propagator(s, rec).log_magnitude, measured_propagator(s, rec).phase]
        rep = interference_report(BeamPair(s, rec, rec_b))
        vals += [v for v in rep.as_dict().values() if isinstance(v, float)]
        ok = all(np.isfinite(vals))
        worst_ok &= ok
        details.append(f"2aT={G2:g}:{'ok' if ok else 'nonfinite'}")
    return [CheckResult("si_stability_finite", float(worst_ok), 1.0, worst_ok, "==", ", ".join(details))]


CHECKS: dict[str, tuple[Callable, bool]] = {
    "cn_oracle": (check_cn_oracle, False),
    "sliced_oracle": (check_sliced_oracle, True),
    "sliced_order": (check_sliced_order, True),
    "cn_order": (check_cn_order, False),
    "semigroup": (check_semigroup, True),
    "limit_resolution": (check_limit_resolution, True),
    "limit_gm": (check_limit_gm, True),
    "limit_homogeneous": (check_limit_homogeneous, True),
    "split_identity": (check_split_identity, True),
    "trivial_zero": (check_trivial_zero, True),
    "resolution_induced": (check_resolution_induced, True),
    "simpson_order": (check_simpson_order, True),
    "si_stability": (check_si_stability, True),
}


def run_checks(names=None, scale: float = 1.0, quick: bool = False) -> list[CheckResult]:
    names = list(CHECKS) if names is None else list(names)
    results = []
    for n in names:
        fn, fast = CHECKS[n]
        if quick and not fast:
            continue
        results.extend(fn(scale))
    return results


# -- closed-form vs direct comparison table ---------------------------------------

@dataclass(frozen=True)
class PairSpec:
    name: str
    alpha: str
    alpha_gamma: float
    beta: str
    beta_gamma: float


PAIRS: tuple[PairSpec, ...] = (
    PairSpec("identical", "weak_constant", 0.5, "weak_constant", 0.5),
    PairSpec("resolution_only", "weak_constant", 0.5, "weak_constant", 2.0),
    PairSpec("zero_records", "weak_zero", 0.5, "weak_zero", 2.0),
    PairSpec("distinct_constants", "weak_constant", 0.5, "strong_constant", 2.0),
    PairSpec("sinusoids", "weak_sinusoid", 0.5, "strong_sinusoid", 2.0),
    PairSpec("fall_vs_sinusoid", "strong_free_fall", 2.0, "strong_sinusoid", 1.0),
)


def build_pair(p: PairSpec) -> BeamPair:
    ea, eb = corpus_entry(p.alpha), corpus_entry(p.beta)
    s = ea.scenario()
    ra = ea.record(resolution=resolution_for_gamma(s, p.alpha_gamma))
    rb = eb.record(resolution=resolution_for_gamma(s, p.beta_gamma))
    return BeamPair(s, ra, rb)


def deviation_table() -> list[dict]:
    rows = []
    for p in PAIRS:
        rep = interference_report(build_pair(p))
        rows.append({"pair": p.name, **rep.as_dict()})
    return rows


def printed_form_table(entries=CORPUS) -> list[dict]:
    """Derived and printed forms of the monitored propagator at the corpus
    endpoints, with their relative difference."""
    rows = []
    for e in entries:
        s, rec = e.scenario(), e.record()
        d = measured_propagator(s, rec, "derived")
        p = measured_propagator(s, rec, "printed")
        rows.append({
            "scenario": e.name,
            "derived_log_magnitude": d.log_magnitude,
            "derived_phase": d.phase,
            "printed_log_magnitude": p.log_magnitude,
            "printed_phase": p.phase,
            "relative_difference": relative_difference(p, d),
        })
    return rows
