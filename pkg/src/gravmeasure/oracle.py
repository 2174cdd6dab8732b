"""Brute-force checks for the closed-form kernels.

Monitoring enters the wave equation as an imaginary potential: the Gaussian
weight exp{-(2/(T res^2)) int (l - alpha)^2 dt} multiplies every path, which is
the same as adding -i s (l - alpha(t))^2 to the Hamiltonian with
s = 2 hbar / (T res^2), since exp{-(i/hbar) int (-i s (l - alpha)^2) dt} is the
weight.  Expanding, the l^2, l and constant parts shift the potential
coefficients by -i s, +2 i s alpha and -i s alpha^2; the l^2 part turns the
inverted oscillator frequency into the complex one used by the kernels.

Three independent routes are provided:

* :func:`evolve`: Crank-Nicolson on a uniform grid with a fourth-order
  Laplacian and Dirichlet walls guarded by a leak detector.
* :func:`propagate_closed_form`: Simpson convolution of a packet with a
  closed-form kernel.
* :func:`time_sliced_kernel`: exact Gaussian composition of N short-time
  kernels, Richardson-extrapolated in N.
"""

from __future__ import annotations

import cmath
import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .domain import Constants, ExperimentScenario
from .errors import BoundaryLeak, GridMismatch, SingularKernel
from .kernels import LogComplexAmplitude, PotentialExpansion, QuadraticKernel, potential_expansion
from .quadrature import simpson_weights
from .records import MeasurementRecord, _check_span

LEAK_TOL = 1e-8


@dataclass(frozen=True)
class SpatialGrid:
    l_min: float
    l_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 64:
            raise ValueError("a grid needs at least 64 points")
        if not self.l_max > self.l_min:
            raise ValueError("l_max must exceed l_min")

    @property
    def spacing(self) -> float:
        return (self.l_max - self.l_min) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.l_min, self.l_max, self.n_points)


@dataclass(frozen=True, eq=False)
class WavePacket:
    grid: SpatialGrid
    values: np.ndarray
    l0: float = float("nan")
    sigma: float = float("nan")
    p0: float = float("nan")

    @classmethod
    def gaussian(cls, grid: SpatialGrid, l0: float, sigma: float, p0: float = 0.0,
                 hbar: float = 1.0) -> "WavePacket":
        l = grid.points
        psi = np.exp(-((l - l0) ** 2) / (4 * sigma**2) + 1j * p0 * l / hbar)
        psi /= math.sqrt(np.sum(np.abs(psi) ** 2) * grid.spacing)
        return cls(grid, psi, l0, sigma, p0)

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.spacing)

    @property
    def mean_position(self) -> float:
        w = np.abs(self.values) ** 2
        return float(np.sum(w * self.grid.points) / np.sum(w))

    def with_values(self, values) -> "WavePacket":
        return WavePacket(self.grid, np.asarray(values, dtype=complex), self.l0, self.sigma, self.p0)


@dataclass(frozen=True)
class EffectiveHamiltonianSpec:
    potential: PotentialExpansion
    measurement_strength: float
    record: MeasurementRecord | None
    mass: float
    hbar: float

    def __post_init__(self):
        if not self.measurement_strength >= 0:
            raise ValueError("measurement strength must be non-negative")

    @classmethod
    def from_scenario(cls, scenario: ExperimentScenario,
                      record: MeasurementRecord | None = None) -> "EffectiveHamiltonianSpec":
        c = scenario.constants
        pot = potential_expansion(scenario.source, scenario.particle, c)
        strength = 0.0
        if record is not None and not math.isinf(record.resolution):
            strength = 2 * c.hbar / (scenario.T * record.resolution**2)
        return cls(pot, strength, record, scenario.particle.m, c.hbar)

    def potential_at(self, l: np.ndarray, t: float) -> np.ndarray:
        V = self.potential(l) + 0j
        if self.measurement_strength:
            V = V - 1j * self.measurement_strength * (l - self.record.at(t)) ** 2
        return V

    def coefficients_at(self, t: float) -> tuple[complex, complex, complex]:
        """(v0, v1, v2) of the effective potential at time t."""
        v0, v1, v2 = complex(self.potential.V0), complex(self.potential.V1), complex(self.potential.V2)
        if self.measurement_strength:
            s, a = self.measurement_strength, float(self.record.at(t))
            v0 -= 1j * s * a * a
            v1 += 2j * s * a
            v2 -= 1j * s
        return v0, v1, v2


def _laplacian_bands(n: int, dx: float) -> list[np.ndarray]:
    """Fourth-order five-point second derivative, bands -2..+2."""
    c = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12 * dx * dx)
    return [np.full(n, v) for v in c]


def _check_leak(psi: np.ndarray, tol: float, step: int) -> None:
    peak = np.max(np.abs(psi))
    edge = max(np.max(np.abs(psi[:3])), np.max(np.abs(psi[-3:])))
    if peak > 0 and edge > tol * peak:
        raise BoundaryLeak(f"boundary amplitude {edge / peak:.3g} of peak at step {step}", edge / peak)


def _dump_snapshot(directory: str, step: int, l: np.ndarray, psi: np.ndarray) -> None:
    with open(os.path.join(directory, f"snapshot_{step:06d}.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["l_m", "re", "im"])
        for x, v in zip(l, psi):
            w.writerow([repr(float(x)), repr(float(v.real)), repr(float(v.imag))])


def evolve(spec: EffectiveHamiltonianSpec, packet: WavePacket, grid: SpatialGrid, T: float,
           steps: int, t0: float = 0.0, leak_tol: float = LEAK_TOL,
           snapshot_every: int | None = None, snapshot_dir: str | None = None) -> WavePacket:
    """Crank-Nicolson for i hbar psi_t = [-(hbar^2/2m) d^2/dl^2 + V_eff(l, t)] psi.

    The potential over each step is the average of its values at both ends;
    the record is sampled by linear interpolation.
    """
    if packet.grid != grid:
        raise GridMismatch("packet lives on a different grid")
    if steps < 100:
        raise ValueError("at least 100 time steps are required")
    if spec.record is not None and spec.measurement_strength:
        _check_span(spec.record, t0, t0 + T)
    n, dx = grid.n_points, grid.spacing
    l = grid.points
    dt = T / steps
    hbar, m = spec.hbar, spec.mass
    lap = _laplacian_bands(n, dx)
    kin = [-(hbar**2) / (2 * m) * b for b in lap]
    mu = 1j * dt / (2 * hbar)

    ab = np.zeros((5, n), dtype=complex)
    for k in range(5):
        ab[k] = mu * kin[k]
    psi = packet.values.astype(complex).copy()
    _check_leak(psi, leak_tol, 0)
    V_prev = spec.potential_at(l, t0)
    for j in range(steps):
        V_next = spec.potential_at(l, t0 + (j + 1) * dt)
        H_diag = kin[2] + 0.5 * (V_prev + V_next)
        ab[2] = 1 + mu * H_diag
        rhs = (1 - mu * H_diag) * psi
        rhs[1:] -= mu * kin[1][1:] * psi[:-1]
        rhs[:-1] -= mu * kin[3][:-1] * psi[1:]
        rhs[2:] -= mu * kin[0][2:] * psi[:-2]
        rhs[:-2] -= mu * kin[4][:-2] * psi[2:]
        psi = solve_banded((2, 2), ab, rhs, check_finite=False)
        V_prev = V_next
        _check_leak(psi, leak_tol, j + 1)
        if snapshot_every and snapshot_dir and (j + 1) % snapshot_every == 0:
            _dump_snapshot(snapshot_dir, j + 1, l, psi)
    return packet.with_values(psi)


def evolve_extrapolated(spec, packet, grid, T, steps, t0=0.0, leak_tol=LEAK_TOL) -> WavePacket:
    """Richardson combination (4 psi(dt/2) - psi(dt)) / 3 of two CN runs."""
    coarse = evolve(spec, packet, grid, T, steps, t0, leak_tol)
    fine = evolve(spec, packet, grid, T, 2 * steps, t0, leak_tol)
    return packet.with_values((4 * fine.values - coarse.values) / 3)


def propagate_closed_form(kernel, packet: WavePacket, grid: SpatialGrid | None = None,
                          chunk: int = 256) -> WavePacket:
    """psi(l_Q) = int U(l_Q, l_P) psi0(l_P) dl_P by Simpson on the packet grid.

    ``kernel`` is a :class:`QuadraticKernel` or any callable returning log U
    for broadcast arrays (l_Q, l_P).
    """
    grid = grid or packet.grid
    if packet.grid != grid:
        raise GridMismatch("packet lives on a different grid")
    log_u = kernel.log_value if isinstance(kernel, QuadraticKernel) else kernel
    l = grid.points
    wpsi = simpson_weights(grid.n_points, grid.spacing) * packet.values
    out = np.empty(grid.n_points, dtype=complex)
    for s in range(0, grid.n_points, chunk):
        lu = log_u(l[s:s + chunk, None], l[None, :])
        if not np.all(np.isfinite(lu)):
            raise SingularKernel("non-finite kernel on the grid")
        out[s:s + chunk] = np.exp(lu) @ wpsi
    return packet.with_values(out)


def compare_l2(a: WavePacket, b: WavePacket) -> dict:
    """Relative L2 distance of b from a, after and before removing the best
    global phase; ``phase_offset`` is theta in b ~ exp(i theta) a."""
    if a.grid != b.grid:
        raise GridMismatch("packets live on different grids")
    na = np.linalg.norm(a.values)
    inner = np.vdot(a.values, b.values)
    theta = float(np.angle(inner)) if inner != 0 else 0.0
    aligned = np.linalg.norm(b.values * np.exp(-1j * theta) - a.values) / na
    raw = np.linalg.norm(b.values - a.values) / na
    return {"relative_l2": float(aligned), "phase_offset": theta, "relative_l2_unaligned": float(raw)}


# -- time slicing --------------------------------------------------------------

def _sliced_log_kernel(spec: EffectiveHamiltonianSpec, l_P: float, l_Q: float, T: float,
                       N: int, t0: float = 0.0) -> complex:
    """log of the N-slice discretized path integral with trapezoid potential.

    After k slices the kernel from the fixed start is exp(a x^2 + b x + c);
    each further slice is a Gaussian integral done in closed form.
    """
    hbar, m = spec.hbar, spec.mass
    eps = T / N
    kin = 1j * m / (2 * hbar * eps)
    log_pref = 0.5 * cmath.log(m / (2j * math.pi * hbar * eps))
    ts = [t0 + j * eps for j in range(N + 1)]
    coef = [spec.coefficients_at(t) for t in ts]
    h = -1j * eps / (2 * hbar)

    v0, v1, v2 = coef[0]
    V_start = v0 + v1 * l_P + v2 * l_P**2
    w0, w1, w2 = coef[1]
    a = kin + h * w2
    b = -2 * kin * l_P + h * w1
    c = log_pref + kin * l_P**2 + h * (V_start + w0)
    for j in range(1, N):
        u0, u1, u2 = coef[j]
        w0, w1, w2 = coef[j + 1]
        q = a + kin + h * u2
        if q == 0:
            raise SingularKernel(f"vanishing Gaussian width at slice {j}")
        p0 = b + h * u1
        p1 = -2 * kin
        a = kin + h * w2 - p1 * p1 / (4 * q)
        b = h * w1 - p0 * p1 / (2 * q)
        c = c + log_pref + h * (u0 + w0) + 0.5 * cmath.log(math.pi / (-q)) - p0 * p0 / (4 * q)
    return a * l_Q**2 + b * l_Q + c


@dataclass(frozen=True)
class SlicedResult:
    value: LogComplexAmplitude
    raw_N: LogComplexAmplitude
    raw_half: LogComplexAmplitude
    N: int


def time_sliced_kernel(scenario: ExperimentScenario, N_slices: int,
                       record: MeasurementRecord | None = None,
                       l_P: float | None = None, l_Q: float | None = None) -> SlicedResult:
    """Height kernel between the scenario endpoints from N and N/2 slices,
    Richardson-extrapolated assuming an error of order 1/N^2."""
    if N_slices < 8 or N_slices % 2:
        raise ValueError("N_slices must be even and at least 8")
    e = scenario.endpoints
    l_P = e.l_P if l_P is None else l_P
    l_Q = e.l_Q if l_Q is None else l_Q
    spec = EffectiveHamiltonianSpec.from_scenario(scenario, record)
    full = _sliced_log_kernel(spec, l_P, l_Q, scenario.T, N_slices, e.tau_start)
    half = _sliced_log_kernel(spec, l_P, l_Q, scenario.T, N_slices // 2, e.tau_start)
    ext = (4 * full - half) / 3
    return SlicedResult(
        LogComplexAmplitude.from_log(ext),
        LogComplexAmplitude.from_log(full),
        LogComplexAmplitude.from_log(half),
        N_slices,
    )


def compose_over_midpoint(first: QuadraticKernel, second: QuadraticKernel, l_P: complex,
                          l_Q: complex, n: int = 2001, decay: float = 50.0) -> complex:
    """log of int second(l_Q, l) first(l, l_P) dl by Simpson along the steepest
    descent line through the saddle, where the integrand is a real Gaussian."""
    A = second.c_PP + first.c_QQ
    B = second.c_QP * l_Q + second.c_P + first.c_QP * l_P + first.c_Q
    if A == 0:
        raise SingularKernel("flat intermediate integrand")
    saddle = -B / (2 * A)
    phi = 0.5 * (math.pi - cmath.phase(A))
    direction = cmath.exp(1j * phi)
    half_width = math.sqrt(decay / abs(A))
    s = np.linspace(-half_width, half_width, n)
    path = saddle + direction * s
    log_vals = second.log_value(l_Q, path) + first.log_value(path, l_P)
    shift = log_vals[n // 2]
    integral = np.dot(simpson_weights(n, s[1] - s[0]), np.exp(log_vals - shift)) * direction
    return complex(shift + cmath.log(integral))
