"""Measurement records and the record functionals of the monitored propagator.

A record is the sampled output curve alpha(t) of a continuous position
measurement together with the device resolution.  All functionals are
composite-Simpson sums over the record's own uniform grid.

Functionals of a complex frequency whose real part times the duration exceeds
``LOG_SCALE_THRESHOLD`` are returned as a mantissa plus a real log scale,
``true value = value * exp(log_scale)``, so that values of order
exp(Re(Omega) T) never have to be formed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from .errors import GridMismatch
from .quadrature import cumulative_simpson_matrix, simpson, simpson_with_error

if TYPE_CHECKING:
    from .interference import SplitFrequency

LOG_SCALE_THRESHOLD = 30.0
DEFAULT_POINTS = 1001
_SPACING_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    times: np.ndarray
    values: np.ndarray
    resolution: float

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        a = np.array(self.values, dtype=float)
        if t.ndim != 1 or t.shape != a.shape:
            raise ValueError("times and values must be 1-D arrays of equal length")
        if t.size < 3:
            raise ValueError("a record needs at least 3 samples")
        steps = np.diff(t)
        h = (t[-1] - t[0]) / (t.size - 1)
        if not h > 0 or np.max(np.abs(steps - h)) > _SPACING_RTOL * max(abs(h), np.max(np.abs(t))):
            raise ValueError("record times must be uniformly spaced and increasing")
        if not self.resolution > 0:
            raise ValueError("resolution must be positive (math.inf means unmeasured)")
        t.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", a)
        object.__setattr__(self, "resolution", float(self.resolution))

    @property
    def n(self) -> int:
        return self.times.size

    @property
    def tau_start(self) -> float:
        return float(self.times[0])

    @property
    def tau_end(self) -> float:
        return float(self.times[-1])

    @property
    def duration(self) -> float:
        return self.tau_end - self.tau_start

    @property
    def h(self) -> float:
        return self.duration / (self.n - 1)

    def at(self, t):
        """Piecewise-linear interpolation of the record."""
        return np.interp(t, self.times, self.values)

    def scaled(self, k: float) -> "MeasurementRecord":
        return MeasurementRecord(self.times, k * self.values, self.resolution)

    def with_resolution(self, resolution: float) -> "MeasurementRecord":
        return MeasurementRecord(self.times, self.values, resolution)

    def __eq__(self, other):
        if not isinstance(other, MeasurementRecord):
            return NotImplemented
        return (self.resolution == other.resolution
                and np.array_equal(self.times, other.times)
                and np.array_equal(self.values, other.values))

    __hash__ = None


@dataclass(frozen=True)
class FunctionalValue:
    value: complex
    estimated_error: float
    log_scale: float = 0.0

    def __post_init__(self):
        if not (self.estimated_error >= 0 and math.isfinite(self.estimated_error)):
            raise ValueError("estimated_error must be finite and non-negative")

    def scaled_by(self, log_factor):
        """value * exp(log_scale - log_factor); ``log_factor`` may be complex."""
        return self.value * np.exp(self.log_scale - log_factor)

    @property
    def full(self):
        return self.value * math.exp(self.log_scale)


def _odd(n: int) -> int:
    return n if n % 2 == 1 else n + 1


def make_record(kind: str, tau_start: float = 0.0, tau_end: float = 1.0,
                n_points: int = DEFAULT_POINTS, resolution: float = 1.0,
                **params) -> MeasurementRecord:
    """Sample a closed-form trajectory.

    kind="constant":  c
    kind="free_fall": l0, v0, g   (alpha = l0 + v0 s - g s**2 / 2, s = t - tau_start)
    kind="sinusoid":  A, omega0, phi   (alpha = A sin(omega0 s + phi))

    The point count is rounded up to odd so plain Simpson applies.
    """
    if not tau_end > tau_start:
        raise ValueError("invalid grid: tau_end must exceed tau_start")
    if n_points < 3:
        raise ValueError("invalid grid: at least 3 points required")
    n = _odd(int(n_points))
    t = np.linspace(tau_start, tau_end, n)
    s = t - tau_start
    if kind == "constant":
        values = np.full(n, float(params.get("c", 0.0)))
    elif kind == "free_fall":
        l0, v0, g = (float(params.get(k, 0.0)) for k in ("l0", "v0", "g"))
        values = l0 + v0 * s - 0.5 * g * s**2
    elif kind == "sinusoid":
        A, w, phi = (float(params.get(k, 0.0)) for k in ("A", "omega0", "phi"))
        values = A * np.sin(w * s + phi)
    else:
        raise ValueError(f"unknown record kind {kind!r}")
    unknown = set(params) - {"constant": {"c"}, "free_fall": {"l0", "v0", "g"},
                             "sinusoid": {"A", "omega0", "phi"}}[kind]
    if unknown:
        raise ValueError(f"unexpected parameters for {kind}: {sorted(unknown)}")
    return MeasurementRecord(t, values, resolution)


def zero_record(tau_start: float, tau_end: float, resolution: float = math.inf,
                n_points: int = DEFAULT_POINTS) -> MeasurementRecord:
    return make_record("constant", tau_start, tau_end, n_points, resolution, c=0.0)


# -- CSV ---------------------------------------------------------------------

_HEADER_KEY = "delta_alpha_m"


def write_record_csv(path, record: MeasurementRecord) -> None:
    """Two columns (time_s, alpha_m) after a comment line carrying the
    resolution.  ``repr`` keeps every float bit-exact."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(f"# {_HEADER_KEY}={record.resolution!r}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time_s", "alpha_m"])
        for t, a in zip(record.times.tolist(), record.values.tolist()):
            w.writerow([repr(t), repr(a)])


def read_record_csv(path) -> MeasurementRecord:
    path = Path(path)
    with path.open(newline="") as fh:
        first = fh.readline().strip()
        if not first.startswith("#") or "=" not in first:
            raise ValueError(f"{path}: first line must be '# {_HEADER_KEY}=<value>'")
        key, _, val = first.lstrip("#").strip().partition("=")
        if key.strip() != _HEADER_KEY:
            raise ValueError(f"{path}: expected {_HEADER_KEY} in header, got {key!r}")
        resolution = float(val)
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["time_s", "alpha_m"]:
        raise ValueError(f"{path}: missing 'time_s,alpha_m' column header")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]], dtype=float)
    return MeasurementRecord(data[:, 0], data[:, 1], resolution)


# -- functionals -------------------------------------------------------------

def _check_span(r: MeasurementRecord, tau_start: float, tau_end: float) -> None:
    scale = max(abs(tau_start), abs(tau_end), abs(tau_end - tau_start))
    tol = 1e-12 * scale
    if abs(r.tau_start - tau_start) > tol or abs(r.tau_end - tau_end) > tol:
        raise GridMismatch(
            f"record spans [{r.tau_start!r}, {r.tau_end!r}] but the propagator needs "
            f"[{tau_start!r}, {tau_end!r}]"
        )


def record_norm(r: MeasurementRecord) -> FunctionalValue:
    """Integral of alpha(t)**2 over the record."""
    val, err = simpson_with_error(r.values**2, r.h)
    return FunctionalValue(float(val), err)


def _log_shift(rate: float, T: float) -> float:
    """Real log scale applied to integrals growing like exp(|rate| T)."""
    s = abs(rate) * T
    return s if s > LOG_SCALE_THRESHOLD else 0.0


def _sinh_shifted(w, shift):
    """sinh(w) * exp(-shift); needs shift >= |Re w| to be overflow free."""
    return 0.5 * (np.exp(w - shift) - np.exp(-w - shift))


def _cosh_shifted(w, shift):
    return 0.5 * (np.exp(w - shift) + np.exp(-w - shift))


def _F_weights(variant: int, Omega: complex, u: np.ndarray, T: float, scaled: bool):
    Omega = complex(Omega)
    k = abs(Omega.real) if scaled else 0.0
    if variant == 1:
        return _sinh_shifted(Omega * u, k * u) * np.exp(-k * (T - u))
    if variant == 2:
        return _sinh_shifted(Omega * (T - u), k * (T - u)) * np.exp(-k * u)
    if variant == 4:
        return _sinh_shifted(Omega * (T - u), k * (T - u)) * _cosh_shifted(Omega * u, k * u)
    raise ValueError(f"single-integral variant must be 1, 2 or 4, got {variant}")


def functional_F(variant: int, r: MeasurementRecord, Omega_hat: complex,
                 tau_start: float, tau_end: float) -> FunctionalValue:
    """Record functionals of the monitored propagator, complex frequency.

    ====== ==========================================================
    1      int alpha(t) sinh(W (t - t'))
    2      int alpha(t) sinh(W (t'' - t))
    3      double integral, see :func:`functional_F3`
    4      int alpha(t) sinh(W (t'' - t)) cosh(W (t - t'))
    ====== ==========================================================
    """
    if variant == 3:
        return functional_F3(r, Omega_hat, tau_start, tau_end)
    _check_span(r, tau_start, tau_end)
    T = tau_end - tau_start
    shift = _log_shift(complex(Omega_hat).real, T)
    u = r.times - tau_start
    w = _F_weights(variant, Omega_hat, u, T, scaled=shift > 0)
    val, err = simpson_with_error(r.values * w, r.h)
    return FunctionalValue(complex(val), err, shift)


def _nested(r: MeasurementRecord, Omega: complex, outer_alpha: bool, n_half: bool = False):
    """Sum_i w_i [alpha_i] sinh(W(T - u_i)) G_i with the cumulative
    G_i = int_0^{u_i} alpha(s) sinh(W s) ds, everything scaled by exp(-|Re W| T)
    when that is large."""
    times, values = r.times, r.values
    if n_half:
        times, values = times[::2], values[::2]
    n = times.size
    h = (times[-1] - times[0]) / (n - 1)
    u = times - times[0]
    T = u[-1]
    Omega = complex(Omega)
    shift = _log_shift(Omega.real, T)
    k = abs(Omega.real) if shift > 0 else 0.0

    W = cumulative_simpson_matrix(n, h)
    # row 1 also reads node 2
    lower = W != 0
    ui = u[:, None]
    uj = u[None, :]
    with np.errstate(over="ignore", invalid="ignore"):
        e_plus = np.where(lower, Omega * uj - k * ui, -np.inf)
        e_minus = np.where(lower, -Omega * uj - k * ui, -np.inf)
        inner_w = 0.5 * (np.exp(e_plus) - np.exp(e_minus))
    G = (W * inner_w) @ values
    outer = _sinh_shifted(Omega * (T - u), k * (T - u)) * G
    if outer_alpha:
        outer = outer * values
    return complex(simpson(outer, h)), shift


def functional_F3(r: MeasurementRecord, Omega_hat: complex,
                  tau_start: float, tau_end: float) -> FunctionalValue:
    """int dt int_{t'}^{t} ds alpha(t) alpha(s) sinh(W(t''-t)) sinh(W(s-t')).

    Nested Simpson on the triangle s <= t, O(N**2) in the record length; the
    error estimate compares against the half grid.
    """
    return _nested_functional(r, Omega_hat, tau_start, tau_end, outer_alpha=True)


def functional_F1_nested(r: MeasurementRecord, Omega_hat: complex,
                         tau_start: float, tau_end: float) -> FunctionalValue:
    """int_{t'}^{t''} F1(t, t') sinh(W (t'' - t)) dt, with F1(t, t') the
    running version of variant 1.  Shares the cumulative sum of F3."""
    return _nested_functional(r, Omega_hat, tau_start, tau_end, outer_alpha=False)


def _nested_functional(r, Omega_hat, tau_start, tau_end, outer_alpha):
    _check_span(r, tau_start, tau_end)
    val, shift = _nested(r, Omega_hat, outer_alpha)
    err = 0.0
    if (r.n - 1) % 2 == 0 and (r.n - 1) // 2 >= 2:
        coarse, _ = _nested(r, Omega_hat, outer_alpha, n_half=True)
        err = abs(val - coarse) / 15.0
    return FunctionalValue(val, float(err), shift)


def functional_f(variant: int, tilde: bool, r: MeasurementRecord, split: "SplitFrequency",
                 tau_start: float, tau_end: float) -> FunctionalValue:
    """Real split functionals of the interference terms.

    Variants 1 and 3 integrate ``sinh(a u) cos(b u)``, variants 2 and 4
    ``cosh(a u) sin(b u)``, where ``(a, b) = (split.tilde, split.check)`` and
    ``u = t - t'`` (or ``t'' - t`` when ``tilde``).  Variants 1, 2 take the
    alpha record and split; 3, 4 the beta ones.
    """
    if variant not in (1, 2, 3, 4):
        raise ValueError(f"variant must be 1..4, got {variant}")
    expected = "alpha" if variant in (1, 2) else "beta"
    if split.branch != expected:
        raise ValueError(f"variant {variant} needs the {expected} split, got {split.branch}")
    _check_span(r, tau_start, tau_end)
    T = tau_end - tau_start
    a, b = float(split.tilde), float(split.check)
    shift = _log_shift(a, T)
    u = r.times - tau_start
    if tilde:
        u = tau_end - r.times
    k = abs(a) if shift > 0 else 0.0
    grow = np.exp(-k * (T - u))
    if variant in (1, 3):
        w = _sinh_shifted(a * u, k * u).real * grow * np.cos(b * u)
    else:
        w = _cosh_shifted(a * u, k * u).real * grow * np.sin(b * u)
    val, err = simpson_with_error(r.values * w, r.h)
    return FunctionalValue(float(val), err, shift)
