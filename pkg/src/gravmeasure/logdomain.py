"""Overflow-safe hyperbolic functions of complex argument.

All routines assume ``Re z >= 0``; callers fold the kernel frequency into the
right half-plane first (every kernel is even in the frequency).  Arguments with
``Re z`` in the hundreds are routine here, so nothing below ever forms
``exp(z)`` directly.
"""

from __future__ import annotations

import numpy as np

LOG2 = np.log(2.0)

_SMALL = 0.1


def fold_right(z: complex) -> complex:
    """Return +z or -z, whichever lies in the closed right half-plane.

    On the imaginary axis the upper half is chosen; this is the side reached by
    a vanishing positive damping, so caustics pick up the -pi/2 Maslov phase.
    """
    z = complex(z)
    if z.real < 0 or (z.real == 0 and z.imag < 0):
        return -z
    return z


def log_sinhc(z):
    """Continuous log of sinh(z)/z on the closed right half-plane.

    Uses ``z + log(1 - exp(-2z)) - log(2z)`` away from the origin and the
    Taylor series near it.  The branch is the one continuous along rays from
    the origin, which is what the kernel prefactor needs; on the imaginary
    axis it adds i*pi at each zero of sinh passed.
    """
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < _SMALL
    if np.any(small):
        z2 = z[small] ** 2
        series = z2 / 6 + z2**2 / 120 + z2**3 / 5040 + z2**4 / 362880
        out[small] = np.log1p(series)
    big = ~small
    if np.any(big):
        zb = z[big]
        out[big] = zb + np.log(-np.expm1(-2.0 * zb)) - np.log(2.0 * zb)
    return out if out.ndim else complex(out)


def log_sinh(z):
    """log sinh(z) = log z + log_sinhc(z); -inf real part at z = 0."""
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore"):
        out = np.log(z) + log_sinhc(z)
    return out if out.ndim else complex(out)


def tanh_rhp(z):
    """tanh(z) for Re z >= 0 without overflow or small-z cancellation."""
    z = np.asarray(z, dtype=complex)
    e = np.exp(-2.0 * z)
    out = -np.expm1(-2.0 * z) / (1.0 + e)
    return out if out.ndim else complex(out)


def z_coth(z):
    """z coth(z), equal to 1 at z = 0."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < _SMALL
    if np.any(small):
        z2 = z[small] ** 2
        out[small] = 1 + z2 / 3 - z2**2 / 45 + 2 * z2**3 / 945 - z2**4 / 4725
    big = ~small
    if np.any(big):
        zb = z[big]
        out[big] = zb * (1.0 + np.exp(-2.0 * zb)) / (-np.expm1(-2.0 * zb))
    return out if out.ndim else complex(out)


def half_tanh_over(z):
    """tanh(z/2)/z, equal to 1/2 at z = 0."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < 1e-3
    if np.any(small):
        z2 = z[small] ** 2
        out[small] = 0.5 - z2 / 24 + z2**2 / 240 - 17 * z2**3 / 40320
    big = ~small
    if np.any(big):
        zb = z[big]
        out[big] = tanh_rhp(zb / 2) / zb
    return out if out.ndim else complex(out)


def double_sinh_moment(z):
    """(z/2 - tanh(z/2)) / z**3, equal to 1/24 at z = 0.

    This is the constant-force double integral of the driven oscillator
    divided by T**3 sinh(z)/z.
    """
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < _SMALL
    if np.any(small):
        y2 = (z[small] / 2) ** 2
        out[small] = (1 / 24 - y2 / 60 + 17 * y2**2 / 2520
                      - 62 * y2**3 / 22680 + 1382 * y2**4 / 1247400)
    big = ~small
    if np.any(big):
        zb = z[big]
        out[big] = (zb / 2 - tanh_rhp(zb / 2)) / zb**3
    return out if out.ndim else complex(out)


def sinh_ratio(Omega: complex, u, T: float):
    """sinh(Omega*u)/sinh(Omega*T) for 0 <= u <= T, evaluated as
    (u/T) exp(log_sinhc(Omega u) - log_sinhc(Omega T))."""
    u = np.asarray(u, dtype=float)
    return (u / T) * np.exp(log_sinhc(Omega * u) - log_sinhc(Omega * T))


def wrap_phase(phi):
    """Map phases to the principal interval (-pi, pi]."""
    phi = np.asarray(phi, dtype=float)
    out = np.pi - np.mod(np.pi - phi, 2 * np.pi)
    return out if out.ndim else float(out)
