"""Analytic plane-wave response of the layered sensor.

For a plane wave hitting the sensor at incidence angle theta, the
pressure reflection coefficient at the medium/backing interface is

    R(theta) = (cos(theta) - alpha) / (cos(theta) + alpha),

with alpha = rho c / (rho_b c_b), and the measured amplitude relative to
the incident pressure follows the directivity

    D(theta) = (1 + R(theta)) * (1 - (c_s^2/c^2) sin^2(theta)).

D vanishes where the tangential phase speed of the incident wave matches
the film speed, sin(theta_c) = c/c_s; past that angle the measurement
flips sign relative to the pressure.  Angles are degrees at the
interface (exact at the right angle thanks to degree-aware trig).
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq
from scipy.special import cosdg, sindg

from .medium import MediumParams, sensor_coefficients


def reflection_coefficient(theta_deg, alpha: float):
    """Plane-wave reflection coefficient R(theta) for impedance ratio alpha."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    ct = cosdg(theta_deg)
    return (ct - alpha) / (ct + alpha)


def directivity(theta_deg, params: MediumParams):
    """Directivity D(theta) = (1 + R) * (1 - (c_s^2/c^2) sin^2 theta)."""
    coeffs = sensor_coefficients(params)
    R = reflection_coefficient(theta_deg, coeffs.alpha)
    st = sindg(theta_deg)
    c = params.c_boundary()
    return (1.0 + R) * (1.0 - (params.c_s**2 / c**2) * st * st)


def critical_angle(params: MediumParams):
    """Angle (degrees) where the tangential phase speed matches the film speed.

    Returns None when c >= c_s (no such angle exists).
    """
    c = params.c_boundary()
    if c >= params.c_s:
        return None
    return float(np.degrees(np.arcsin(c / params.c_s)))


def directivity_zero(params: MediumParams, tol: float = 1e-12):
    """Zero crossing of D in (0, 90) degrees via bracketing, or None.

    Coincides with `critical_angle` analytically; computed here
    independently from the directivity curve itself.
    """
    lo, hi = 1e-9, 90.0 - 1e-9
    f = lambda th: float(directivity(th, params))
    if f(lo) <= 0.0 or f(hi) >= 0.0:
        return None
    return float(brentq(f, lo, hi, xtol=tol))


def directivity_table(params: MediumParams, step_deg: float = 0.1) -> np.ndarray:
    """Sampled (theta_deg, R, D) rows on [0, 90] with the given step."""
    if not step_deg > 0:
        raise ValueError(f"step_deg must be positive, got {step_deg}")
    n = int(round(90.0 / step_deg))
    theta = np.minimum(np.arange(n + 1) * step_deg, 90.0)
    if theta[-1] < 90.0:
        theta = np.append(theta, 90.0)
    alpha = sensor_coefficients(params).alpha
    R = reflection_coefficient(theta, alpha)
    D = directivity(theta, params)
    return np.column_stack([theta, R, D])


__all__ = [
    "critical_angle",
    "directivity",
    "directivity_table",
    "directivity_zero",
    "reflection_coefficient",
]
