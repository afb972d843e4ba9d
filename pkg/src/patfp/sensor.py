"""Measurement models for the boundary pressure trace.

The layered-sensor measurement obeys, per boundary point,

    d2m/dt2 = d2p/dt2 + a dp/dt + b p - c_s^2 Lap_Gamma p,
    m(0) = dm/dt(0) = 0,

which with zero initial data integrates to

    m = p + I2( a dp/dt + b p - c_s^2 Lap_Gamma p ),

where I2 is the double antiderivative from t = 0.  The idealized model
is m = p.  Discretely, I2 is the composite trapezoidal rule applied
twice, d/dt is the second-order central difference (one-sided at the
ends), and the weak boundary Laplacian is -W^-1 S per time slice with
lumped arc-length weights W.

Every operator here also exposes its exact adjoint with respect to the
discrete space-time inner product (trapezoidal weights theta_n in time,
lumped weights w_k in space).  The backward antiderivative is defined as
that exact adjoint; it matches the continuous "integrate from t to T"
kernel exactly on interior rows and to O(dt) on the endpoint rows, whose
half-sized quadrature weight makes the paired contribution O(dt^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .assembly import SystemMatrices
from .medium import SensorCoefficients, sensor_coefficients
from .wavesolver import (
    BOUNDARY_TRACE_TOL,
    BoundaryTrace,
    ForwardSolution,
    WaveRunConfig,
    solve_forward,
    theta_weights,
)

MEASUREMENT_MODELS = ("fabry_perot", "idealized")


@dataclass(frozen=True)
class Measurement:
    """A boundary measurement trace tagged with the model that produced it."""

    trace: BoundaryTrace
    model: str

    def __post_init__(self):
        if self.model not in MEASUREMENT_MODELS:
            raise ValueError(f"unknown measurement model '{self.model}'")


def _check_series(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.shape[0] < 2:
        raise ValueError("need at least 2 time samples")
    return values


def trap_cumint(values: np.ndarray, dt: float) -> np.ndarray:
    """Cumulative trapezoidal integral from t = 0 along axis 0."""
    values = _check_series(values)
    cs = np.cumsum(values, axis=0)
    return dt * (cs - 0.5 * values - 0.5 * values[0])


def trap_cumint_adjoint(values: np.ndarray, dt: float) -> np.ndarray:
    """Exact adjoint of `trap_cumint` in the theta-weighted inner product."""
    values = _check_series(values)
    theta = theta_weights(values.shape[0], dt)
    shape = (-1,) + (1,) * (values.ndim - 1)
    th = theta.reshape(shape)
    y = th * values
    tail = np.cumsum(y[::-1], axis=0)[::-1]
    out = dt * (tail - 0.5 * y)
    out[0] = 0.5 * dt * (tail[0] - y[0])
    return out / th


def time_derivative(values: np.ndarray, dt: float) -> np.ndarray:
    """Second-order time derivative: central, one-sided at the endpoints."""
    values = _check_series(values)
    if values.shape[0] == 2:
        d = (values[1] - values[0]) / dt
        return np.stack([d, d], axis=0)
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - values[:-2]) / (2.0 * dt)
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dt)
    out[-1] = (3.0 * values[-1] - 4.0 * values[-2] + values[-3]) / (2.0 * dt)
    return out


def time_derivative_adjoint(values: np.ndarray, dt: float) -> np.ndarray:
    """Exact adjoint of `time_derivative` in the theta-weighted inner product."""
    values = _check_series(values)
    theta = theta_weights(values.shape[0], dt)
    shape = (-1,) + (1,) * (values.ndim - 1)
    th = theta.reshape(shape)
    y = th * values
    out = np.zeros_like(y)
    if values.shape[0] == 2:
        out[0] = -(y[0] + y[1]) / dt
        out[1] = (y[0] + y[1]) / dt
        return out / th
    # Transpose of the central-difference rows ...
    out[:-2] -= y[1:-1] / (2.0 * dt)
    out[2:] += y[1:-1] / (2.0 * dt)
    # ... plus the one-sided endpoint rows.
    out[0] += -3.0 * y[0] / (2.0 * dt)
    out[1] += 4.0 * y[0] / (2.0 * dt)
    out[2] += -1.0 * y[0] / (2.0 * dt)
    out[-1] += 3.0 * y[-1] / (2.0 * dt)
    out[-2] += -4.0 * y[-1] / (2.0 * dt)
    out[-3] += 1.0 * y[-1] / (2.0 * dt)
    return out / th


def antiderivative2(series: np.ndarray, dt: float, direction: str = "forward") -> np.ndarray:
    """Double time antiderivative along axis 0.

    Parameters
    ----------
    series : array, time on axis 0
    dt : float
    direction : {"forward", "backward"}
        "forward" integrates twice from t = 0 (trapezoidal rule applied
        twice).  "backward" is the exact adjoint of "forward" under
        trapezoidal time weights — the discrete realization of the
        double integral from t to T (exact away from the grid endpoints,
        O(dt) on the endpoint rows).
    """
    if direction == "forward":
        return trap_cumint(trap_cumint(series, dt), dt)
    if direction == "backward":
        return trap_cumint_adjoint(trap_cumint_adjoint(series, dt), dt)
    raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")


def _as_loop_operators(S_gamma, B_gamma, num_nodes: int, boundary_loop=None):
    """Restrict global boundary matrices to the loop if necessary."""
    if S_gamma.shape[0] == num_nodes:
        S_loop, B_loop = S_gamma, B_gamma
    else:
        if boundary_loop is None:
            raise ValueError(
                "global boundary matrices need boundary_loop to restrict to the loop"
            )
        ix = np.ix_(boundary_loop, boundary_loop)
        S_loop = sp.csr_matrix(sp.csc_matrix(S_gamma)[ix])
        B_loop = sp.csr_matrix(sp.csc_matrix(B_gamma)[ix])
    w_loop = np.asarray(B_loop.sum(axis=1)).ravel()
    return S_loop, w_loop


def laplace_beltrami_weak(values: np.ndarray, S_loop, w_loop: np.ndarray) -> np.ndarray:
    """Apply Lambda = W^-1 S per time slice (the negative weak Laplacian).

    Self-adjoint and positive semidefinite in the w-weighted inner
    product, so it is its own adjoint in the space factor.
    """
    return (S_loop @ values.T).T / w_loop


def measurement_correction(
    values: np.ndarray, dt: float, coeffs: SensorCoefficients, S_loop, w_loop
) -> np.ndarray:
    """m = p + I2(a dp/dt + b p + c_s^2 Lambda p), time on axis 0."""
    bracket = coeffs.b * values + coeffs.cs2 * laplace_beltrami_weak(values, S_loop, w_loop)
    if coeffs.a != 0.0:
        bracket += coeffs.a * time_derivative(values, dt)
    return values + antiderivative2(bracket, dt, "forward")


def measurement_correction_adjoint(
    values: np.ndarray, dt: float, coeffs: SensorCoefficients, S_loop, w_loop
) -> np.ndarray:
    """Exact space-time adjoint of `measurement_correction`.

    With the operator written m = (I + I2 B) p, B = a D + b + c_s^2 Lambda,
    the adjoint is I + B* I2*, with each factor transposed in the
    theta/w-weighted inner product.
    """
    u = antiderivative2(values, dt, "backward")
    out = values + coeffs.b * u + coeffs.cs2 * laplace_beltrami_weak(u, S_loop, w_loop)
    if coeffs.a != 0.0:
        out += coeffs.a * time_derivative_adjoint(u, dt)
    return out


def measure_fabry_perot(
    p_trace: BoundaryTrace,
    coeffs: SensorCoefficients,
    S_gamma,
    B_gamma,
    boundary_loop=None,
) -> Measurement:
    """Convert a boundary pressure trace into the layered-sensor measurement.

    Parameters
    ----------
    p_trace : BoundaryTrace
        Pressure on the boundary loop; its initial row must vanish.
    coeffs : SensorCoefficients
    S_gamma, B_gamma : sparse matrices
        Boundary stiffness and mass, either loop-local (B, B) or global
        (V, V) together with `boundary_loop`.
    boundary_loop : int array, optional
        Loop indices, required only with global matrices.
    """
    worst = float(np.max(np.abs(p_trace.values[0]))) if p_trace.values.size else 0.0
    if worst > BOUNDARY_TRACE_TOL:
        raise ValueError(
            f"nonzero initial trace row (max |p(0)| = {worst:.3e}); "
            "the measurement model assumes zero initial data"
        )
    S_loop, w_loop = _as_loop_operators(S_gamma, B_gamma, p_trace.num_nodes, boundary_loop)
    values = measurement_correction(p_trace.values, p_trace.dt, coeffs, S_loop, w_loop)
    return Measurement(trace=BoundaryTrace(values=values, dt=p_trace.dt), model="fabry_perot")


def measure_idealized(p_trace: BoundaryTrace) -> Measurement:
    """Idealized model: the measurement is the pressure trace itself."""
    return Measurement(trace=p_trace, model="idealized")


def forward_operator(
    p0: np.ndarray,
    p1: np.ndarray,
    system: SystemMatrices,
    cfg: WaveRunConfig,
    model: str = "fabry_perot",
) -> Measurement:
    """Full forward map: initial data -> boundary measurement.

    Composes the wave march with the measurement model.
    """
    if model not in MEASUREMENT_MODELS:
        raise ValueError(f"unknown measurement model '{model}'")
    sol: ForwardSolution = solve_forward(p0, p1, system, cfg)
    if model == "idealized":
        return measure_idealized(sol.trace)
    coeffs = sensor_coefficients(system.params, system.boundary_loop)
    return measure_fabry_perot(
        sol.trace, coeffs, system.S_loop, system.B_loop, system.boundary_loop
    )


__all__ = [
    "MEASUREMENT_MODELS",
    "Measurement",
    "antiderivative2",
    "forward_operator",
    "laplace_beltrami_weak",
    "measure_fabry_perot",
    "measure_idealized",
    "measurement_correction",
    "measurement_correction_adjoint",
    "time_derivative",
    "time_derivative_adjoint",
    "trap_cumint",
    "trap_cumint_adjoint",
]
