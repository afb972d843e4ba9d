"""Material parameters of the medium and the layered ultrasound sensor.

The sensor sits on the domain boundary as a thin sensing film (speed
``c_s``, density ``rho_s``) backed by a substrate (``c_b``, ``rho_b``);
the acoustic medium inside the domain has speed ``c`` and density
``rho``.  All quantities are kept nondimensional: speeds relative to a
reference speed, densities relative to the acoustic density, lengths
relative to a reference length.

In the 2D reduction the boundary is a curve; its curvature plays the role
of the mean curvature and the Gaussian curvature is zero.  The curvature
scalar is configurable (``curvature_H``, default 1 for the unit disk).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class MediumParams:
    """Acoustic and sensor material constants (nondimensional).

    Parameters
    ----------
    c : float or (V,) array
        Acoustic wave speed, constant or per mesh vertex.
    rho : float
        Acoustic density (constant; the interior equation carries only
        ``c^2``, density enters through the boundary condition).
    c_s, rho_s : float
        Sensing-film wave speed and density.
    c_b, rho_b : float
        Backing-substrate wave speed and density.
    h : float
        Film thickness.  Carried for bookkeeping; the boundary condition
        and measurement coefficients used here are its thin-film limit.
    curvature_H : float
        Boundary curvature scalar entering the damping/measurement
        coefficients (1 for the unit disk).
    curvature_K : float
        Gaussian-curvature scalar; identically 0 in 2D.
    """

    c: float | np.ndarray = 1.0
    rho: float = 1.0
    c_s: float = 22.0 / 15.0
    rho_s: float = 1.18
    c_b: float = 2180.0 / 1500.0
    rho_b: float = 1.18
    h: float = 0.0
    curvature_H: float = 1.0
    curvature_K: float = 0.0

    def __post_init__(self):
        c = self.c
        if isinstance(c, np.ndarray):
            if c.size == 0 or (c <= 0).any():
                raise ValueError("per-vertex c must be nonempty and strictly positive")
        elif not c > 0:
            raise ValueError(f"c must be positive, got {c}")
        for name in ("rho", "c_s", "rho_s", "c_b", "rho_b"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.h < 0:
            raise ValueError(f"h must be nonnegative, got {self.h}")

    @property
    def c_max(self) -> float:
        return float(np.max(self.c))

    def c_at_vertices(self, num_vertices: int) -> np.ndarray:
        """Per-vertex speed array, broadcasting a constant c."""
        if isinstance(self.c, np.ndarray):
            if self.c.shape != (num_vertices,):
                raise ValueError(
                    f"per-vertex c has {self.c.shape[0]} entries, mesh has {num_vertices} vertices"
                )
            return self.c
        return np.full(num_vertices, float(self.c))

    def c_boundary(self, boundary_loop: np.ndarray | None = None) -> float:
        """Speed at the boundary, required constant along it."""
        if not isinstance(self.c, np.ndarray):
            return float(self.c)
        if boundary_loop is None:
            raise ValueError("per-vertex c needs the boundary loop to evaluate the boundary speed")
        vals = self.c[boundary_loop]
        if np.max(vals) - np.min(vals) > 1e-12 * max(1.0, np.max(np.abs(vals))):
            raise ValueError("c varies along the boundary; a constant boundary speed is required")
        return float(vals[0])


@dataclass(frozen=True)
class SensorCoefficients:
    """Derived coefficients of the sensor's boundary and measurement operators.

    ``a`` damps the pressure rate, ``b`` couples to the pressure itself,
    ``cs2`` scales the boundary Laplacian, and ``alpha`` is the impedance
    ratio of medium to backing that controls plane-wave reflection:

        a = 2 H c_s^2 rho_s / (c_b rho_b)        (1/time)
        b = 2 H^2 c_s^2 rho_s / rho_b            (1/time^2)
        alpha = rho c / (rho_b c_b)              (dimensionless)

    The algebraic tie ``b/a = H c_b`` holds whenever ``a != 0``.
    """

    a: float
    b: float
    cs2: float
    alpha: float


def sensor_coefficients(params: MediumParams, boundary_loop: np.ndarray | None = None) -> SensorCoefficients:
    """Evaluate the sensor coefficients from material parameters.

    Parameters
    ----------
    params : MediumParams
    boundary_loop : optional int array
        Needed only when ``params.c`` is per-vertex, to pick the boundary
        speed for ``alpha``.
    """
    H = params.curvature_H
    a = 2.0 * H * params.c_s**2 * params.rho_s / (params.c_b * params.rho_b)
    b = 2.0 * H**2 * params.c_s**2 * params.rho_s / params.rho_b
    c_gamma = params.c_boundary(boundary_loop)
    alpha = params.rho * c_gamma / (params.rho_b * params.c_b)
    return SensorCoefficients(a=a, b=b, cs2=params.c_s**2, alpha=alpha)


def nondimensionalize(physical: MediumParams, L_ref: float, c_ref: float) -> MediumParams:
    """Rescale physically dimensioned parameters to the internal unit system.

    Speeds are divided by ``c_ref``, densities by the acoustic density,
    lengths by ``L_ref`` (so curvatures are multiplied by ``L_ref``).

    Parameters
    ----------
    physical : MediumParams
        Parameters in consistent physical units (e.g. SI).
    L_ref : float
        Reference length > 0 (e.g. the physical domain radius).
    c_ref : float
        Reference speed > 0 (e.g. the acoustic speed).
    """
    if not L_ref > 0:
        raise ValueError(f"L_ref must be positive, got {L_ref}")
    if not c_ref > 0:
        raise ValueError(f"c_ref must be positive, got {c_ref}")
    rho_ref = physical.rho
    return replace(
        physical,
        c=physical.c / c_ref,
        rho=physical.rho / rho_ref,
        c_s=physical.c_s / c_ref,
        rho_s=physical.rho_s / rho_ref,
        c_b=physical.c_b / c_ref,
        rho_b=physical.rho_b / rho_ref,
        h=physical.h / L_ref,
        curvature_H=physical.curvature_H * L_ref,
        curvature_K=physical.curvature_K * L_ref**2,
    )


def water_sensor_physical(h: float = 0.0, curvature_H: float = 1.0) -> MediumParams:
    """Reference sensor stack in SI units.

    Water acoustic medium (1500 m/s, 1000 kg/m^3), Parylene sensing film
    (2200 m/s, 1180 kg/m^3), polycarbonate backing (2180 m/s, 1180 kg/m^3).
    """
    return MediumParams(
        c=1500.0, rho=1000.0, c_s=2200.0, rho_s=1180.0, c_b=2180.0, rho_b=1180.0,
        h=h, curvature_H=curvature_H,
    )


def default_medium() -> MediumParams:
    """Nondimensional reference stack: water/Parylene/polycarbonate on the unit disk."""
    return nondimensionalize(water_sensor_physical(), L_ref=1.0, c_ref=1500.0)
