"""Initial-pressure phantoms on the disk mesh.

All phantoms vanish identically on boundary nodes, matching the
zero-trace requirement on the initial pressure.
"""

from __future__ import annotations

import numpy as np

from .mesh import Mesh

# Classic ten-ellipse head phantom (Shepp & Logan 1974), grayscale
# intensities: (x0, y0, semi_a, semi_b, angle_deg, intensity).
SHEPP_LOGAN_ELLIPSES = (
    (0.0, 0.0, 0.69, 0.92, 0.0, 2.0),
    (0.0, -0.0184, 0.6624, 0.874, 0.0, -0.98),
    (0.22, 0.0, 0.11, 0.31, -18.0, -0.02),
    (-0.22, 0.0, 0.16, 0.41, 18.0, -0.02),
    (0.0, 0.35, 0.21, 0.25, 0.0, 0.01),
    (0.0, 0.1, 0.046, 0.046, 0.0, 0.01),
    (0.0, -0.1, 0.046, 0.046, 0.0, 0.01),
    (-0.08, -0.605, 0.046, 0.023, 0.0, 0.01),
    (0.0, -0.605, 0.023, 0.023, 0.0, 0.01),
    (0.06, -0.605, 0.023, 0.046, 0.0, 0.01),
)


def shepp_logan_value(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Summed ellipse intensities at points of the phantom's unit square."""
    total = np.zeros_like(np.asarray(x, dtype=np.float64))
    for x0, y0, a, b, ang, intensity in SHEPP_LOGAN_ELLIPSES:
        th = np.radians(ang)
        ct, st = np.cos(th), np.sin(th)
        u = (x - x0) * ct + (y - y0) * st
        v = -(x - x0) * st + (y - y0) * ct
        inside = (u / a) ** 2 + (v / b) ** 2 <= 1.0
        total += np.where(inside, intensity, 0.0)
    return total


def shepp_logan(mesh: Mesh, scale: float = 0.9) -> np.ndarray:
    """Shepp-Logan intensities at mesh vertices, shrunk into radius `scale`.

    Parameters
    ----------
    mesh : Mesh
    scale : float in (0, 1)
        The phantom's unit square is mapped onto the disk of this radius,
        keeping its support away from the boundary.
    """
    if not 0.0 < scale < 1.0:
        raise ValueError(f"scale must lie in (0, 1), got {scale}")
    xy = mesh.vertices / scale
    field = shepp_logan_value(xy[:, 0], xy[:, 1])
    field[mesh.boundary_loop] = 0.0
    return field


def smooth_blobs(mesh: Mesh, spec) -> np.ndarray:
    """Sum of compactly supported C^2 bumps amplitude*(1 - r^2/R^2)^3.

    Parameters
    ----------
    mesh : Mesh
    spec : iterable of ((cx, cy), radius, amplitude)
        Each blob must lie strictly inside the unit disk.
    """
    field = np.zeros(mesh.num_vertices)
    for (cx, cy), radius, amplitude in spec:
        if radius <= 0:
            raise ValueError(f"blob radius must be positive, got {radius}")
        if np.hypot(cx, cy) + radius >= 1.0:
            raise ValueError(
                f"blob at ({cx:g}, {cy:g}) with radius {radius:g} touches the boundary"
            )
        r2 = ((mesh.vertices[:, 0] - cx) ** 2 + (mesh.vertices[:, 1] - cy) ** 2) / radius**2
        bump = np.clip(1.0 - r2, 0.0, None) ** 3
        field += amplitude * bump
    return field


def random_blob_spec(rng: np.random.Generator, n_blobs: int = 4, max_extent: float = 0.85):
    """Draw a reproducible list of blob parameters inside the unit disk.

    The draw sequence is fixed by `n_blobs`, so specs drawn from
    generators in identical states describe the same continuous field on
    any mesh.
    """
    spec = []
    for _ in range(n_blobs):
        ang = rng.uniform(0.0, 2.0 * np.pi)
        rad_pos = rng.uniform(0.0, max_extent - 0.35)
        radius = rng.uniform(0.15, 0.35)
        amplitude = rng.uniform(0.5, 1.0) * rng.choice((-1.0, 1.0))
        spec.append(((rad_pos * np.cos(ang), rad_pos * np.sin(ang)), radius, amplitude))
    return spec


__all__ = [
    "SHEPP_LOGAN_ELLIPSES",
    "random_blob_spec",
    "shepp_logan",
    "shepp_logan_value",
    "smooth_blobs",
]
