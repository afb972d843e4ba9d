"""Rasterize nodal fields to binary PGM images for quick inspection."""

from __future__ import annotations

import numpy as np
from matplotlib.tri import LinearTriInterpolator, Triangulation

from .mesh import Mesh


def render_field_pgm(field: np.ndarray, mesh: Mesh, resolution: int = 256) -> bytes:
    """Rasterize a P1 field to a grayscale binary PGM (P5, maxval 255).

    The field is linearly interpolated within triangles on a
    resolution x resolution pixel grid over the mesh bounding box;
    pixels outside the mesh are 0.  Values map linearly from
    [min, max] to [0, 255]; a constant field maps to mid-gray 128.

    Parameters
    ----------
    field : (V,) array
    mesh : Mesh
    resolution : int >= 16
    """
    field = np.asarray(field, dtype=np.float64)
    if mesh.num_triangles == 0:
        raise ValueError("cannot render an empty mesh")
    if field.shape != (mesh.num_vertices,):
        raise ValueError(
            f"field has {field.shape} entries, mesh has {mesh.num_vertices} vertices"
        )
    if resolution < 16:
        raise ValueError(f"resolution must be >= 16, got {resolution}")

    tri = Triangulation(mesh.vertices[:, 0], mesh.vertices[:, 1], mesh.triangles)
    interp = LinearTriInterpolator(tri, field)
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    xs = np.linspace(lo[0], hi[0], resolution)
    ys = np.linspace(hi[1], lo[1], resolution)  # top row of the image is y_max
    X, Y = np.meshgrid(xs, ys)
    sampled = interp(X, Y)  # masked outside the triangulation

    vmin = float(field.min())
    vmax = float(field.max())
    if vmax > vmin:
        scaled = (np.ma.filled(sampled, vmin) - vmin) / (vmax - vmin) * 255.0
    else:
        scaled = np.full((resolution, resolution), 128.0)
    pixels = np.clip(np.rint(scaled), 0, 255).astype(np.uint8)
    pixels[np.ma.getmaskarray(sampled)] = 0

    header = f"P5\n{resolution} {resolution}\n255\n".encode("ascii")
    return header + pixels.tobytes()


__all__ = ["render_field_pgm"]
