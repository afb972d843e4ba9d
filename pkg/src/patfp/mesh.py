"""Triangulations of the unit disk with an ordered boundary loop.

The mesh family used throughout the package starts from a fan of the
regular hexagon (7 vertices, 6 triangles) and refines by uniform midpoint
subdivision; midpoints of boundary edges are projected back onto the unit
circle.  Every level therefore keeps the vertices of the previous level
with unchanged indices, and the boundary nodes stay uniformly spaced in
angle.  Vertex/triangle counts follow

    V(k) = 3*4^k + 3*2^k + 1,   T(k) = 6*4^k,   B(k) = 6*2^k.

Meshes are immutable value objects; all operations return new instances.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError

MAX_REFINEMENT = 8  # guard against memory blowup


@dataclass(frozen=True)
class Mesh:
    """Triangulated planar domain with a single closed boundary loop.

    Parameters
    ----------
    vertices : (V, 2) float array
        Vertex coordinates (nondimensional length).
    triangles : (T, 3) int array
        Vertex index triples, counterclockwise.
    boundary_loop : (B,) int array
        Vertex indices tracing the boundary counterclockwise.  Edge ``i``
        of the loop connects ``boundary_loop[i]`` to
        ``boundary_loop[(i+1) % B]``.
    boundary_edge_lengths : (B,) float array
        Chord length of each loop edge, in loop order.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_loop: np.ndarray
    boundary_edge_lengths: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.asarray(self.vertices, dtype=np.float64))
        object.__setattr__(self, "triangles", np.asarray(self.triangles, dtype=np.int64))
        object.__setattr__(self, "boundary_loop", np.asarray(self.boundary_loop, dtype=np.int64))
        if self.boundary_edge_lengths is None:
            loop = self.boundary_loop
            pts = self.vertices[loop]
            seg = np.roll(pts, -1, axis=0) - pts
            object.__setattr__(self, "boundary_edge_lengths", np.hypot(seg[:, 0], seg[:, 1]))
        else:
            object.__setattr__(
                self, "boundary_edge_lengths", np.asarray(self.boundary_edge_lengths, dtype=np.float64)
            )

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def num_triangles(self) -> int:
        return self.triangles.shape[0]

    @property
    def num_boundary(self) -> int:
        return self.boundary_loop.shape[0]

    def signed_areas(self) -> np.ndarray:
        """Signed area of every triangle (positive = counterclockwise)."""
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


@dataclass(frozen=True)
class BoundaryGeometry:
    """Lumped arc-length weights and curvature along the boundary loop.

    Parameters
    ----------
    node_curvature : (B,) float array
        Signed curvature at each boundary node (1/length); exactly 1 for
        meshes whose boundary vertices lie on the unit circle.
    node_weight : (B,) float array
        Lumped arc length per node: half the sum of the two adjacent
        chord lengths.  Sums to ``total_length``.
    total_length : float
        Perimeter of the boundary polyline.
    """

    node_curvature: np.ndarray
    node_weight: np.ndarray
    total_length: float


def validate_mesh(mesh: Mesh) -> None:
    """Check the structural invariants; raise ``ValueError`` on violation.

    Enforced: index ranges, positive triangle areas, a single closed
    counterclockwise boundary loop, and each loop edge belonging to
    exactly one triangle.
    """
    v, t, loop = mesh.vertices, mesh.triangles, mesh.boundary_loop
    if v.ndim != 2 or v.shape[1] != 2:
        raise ValueError("vertices must be an (V, 2) array")
    if t.size and (t.min() < 0 or t.max() >= len(v)):
        raise ValueError("triangle vertex index out of range")
    if loop.size and (loop.min() < 0 or loop.max() >= len(v)):
        raise ValueError("boundary loop index out of range")
    if len(np.unique(loop)) != len(loop):
        raise ValueError("boundary loop visits a vertex twice")
    areas = mesh.signed_areas()
    if (areas <= 0).any():
        bad = int(np.argmax(areas <= 0))
        raise ValueError(f"triangle {bad} has non-positive area {areas[bad]:g}")
    # loop orientation: the boundary polygon must be counterclockwise
    pts = v[loop]
    poly_area = 0.5 * float(np.sum(pts[:, 0] * np.roll(pts[:, 1], -1) - np.roll(pts[:, 0], -1) * pts[:, 1]))
    if poly_area <= 0:
        raise ValueError("boundary loop is not counterclockwise")
    # each loop edge must be an edge of exactly one triangle
    edge_count: dict[tuple[int, int], int] = {}
    for tri in t:
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (min(a, b), max(a, b))
            edge_count[key] = edge_count.get(key, 0) + 1
    for i in range(len(loop)):
        a, b = int(loop[i]), int(loop[(i + 1) % len(loop)])
        n = edge_count.get((min(a, b), max(a, b)), 0)
        if n != 1:
            raise ValueError(f"boundary edge ({a}, {b}) belongs to {n} triangles, expected 1")


def _base_hexagon() -> Mesh:
    # fan of the regular hexagon: center + 6 rim vertices, CCW triangles
    angles = np.arange(6) * (np.pi / 3.0)
    rim = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    vertices = np.vstack([[0.0, 0.0], rim])
    triangles = np.array([[0, 1 + i, 1 + (i + 1) % 6] for i in range(6)], dtype=np.int64)
    loop = np.arange(1, 7, dtype=np.int64)
    return Mesh(vertices, triangles, loop)


def _subdivide(mesh: Mesh) -> Mesh:
    """One uniform midpoint subdivision with circle projection of boundary midpoints."""
    v = mesh.vertices
    loop = mesh.boundary_loop
    nb = len(loop)
    boundary_edges = {
        (min(int(loop[i]), int(loop[(i + 1) % nb])), max(int(loop[i]), int(loop[(i + 1) % nb])))
        for i in range(nb)
    }

    new_vertices = [v]
    midpoint_of: dict[tuple[int, int], int] = {}
    next_index = len(v)

    def midpoint(a: int, b: int) -> int:
        nonlocal next_index
        key = (min(a, b), max(a, b))
        idx = midpoint_of.get(key)
        if idx is not None:
            return idx
        p = 0.5 * (v[a] + v[b])
        if key in boundary_edges:
            p = p / np.hypot(p[0], p[1])  # project onto the unit circle
        new_vertices.append(p[None, :])
        midpoint_of[key] = next_index
        next_index += 1
        return next_index - 1

    new_triangles = np.empty((4 * mesh.num_triangles, 3), dtype=np.int64)
    for k, (i0, i1, i2) in enumerate(mesh.triangles):
        m01 = midpoint(int(i0), int(i1))
        m12 = midpoint(int(i1), int(i2))
        m20 = midpoint(int(i2), int(i0))
        # 1-to-4 split preserves orientation
        new_triangles[4 * k + 0] = (i0, m01, m20)
        new_triangles[4 * k + 1] = (i1, m12, m01)
        new_triangles[4 * k + 2] = (i2, m20, m12)
        new_triangles[4 * k + 3] = (m01, m12, m20)

    # interleave old loop vertices with the new edge midpoints
    new_loop = np.empty(2 * nb, dtype=np.int64)
    for i in range(nb):
        a, b = int(loop[i]), int(loop[(i + 1) % nb])
        new_loop[2 * i] = a
        new_loop[2 * i + 1] = midpoint_of[(min(a, b), max(a, b))]

    return Mesh(np.vstack(new_vertices), new_triangles, new_loop)


def generate_disk_mesh(refinement_level: int) -> Mesh:
    """Generate a triangulation of the unit disk.

    Parameters
    ----------
    refinement_level : int
        Number of uniform subdivisions of the hexagon-fan base mesh.
        Each level quadruples the triangle count and roughly halves the
        maximum edge length.  Must be between 0 and 8.

    Returns
    -------
    Mesh
        Valid mesh with all boundary vertices on the unit circle.
    """
    if not (0 <= int(refinement_level) <= MAX_REFINEMENT):
        raise ValueError(f"refinement_level must be in [0, {MAX_REFINEMENT}], got {refinement_level}")
    mesh = _base_hexagon()
    for _ in range(int(refinement_level)):
        mesh = _subdivide(mesh)
    validate_mesh(mesh)
    return mesh


def boundary_geometry(mesh: Mesh) -> BoundaryGeometry:
    """Compute lumped arc-length weights and nodal curvature for the loop.

    Curvature is exactly 1 when every boundary vertex lies within 1e-9 of
    the unit circle; otherwise it is estimated per node from the
    circumscribed circle of three consecutive boundary points (signed by
    turning direction, 0 for collinear points).
    """
    loop = mesh.boundary_loop
    if loop.size == 0:
        raise ValueError("mesh has no boundary loop")
    lengths = mesh.boundary_edge_lengths
    # node i is flanked by loop edges i-1 and i
    node_weight = 0.5 * (np.roll(lengths, 1) + lengths)
    total = float(lengths.sum())

    pts = mesh.vertices[loop]
    radii = np.hypot(pts[:, 0], pts[:, 1])
    if np.max(np.abs(radii - 1.0)) <= 1e-9:
        curvature = np.ones(len(loop))
    else:
        prev_pts = np.roll(pts, 1, axis=0)
        next_pts = np.roll(pts, -1, axis=0)
        e1 = pts - prev_pts
        e2 = next_pts - pts
        chord = next_pts - prev_pts
        cross = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        denom = (
            np.hypot(e1[:, 0], e1[:, 1])
            * np.hypot(e2[:, 0], e2[:, 1])
            * np.hypot(chord[:, 0], chord[:, 1])
        )
        with np.errstate(divide="ignore", invalid="ignore"):
            curvature = np.where(denom > 0, 2.0 * cross / denom, 0.0)

    return BoundaryGeometry(node_curvature=curvature, node_weight=node_weight, total_length=total)


# ---------------------------------------------------------------------------
# text format: "patmesh 1"


def save_mesh(mesh: Mesh, path) -> None:
    """Write a mesh in the ``patmesh 1`` text format (17 significant digits)."""
    with open(path, "w", encoding="ascii") as f:
        f.write("patmesh 1\n")
        f.write(f"vertices {mesh.num_vertices}\n")
        for x, y in mesh.vertices:
            f.write(f"{x:.17g} {y:.17g}\n")
        f.write(f"triangles {mesh.num_triangles}\n")
        for i, j, k in mesh.triangles:
            f.write(f"{i} {j} {k}\n")
        f.write(f"boundary {mesh.num_boundary}\n")
        for i in mesh.boundary_loop:
            f.write(f"{i}\n")


class _LineReader:
    """Iterate non-empty, non-comment lines of a text file, tracking line numbers."""

    def __init__(self, path):
        self.path = str(path)
        with open(path, "r", encoding="ascii") as f:
            self._lines = f.readlines()
        self._pos = 0
        self.lineno = 0

    def next(self) -> str:
        while self._pos < len(self._lines):
            raw = self._lines[self._pos]
            self._pos += 1
            self.lineno = self._pos
            text = raw.split("#", 1)[0].strip()
            if text:
                return text
        raise FormatError(f"{self.path}:{len(self._lines)}: unexpected end of file")

    def error(self, message: str) -> FormatError:
        return FormatError(f"{self.path}:{self.lineno}: {message}")


def _expect_count(reader: _LineReader, keyword: str) -> int:
    line = reader.next()
    parts = line.split()
    if len(parts) != 2 or parts[0] != keyword:
        raise reader.error(f"expected '{keyword} <count>', got '{line}'")
    try:
        n = int(parts[1])
    except ValueError:
        raise reader.error(f"bad {keyword} count '{parts[1]}'") from None
    if n < 0:
        raise reader.error(f"negative {keyword} count")
    return n


def load_mesh(path) -> Mesh:
    """Read a ``patmesh 1`` file; errors carry ``path:line``."""
    reader = _LineReader(path)
    header = reader.next()
    if header.split() != ["patmesh", "1"]:
        raise reader.error(f"bad header '{header}', expected 'patmesh 1'")

    nv = _expect_count(reader, "vertices")
    vertices = np.empty((nv, 2))
    for i in range(nv):
        parts = reader.next().split()
        if len(parts) != 2:
            raise reader.error("expected 'x y'")
        try:
            vertices[i] = [float(parts[0]), float(parts[1])]
        except ValueError:
            raise reader.error(f"bad coordinate in '{' '.join(parts)}'") from None

    nt = _expect_count(reader, "triangles")
    triangles = np.empty((nt, 3), dtype=np.int64)
    for i in range(nt):
        parts = reader.next().split()
        if len(parts) != 3:
            raise reader.error("expected 'i j k'")
        try:
            tri = [int(p) for p in parts]
        except ValueError:
            raise reader.error(f"bad triangle index in '{' '.join(parts)}'") from None
        if min(tri) < 0 or max(tri) >= nv:
            raise reader.error(f"triangle index out of range in '{' '.join(parts)}'")
        triangles[i] = tri

    nb = _expect_count(reader, "boundary")
    loop = np.empty(nb, dtype=np.int64)
    for i in range(nb):
        part = reader.next()
        try:
            idx = int(part)
        except ValueError:
            raise reader.error(f"bad boundary index '{part}'") from None
        if idx < 0 or idx >= nv:
            raise reader.error(f"boundary index {idx} out of range")
        loop[i] = idx

    mesh = Mesh(vertices, triangles, loop)
    try:
        validate_mesh(mesh)
    except ValueError as exc:
        if "boundary edge" in str(exc):
            raise FormatError(f"{reader.path}:{reader.lineno}: boundary loop not closed ({exc})") from None
        raise FormatError(f"{reader.path}:{reader.lineno}: {exc}") from None
    return mesh
