"""P1 finite-element assembly on the disk mesh.

Interior operators: the c^-2-weighted mass matrix M and the stiffness
matrix A for the weak form of the wave equation.  Boundary operators on
the closed loop Gamma: the consistent 1D mass B_gamma, the periodic 1D
stiffness S_gamma (Laplace-Beltrami on the polyline), and the derived
damping/curvature matrices C and G of the absorbing boundary condition

    rho_b dp/dn = rho * (-c_b^-1 dp/dt - H p)   on Gamma.

Assembly is deterministic: element triplets are brought to a canonical
order before summation, so permuting the triangle list yields bitwise
identical matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import NumericsError
from .medium import MediumParams
from .mesh import BoundaryGeometry, Mesh, boundary_geometry

DEGENERATE_AREA = 1e-14


def _canonical_coo(rows, cols, vals, shape):
    """Sum duplicate (i, j) triplets in a canonical order.

    Sorting by (i, j, value) before reduction makes the floating-point
    sums independent of element order, so assembly is bitwise
    reproducible under permutation of the element list.
    """
    rows = np.asarray(rows, dtype=np.int64).ravel()
    cols = np.asarray(cols, dtype=np.int64).ravel()
    vals = np.asarray(vals, dtype=np.float64).ravel()
    order = np.lexsort((vals, cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    key_change = np.empty(rows.size, dtype=bool)
    key_change[0] = True
    np.not_equal(rows[1:], rows[:-1], out=key_change[1:])
    key_change[1:] |= cols[1:] != cols[:-1]
    starts = np.flatnonzero(key_change)
    summed = np.add.reduceat(vals, starts)
    mat = sp.csr_matrix((summed, (rows[starts], cols[starts])), shape=shape)
    mat.sort_indices()
    return mat


def assemble_interior(mesh: Mesh, params: MediumParams, lumped: bool = False):
    """Assemble the interior mass and stiffness matrices.

    Parameters
    ----------
    mesh : Mesh
    params : MediumParams
        Supplies the wave speed; the mass matrix is weighted by c^-2,
        evaluated per triangle as the vertex average of c^-2.
    lumped : bool
        Row-sum lump the mass matrix (diagonal M).  Default consistent.

    Returns
    -------
    M : (V, V) csr_matrix
        Symmetric positive definite c^-2-weighted mass.
    A : (V, V) csr_matrix
        Symmetric positive semidefinite stiffness, A @ 1 = 0.
    """
    V = mesh.num_vertices
    tri = mesh.triangles
    pts = mesh.vertices
    x = pts[:, 0][tri]  # (T, 3)
    y = pts[:, 1][tri]

    # Gradient coefficients of the barycentric basis: grad l_i = (b_i, c_i)/(2|T|)
    # with b_i = y_j - y_k, c_i = x_k - x_j (i, j, k cyclic).
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    area2 = x[:, 0] * b[:, 0] + x[:, 1] * b[:, 1] + x[:, 2] * b[:, 2]  # = 2*area
    area = 0.5 * area2
    bad = np.flatnonzero(area < DEGENERATE_AREA)
    if bad.size:
        raise NumericsError(
            f"degenerate triangle {bad[0]}: area {area[bad[0]]:.3e} below {DEGENERATE_AREA:g}"
        )

    c_vertex = params.c_at_vertices(V)
    w = np.mean(c_vertex[tri] ** -2.0, axis=1)  # per-triangle c^-2 weight

    rows = np.repeat(tri, 3, axis=1).ravel()          # i index: t00 t00 t00 t01 ...
    cols = np.tile(tri, (1, 3)).ravel()               # j index: t00 t01 t02 t00 ...

    # Stiffness: A^e_ij = (b_i b_j + c_i c_j)/(4|T|).
    grad_outer = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :])
    a_vals = grad_outer / (4.0 * area)[:, None, None]
    A = _canonical_coo(rows, cols, a_vals, (V, V))

    if lumped:
        m_diag = np.zeros(V)
        np.add.at(m_diag, tri.ravel(), np.repeat(w * area / 3.0, 3))
        M = sp.csr_matrix(sp.diags(m_diag))
    else:
        # Consistent mass: M^e = w*|T|/12 * [[2,1,1],[1,2,1],[1,1,2]].
        base = (np.ones((3, 3)) + np.eye(3)) / 12.0
        m_vals = (w * area)[:, None, None] * base
        M = _canonical_coo(rows, cols, m_vals, (V, V))
    return M, A


def assemble_boundary(mesh: Mesh, geom: BoundaryGeometry, params: MediumParams):
    """Assemble the boundary-loop operators as (V, V) matrices.

    B_gamma is the consistent 1D P1 mass on the boundary polyline,
    S_gamma the periodic 1D P1 stiffness (weak Laplace-Beltrami), and

        C = (rho / (rho_b c_b)) B_gamma,   G = (rho H / rho_b) B_gamma

    are the damping and curvature matrices of the absorbing condition.
    All four are supported on boundary nodes only.

    Returns
    -------
    (B_gamma, S_gamma, C, G) : csr matrices, shape (V, V).
    """
    V = mesh.num_vertices
    loop = mesh.boundary_loop
    if loop.size < 3:
        raise NumericsError("boundary loop must be closed with at least 3 nodes")
    nxt = np.roll(loop, -1)
    ell = mesh.boundary_edge_lengths  # edge k: loop[k] -> loop[k+1]

    i0, i1 = loop, nxt
    rows = np.concatenate([i0, i0, i1, i1])
    cols = np.concatenate([i0, i1, i0, i1])
    b_vals = np.concatenate([ell / 3.0, ell / 6.0, ell / 6.0, ell / 3.0])
    s_vals = np.concatenate([1.0 / ell, -1.0 / ell, -1.0 / ell, 1.0 / ell])
    B_gamma = _canonical_coo(rows, cols, b_vals, (V, V))
    S_gamma = _canonical_coo(rows, cols, s_vals, (V, V))

    C = (params.rho / (params.rho_b * params.c_b)) * B_gamma
    G = (params.rho * params.curvature_H / params.rho_b) * B_gamma
    return B_gamma, S_gamma, C, G


def cfl_dt(mesh: Mesh, params: MediumParams, safety: float) -> float:
    """Stable time-step estimate: safety * min(2*area/longest edge) / c_max.

    Parameters
    ----------
    safety : float in (0, 1]
        Fraction of the geometric limit to use.
    """
    if not 0.0 < safety <= 1.0:
        raise ValueError(f"safety must lie in (0, 1], got {safety}")
    pts = mesh.vertices[mesh.triangles]  # (T, 3, 2)
    e = np.stack(
        [pts[:, 1] - pts[:, 0], pts[:, 2] - pts[:, 1], pts[:, 0] - pts[:, 2]], axis=1
    )
    longest = np.max(np.hypot(e[:, :, 0], e[:, :, 1]), axis=1)
    area = np.abs(mesh.signed_areas())
    h_min = np.min(2.0 * area / longest)
    return safety * h_min / params.c_max


@dataclass(frozen=True)
class SystemMatrices:
    """Assembled operators plus boundary bookkeeping shared by the solvers.

    `M`, `A`, `B_gamma`, `S_gamma`, `C`, `G` are the (V, V) global
    matrices.  `S_loop`/`B_loop` are the boundary operators restricted to
    the loop ordering (B, B) and `w_loop` the lumped boundary weights
    (row sums of B_loop), used for trace inner products and the per-slice
    weak boundary Laplacian.  Factorizations and spectral estimates are
    memoized in `_cache`.
    """

    mesh: Mesh
    params: MediumParams
    geom: BoundaryGeometry
    M: sp.csr_matrix
    A: sp.csr_matrix
    B_gamma: sp.csr_matrix
    S_gamma: sp.csr_matrix
    C: sp.csr_matrix
    G: sp.csr_matrix
    S_loop: sp.csr_matrix
    B_loop: sp.csr_matrix
    w_loop: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def K(self) -> sp.csr_matrix:
        """Explicitly-treated spatial operator A + G."""
        if "K" not in self._cache:
            self._cache["K"] = (self.A + self.G).tocsr()
        return self._cache["K"]

    @property
    def boundary_loop(self) -> np.ndarray:
        return self.mesh.boundary_loop

    def mass_solve(self):
        """Cached sparse LU of M."""
        if "M_lu" not in self._cache:
            self._cache["M_lu"] = splu(self.M.tocsc())
        return self._cache["M_lu"]

    def stepping_solve(self, dt: float):
        """Cached sparse LU of S = M + (dt/2) C for the damped scheme."""
        key = ("S_lu", float(dt))
        if key not in self._cache:
            self._cache[key] = splu((self.M + (dt / 2.0) * self.C).tocsc())
        return self._cache[key]

    def lambda_max(self, iters: int = 80, seed: int = 0) -> float:
        """Power-iteration estimate of the largest eigenvalue of M^-1 K.

        Bounds the stable time step of the central-difference scheme:
        dt <= 2/sqrt(lambda_max).
        """
        if "lambda_max" not in self._cache:
            rng = np.random.default_rng(seed)
            x = rng.standard_normal(self.M.shape[0])
            lu = self.mass_solve()
            K = self.K
            lam = 0.0
            for _ in range(iters):
                y = lu.solve(K @ x)
                norm = np.sqrt(abs(y @ (self.M @ y)))
                if norm == 0.0:
                    break
                x = y / norm
                lam = (x @ (K @ x)) / (x @ (self.M @ x))
            self._cache["lambda_max"] = float(lam)
        return self._cache["lambda_max"]

    def stable_dt(self) -> float:
        """Spectral stability limit 2/sqrt(lambda_max), slightly deflated.

        The power-iteration estimate approaches lambda_max from below, so
        the limit is shrunk by 1% to stay on the safe side.
        """
        return 2.0 / np.sqrt(1.02 * self.lambda_max())

    def mass_inner(self, x: np.ndarray, y: np.ndarray) -> float:
        """c^-2-weighted field inner product <x, y>_M."""
        return float(x @ (self.M @ y))

    def mass_norm(self, x: np.ndarray) -> float:
        return float(np.sqrt(max(self.mass_inner(x, x), 0.0)))


def assemble_system(mesh: Mesh, params: MediumParams, lumped: bool = False) -> SystemMatrices:
    """Assemble every operator needed by the forward and adjoint solvers."""
    geom = boundary_geometry(mesh)
    M, A = assemble_interior(mesh, params, lumped=lumped)
    B_gamma, S_gamma, C, G = assemble_boundary(mesh, geom, params)
    loop = mesh.boundary_loop
    ix = np.ix_(loop, loop)
    S_loop = sp.csr_matrix(S_gamma.tocsc()[ix])
    B_loop = sp.csr_matrix(B_gamma.tocsc()[ix])
    w_loop = np.asarray(B_loop.sum(axis=1)).ravel()
    return SystemMatrices(
        mesh=mesh, params=params, geom=geom,
        M=M, A=A, B_gamma=B_gamma, S_gamma=S_gamma, C=C, G=G,
        S_loop=S_loop, B_loop=B_loop, w_loop=w_loop,
    )


__all__ = [
    "DEGENERATE_AREA",
    "SystemMatrices",
    "assemble_boundary",
    "assemble_interior",
    "assemble_system",
    "cfl_dt",
]
