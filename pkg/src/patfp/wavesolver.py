"""Time-domain wave solvers on the assembled P1 system.

Forward problem: march

    M p'' + C p' + (A + G) p = 0,   p(0) = p0,  p'(0) = -p1,

with second-order central differences, damping treated implicitly
through the symmetric positive definite matrix M + (dt/2) C, and record
the pressure trace on the boundary loop.

Adjoint problem: the backwards-in-time system

    M xi'' - C xi' + (A + G) xi = (1/rho_b) B_gamma phi(t),

with vanishing Cauchy data at t = T, integrated by substituting
tau = T - t, which restores the forward scheme's damping sign and turns
the terminal conditions into zero initial data with a time-reversed
boundary load.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .assembly import SystemMatrices
from .errors import CFLError
from .mesh import Mesh

BOUNDARY_TRACE_TOL = 1e-12


@dataclass(frozen=True)
class WaveRunConfig:
    """Time-marching parameters.

    Parameters
    ----------
    dt : float
        Time step, > 0.
    T : float
        Final time, >= dt.
    record_full : bool
        Store interior snapshots every `snapshot_every` steps.
    snapshot_every : int
        Snapshot stride (only used when `record_full`).
    record_energy : bool
        Evaluate the discrete energy at every half step.
    """

    dt: float
    T: float
    record_full: bool = False
    snapshot_every: int = 10
    record_energy: bool = False

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.T < self.dt:
            raise ValueError(f"T must be at least dt, got T={self.T}, dt={self.dt}")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")

    @property
    def num_steps(self) -> int:
        return int(math.floor(self.T / self.dt + 1e-9))


@dataclass(frozen=True)
class BoundaryTrace:
    """A scalar sampled on the boundary loop at uniform time steps.

    `values[n, k]` is the sample at time n*dt on boundary node k in
    loop order.  Row 0 corresponds to t = 0.
    """

    values: np.ndarray
    dt: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1:
            raise ValueError("trace values must be a (time, node) matrix")
        object.__setattr__(self, "values", v)
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")

    @property
    def num_steps(self) -> int:
        return self.values.shape[0] - 1

    @property
    def num_nodes(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.values.shape[0]) * self.dt


def theta_weights(num_samples: int, dt: float) -> np.ndarray:
    """Composite trapezoidal quadrature weights on a uniform grid."""
    if num_samples < 2:
        raise ValueError("need at least 2 samples")
    theta = np.full(num_samples, dt)
    theta[0] = theta[-1] = dt / 2.0
    return theta


def trace_inner(u: BoundaryTrace, v: BoundaryTrace, loop_weight) -> float:
    """Space-time boundary inner product.

    Trapezoidal rule in time; in space either the consistent boundary
    mass matrix (2-D ``loop_weight``, the default pairing used throughout
    the reconstruction pipeline) or lumped arc-length weights (1-D
    ``loop_weight``):  sum_n theta_n * u[n] . (W v[n]).
    """
    if u.values.shape != v.values.shape:
        raise ValueError(f"trace shape mismatch: {u.values.shape} vs {v.values.shape}")
    theta = theta_weights(u.values.shape[0], u.dt)
    w = loop_weight
    if np.ndim(w) == 1:
        return float(np.einsum("n,nk,k,nk->", theta, u.values, np.asarray(w), v.values))
    weighted = (w @ v.values.T).T
    return float(np.einsum("n,nk,nk->", theta, u.values, weighted))


def trace_norm(u: BoundaryTrace, loop_weight) -> float:
    return math.sqrt(max(trace_inner(u, u, loop_weight), 0.0))


@dataclass(frozen=True)
class ForwardSolution:
    """Result of a forward march: boundary trace plus optional extras.

    `snapshots` is a list of (step index, full nodal field) pairs;
    `energy` holds the discrete half-step energies

        E_{n+1/2} = 1/2 d_n' M d_n + 1/2 p_{n+1}' (A+G) p_n,
        d_n = (p_{n+1} - p_n)/dt,

    the quantity the damped central scheme dissipates exactly.
    """

    trace: BoundaryTrace
    snapshots: list | None = None
    energy: np.ndarray | None = None
    final_state: tuple | None = None


def _check_cfl(mats: SystemMatrices, dt: float) -> None:
    limit = mats.stable_dt()
    if dt > limit:
        raise CFLError(
            f"time step {dt:.6g} exceeds the stability limit {limit:.6g} "
            f"for this mesh and wave speed"
        )


def solve_forward(
    p0: np.ndarray, p1: np.ndarray, mats: SystemMatrices, cfg: WaveRunConfig
) -> ForwardSolution:
    """March the damped wave equation and record the boundary trace.

    Parameters
    ----------
    p0 : (V,) array
        Initial pressure; must vanish on boundary nodes (|.| <= 1e-12).
    p1 : (V,) array
        Initial datum entering as p'(0) = -p1.
    mats : SystemMatrices
    cfg : WaveRunConfig

    Returns
    -------
    ForwardSolution

    Raises
    ------
    CFLError
        If dt exceeds the spectral stability limit.
    ValueError
        If p0 has a nonzero boundary trace or shapes mismatch.
    """
    V = mats.M.shape[0]
    p0 = np.asarray(p0, dtype=np.float64)
    p1 = np.asarray(p1, dtype=np.float64)
    if p0.shape != (V,) or p1.shape != (V,):
        raise ValueError(f"initial fields must have shape ({V},)")
    loop = mats.boundary_loop
    worst = float(np.max(np.abs(p0[loop]))) if loop.size else 0.0
    if worst > BOUNDARY_TRACE_TOL:
        raise ValueError(
            f"p0 must vanish on the boundary (max |trace| = {worst:.3e} > {BOUNDARY_TRACE_TOL:g})"
        )
    _check_cfl(mats, cfg.dt)

    dt = cfg.dt
    N = cfg.num_steps
    M, C, K = mats.M, mats.C, mats.K
    S_lu = mats.stepping_solve(dt)
    S2 = (M - (dt / 2.0) * C).tocsr()

    trace = np.empty((N + 1, loop.size))
    snapshots = [] if cfg.record_full else None
    energy = np.empty(N) if cfg.record_energy else None

    p_prev = p0.copy()
    # First step: Taylor expansion, with the PDE supplying p''(0) = M^-1 (C p1 - K p0).
    accel0 = mats.mass_solve().solve(C @ p1 - K @ p0)
    p_cur = p0 - dt * p1 + 0.5 * dt * dt * accel0

    trace[0] = p_prev[loop]
    trace[1] = p_cur[loop]
    if snapshots is not None:
        snapshots.append((0, p_prev.copy()))
        if 1 % cfg.snapshot_every == 0 or N == 1:
            snapshots.append((1, p_cur.copy()))
    K_prev = K @ p_prev
    if energy is not None:
        d = (p_cur - p_prev) / dt
        energy[0] = 0.5 * (d @ (M @ d)) + 0.5 * (p_cur @ K_prev)

    for n in range(1, N):
        K_cur = K @ p_cur
        rhs = 2.0 * (M @ p_cur) - S2 @ p_prev - dt * dt * K_cur
        p_next = S_lu.solve(rhs)
        if energy is not None:
            d = (p_next - p_cur) / dt
            energy[n] = 0.5 * (d @ (M @ d)) + 0.5 * (p_next @ K_cur)
        p_prev, p_cur = p_cur, p_next
        trace[n + 1] = p_cur[loop]
        if snapshots is not None and ((n + 1) % cfg.snapshot_every == 0 or n + 1 == N):
            snapshots.append((n + 1, p_cur.copy()))

    if not np.all(np.isfinite(trace)):
        raise CFLError("forward march produced non-finite values")
    return ForwardSolution(
        trace=BoundaryTrace(values=trace, dt=dt),
        snapshots=snapshots,
        energy=energy,
        final_state=(p_prev, p_cur),
    )


def solve_adjoint_ibvp(
    phi: BoundaryTrace, mats: SystemMatrices, cfg: WaveRunConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate the boundary-driven backwards problem; return its Cauchy data at t = 0.

    The system M xi'' - C xi' + K xi = (1/rho_b) B_gamma phi with
    xi(T) = xi'(T) = 0 is solved via eta(tau) = xi(T - tau), which obeys
    the forward-damped scheme with source (1/rho_b) B_gamma phi(T - tau)
    and zero initial data.

    Parameters
    ----------
    phi : BoundaryTrace
        Boundary load sampled on the same time grid as cfg.
    mats, cfg
        As in solve_forward.

    Returns
    -------
    (xi_dot0, xi0) : pair of (V,) arrays
        Time derivative and value of xi at t = 0.
    """
    N = cfg.num_steps
    loop = mats.boundary_loop
    if phi.values.shape != (N + 1, loop.size):
        raise ValueError(
            f"boundary load grid mismatch: trace is {phi.values.shape}, "
            f"run needs {(N + 1, loop.size)}"
        )
    if abs(phi.dt - cfg.dt) > 1e-12 * cfg.dt:
        raise ValueError(f"boundary load dt {phi.dt!r} does not match run dt {cfg.dt!r}")
    if N < 2:
        raise ValueError("adjoint march needs at least 2 time steps")
    _check_cfl(mats, cfg.dt)

    dt = cfg.dt
    V = mats.M.shape[0]
    M, C, K = mats.M, mats.C, mats.K
    S_lu = mats.stepping_solve(dt)
    S2 = (M - (dt / 2.0) * C).tocsr()
    B_loop = mats.B_loop
    inv_rho_b = 1.0 / mats.params.rho_b

    def load(step: int) -> np.ndarray:
        g = np.zeros(V)
        g[loop] = inv_rho_b * (B_loop @ phi.values[N - step])
        return g

    eta_prev2 = None
    eta_prev = np.zeros(V)
    eta_cur = 0.5 * dt * dt * mats.mass_solve().solve(load(0))
    for n in range(1, N):
        rhs = 2.0 * (M @ eta_cur) - S2 @ eta_prev - dt * dt * (K @ eta_cur) + dt * dt * load(n)
        eta_prev2, eta_prev, eta_cur = eta_prev, eta_cur, S_lu.solve(rhs)

    # eta(tau) = xi(T - tau): xi(0) = eta(T); xi'(0) = -eta'(T), with eta'(T)
    # from the second-order one-sided difference at the last grid point.
    xi0 = eta_cur
    eta_dot_T = (3.0 * eta_cur - 4.0 * eta_prev + eta_prev2) / (2.0 * dt)
    return -eta_dot_T, xi0


def restrict_trace(
    trace: BoundaryTrace, from_mesh: Mesh, to_mesh: Mesh, dt: float | None = None
) -> BoundaryTrace:
    """Sample a trace recorded on one mesh's boundary onto another's.

    Spatial restriction matches each target boundary node to the nearest
    source boundary node (exact for nested refinements, where coarse
    boundary nodes are a subset of fine ones); temporal resampling is
    linear interpolation onto the target step.

    Parameters
    ----------
    trace : BoundaryTrace
        Recorded on `from_mesh`'s boundary loop.
    from_mesh, to_mesh : Mesh
    dt : float, optional
        Target time step; defaults to the source step.
    """
    src_xy = from_mesh.vertices[from_mesh.boundary_loop]
    dst_xy = to_mesh.vertices[to_mesh.boundary_loop]
    if trace.num_nodes != src_xy.shape[0]:
        raise ValueError("trace width does not match the source boundary loop")
    d2 = np.sum((dst_xy[:, None, :] - src_xy[None, :, :]) ** 2, axis=2)
    nearest = np.argmin(d2, axis=1)
    values = trace.values[:, nearest]
    if dt is None or abs(dt - trace.dt) <= 1e-12 * trace.dt:
        return BoundaryTrace(values=values.copy(), dt=trace.dt)
    T = trace.num_steps * trace.dt
    n_new = int(math.floor(T / dt + 1e-9))
    t_new = np.arange(n_new + 1) * dt
    t_old = trace.times
    resampled = np.empty((n_new + 1, values.shape[1]))
    for k in range(values.shape[1]):
        resampled[:, k] = np.interp(t_new, t_old, values[:, k])
    return BoundaryTrace(values=resampled, dt=dt)


__all__ = [
    "BOUNDARY_TRACE_TOL",
    "BoundaryTrace",
    "ForwardSolution",
    "WaveRunConfig",
    "restrict_trace",
    "solve_adjoint_ibvp",
    "solve_forward",
    "theta_weights",
    "trace_inner",
    "trace_norm",
]
