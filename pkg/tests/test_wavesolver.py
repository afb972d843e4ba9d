"""Forward and boundary-driven time marching."""

import math

import numpy as np
import pytest

from patfp.errors import CFLError
from patfp.phantoms import smooth_blobs
from patfp.wavesolver import (
    BoundaryTrace,
    WaveRunConfig,
    restrict_trace,
    solve_adjoint_ibvp,
    solve_forward,
    theta_weights,
    trace_inner,
    trace_norm,
)

TWO_BLOBS = [((0.15, 0.1), 0.5, 1.0), ((-0.25, -0.2), 0.4, -0.6)]


def run_cfg(dt: float, T: float = 1.0, **kw) -> WaveRunConfig:
    return WaveRunConfig(dt=dt, T=T, **kw)


def test_run_config_validation():
    with pytest.raises(ValueError):
        WaveRunConfig(dt=0.0, T=1.0)
    with pytest.raises(ValueError):
        WaveRunConfig(dt=0.5, T=0.2)
    with pytest.raises(ValueError):
        WaveRunConfig(dt=0.1, T=1.0, snapshot_every=0)
    assert WaveRunConfig(dt=0.1, T=1.0).num_steps == 10
    assert WaveRunConfig(dt=0.1, T=0.95).num_steps == 9


def test_theta_weights_trapezoid():
    th = theta_weights(5, 0.25)
    assert th[0] == th[-1] == 0.125
    assert np.all(th[1:-1] == 0.25)
    assert abs(float(np.sum(th)) - 1.0) < 1e-15
    with pytest.raises(ValueError):
        theta_weights(1, 0.1)


def test_boundary_trace_validation():
    with pytest.raises(ValueError):
        BoundaryTrace(values=np.zeros(5), dt=0.1)
    with pytest.raises(ValueError):
        BoundaryTrace(values=np.zeros((3, 4)), dt=0.0)
    tr = BoundaryTrace(values=np.zeros((3, 4)), dt=0.5)
    assert tr.num_steps == 2
    assert tr.num_nodes == 4
    assert np.allclose(tr.times, [0.0, 0.5, 1.0])


def test_trace_inner_lumped_and_consistent(system_at):
    sys_ = system_at(1)
    B = sys_.w_loop.size
    rng = np.random.default_rng(3)
    u = BoundaryTrace(values=rng.standard_normal((6, B)), dt=0.2)
    v = BoundaryTrace(values=rng.standard_normal((6, B)), dt=0.2)
    lumped = trace_inner(u, v, sys_.w_loop)
    consistent = trace_inner(u, v, sys_.B_loop)
    # Different quadratures, same scale; both symmetric.
    assert trace_inner(v, u, sys_.w_loop) == pytest.approx(lumped, rel=1e-13)
    assert trace_inner(v, u, sys_.B_loop) == pytest.approx(consistent, rel=1e-13)
    # They agree exactly on space-constant traces (row sums match).
    const = BoundaryTrace(values=np.outer(rng.standard_normal(6), np.ones(B)), dt=0.2)
    assert trace_inner(const, const, sys_.B_loop) == pytest.approx(
        trace_inner(const, const, sys_.w_loop), rel=1e-12
    )
    assert trace_norm(u, sys_.B_loop) > 0.0
    with pytest.raises(ValueError, match="mismatch"):
        trace_inner(u, BoundaryTrace(values=np.zeros((6, B + 1)), dt=0.2), sys_.w_loop)


def test_zero_data_stays_zero(system_at, dt_at):
    sys_ = system_at(1)
    V = sys_.M.shape[0]
    sol = solve_forward(
        np.zeros(V), np.zeros(V), sys_, run_cfg(dt_at(1, 0.35), record_energy=True)
    )
    assert np.max(np.abs(sol.trace.values)) == 0.0
    assert np.max(np.abs(sol.energy)) == 0.0


def test_forward_is_linear(system_at, mesh_at, dt_at):
    sys_ = system_at(1)
    mesh = mesh_at(1)
    cfg = run_cfg(dt_at(1, 0.35))
    x = smooth_blobs(mesh, TWO_BLOBS)
    y = smooth_blobs(mesh, [((0.0, -0.3), 0.45, 0.8)])
    zeros = np.zeros_like(x)
    a, b = 1.7, -0.6
    t_comb = solve_forward(a * x + b * y, zeros, sys_, cfg).trace.values
    t_x = solve_forward(x, zeros, sys_, cfg).trace.values
    t_y = solve_forward(y, zeros, sys_, cfg).trace.values
    scale = np.max(np.abs(t_comb)) or 1.0
    assert np.max(np.abs(t_comb - (a * t_x + b * t_y))) < 1e-11 * scale


def test_scheme_residual_identity(system_at, mesh_at, dt_at):
    """Snapshots satisfy the damped central-difference update exactly."""
    sys_ = system_at(2)
    mesh = mesh_at(2)
    dt = dt_at(2, 0.35)
    cfg = run_cfg(dt, T=0.5, record_full=True, snapshot_every=1)
    p0 = smooth_blobs(mesh, TWO_BLOBS)
    sol = solve_forward(p0, np.zeros_like(p0), sys_, cfg)
    fields = {step: f for step, f in sol.snapshots}
    M, C, K = sys_.M, sys_.C, sys_.K
    worst = 0.0
    scale = 0.0
    for n in range(1, cfg.num_steps):
        pm, pc, pp = fields[n - 1], fields[n], fields[n + 1]
        acc = M @ ((pp - 2.0 * pc + pm) / dt**2)
        damp = C @ ((pp - pm) / (2.0 * dt))
        stiff = K @ pc
        worst = max(worst, float(np.max(np.abs(acc + damp + stiff))))
        scale = max(scale, float(np.max(np.abs(stiff))))
    assert worst < 1e-9 * scale


def test_energy_decays_monotonically(system_at, mesh_at, dt_at):
    sys_ = system_at(2)
    mesh = mesh_at(2)
    cfg = run_cfg(dt_at(2, 0.35), T=2.0, record_energy=True)
    p0 = smooth_blobs(mesh, TWO_BLOBS)
    sol = solve_forward(p0, np.zeros_like(p0), sys_, cfg)
    e = sol.energy
    assert np.all(e >= 0.0)
    assert np.all(np.diff(e) <= 1e-9 * e[0])
    # Radiation through the absorbing boundary removes most of the energy
    # after the wave has crossed the domain.
    assert e[-1] < 0.5 * e[0]


def test_snapshot_stride_and_final(system_at, dt_at):
    sys_ = system_at(1)
    V = sys_.M.shape[0]
    dt = dt_at(1, 0.35)
    cfg = run_cfg(dt, T=23 * dt, record_full=True, snapshot_every=5)
    sol = solve_forward(np.zeros(V), np.zeros(V), sys_, cfg)
    steps = [s for s, _ in sol.snapshots]
    assert steps == [0, 5, 10, 15, 20, 23]


def test_cfl_violation_rejected(system_at):
    sys_ = system_at(1)
    V = sys_.M.shape[0]
    bad_dt = 1.5 * sys_.stable_dt()
    with pytest.raises(CFLError, match="stability limit"):
        solve_forward(np.zeros(V), np.zeros(V), sys_, run_cfg(bad_dt, T=10 * bad_dt))


def test_nonzero_boundary_data_rejected(system_at, dt_at):
    sys_ = system_at(1)
    V = sys_.M.shape[0]
    p0 = np.zeros(V)
    p0[sys_.boundary_loop[0]] = 1e-6
    with pytest.raises(ValueError, match="vanish on the boundary"):
        solve_forward(p0, np.zeros(V), sys_, run_cfg(dt_at(1, 0.35)))


def test_shape_mismatch_rejected(system_at, dt_at):
    sys_ = system_at(1)
    V = sys_.M.shape[0]
    with pytest.raises(ValueError, match="shape"):
        solve_forward(np.zeros(V + 1), np.zeros(V), sys_, run_cfg(dt_at(1, 0.35)))


def test_adjoint_march_zero_load(system_at, dt_at):
    sys_ = system_at(1)
    dt = dt_at(1, 0.35)
    cfg = run_cfg(dt, T=20 * dt)
    B = sys_.w_loop.size
    phi = BoundaryTrace(values=np.zeros((cfg.num_steps + 1, B)), dt=dt)
    xi_dot0, xi0 = solve_adjoint_ibvp(phi, sys_, cfg)
    assert np.max(np.abs(xi_dot0)) == 0.0
    assert np.max(np.abs(xi0)) == 0.0


def test_adjoint_march_is_linear(system_at, dt_at, rng):
    sys_ = system_at(1)
    dt = dt_at(1, 0.35)
    cfg = run_cfg(dt, T=20 * dt)
    B = sys_.w_loop.size
    shape = (cfg.num_steps + 1, B)
    u = rng.standard_normal(shape)
    v = rng.standard_normal(shape)
    a, b = 0.3, -2.0

    def solve(vals):
        return solve_adjoint_ibvp(BoundaryTrace(values=vals, dt=dt), sys_, cfg)

    du, zu = solve(u)
    dv, zv = solve(v)
    dc, zc = solve(a * u + b * v)
    assert np.allclose(dc, a * du + b * dv, atol=1e-11 * max(np.max(np.abs(dc)), 1))
    assert np.allclose(zc, a * zu + b * zv, atol=1e-11 * max(np.max(np.abs(zc)), 1))


def test_adjoint_march_grid_checks(system_at, dt_at):
    sys_ = system_at(1)
    dt = dt_at(1, 0.35)
    cfg = run_cfg(dt, T=20 * dt)
    B = sys_.w_loop.size
    with pytest.raises(ValueError, match="grid mismatch"):
        solve_adjoint_ibvp(
            BoundaryTrace(values=np.zeros((5, B)), dt=dt), sys_, cfg
        )
    with pytest.raises(ValueError, match="does not match run dt"):
        solve_adjoint_ibvp(
            BoundaryTrace(values=np.zeros((cfg.num_steps + 1, B)), dt=2 * dt),
            sys_,
            cfg,
        )


def test_restrict_trace_nested_exact(mesh_at):
    fine, coarse = mesh_at(3), mesh_at(2)
    xy = fine.vertices[fine.boundary_loop]
    f = np.sin(3.0 * np.arctan2(xy[:, 1], xy[:, 0]))
    tr = BoundaryTrace(values=np.vstack([f, 2.0 * f, -f]), dt=0.1)
    out = restrict_trace(tr, fine, coarse)
    cxy = coarse.vertices[coarse.boundary_loop]
    g = np.sin(3.0 * np.arctan2(cxy[:, 1], cxy[:, 0]))
    assert np.array_equal(out.values, np.vstack([g, 2.0 * g, -g]))
    assert out.dt == tr.dt


def test_restrict_trace_resamples_time(mesh_at):
    mesh = mesh_at(1)
    B = mesh.num_boundary
    times = np.arange(11) * 0.1
    vals = np.outer(times, np.ones(B))  # linear in t: interp is exact
    tr = BoundaryTrace(values=vals, dt=0.1)
    out = restrict_trace(tr, mesh, mesh, dt=0.05)
    assert out.values.shape[0] == 21
    assert np.allclose(out.values[:, 0], np.arange(21) * 0.05, atol=1e-14)


def _truncate_pair(u: BoundaryTrace, v: BoundaryTrace) -> tuple[BoundaryTrace, BoundaryTrace]:
    rows = min(u.values.shape[0], v.values.shape[0])
    return (
        BoundaryTrace(values=u.values[:rows], dt=u.dt),
        BoundaryTrace(values=v.values[:rows], dt=v.dt),
    )


def test_trace_converges_under_refinement(mesh_at, system_at, dt_at, params):
    """Boundary traces converge as mesh and step refine together."""
    from patfp.assembly import assemble_system

    gaps = []
    for coarse_lvl, fine_lvl in ((2, 3), (3, 4)):
        cm, fm = mesh_at(coarse_lvl), mesh_at(fine_lvl)
        cs, fs = system_at(coarse_lvl), system_at(fine_lvl)
        cdt, fdt = dt_at(coarse_lvl, 0.05), dt_at(fine_lvl, 0.05)
        pc = smooth_blobs(cm, TWO_BLOBS)
        pf = smooth_blobs(fm, TWO_BLOBS)
        tr_c = solve_forward(pc, np.zeros_like(pc), cs, run_cfg(cdt, T=3.0)).trace
        tr_f = solve_forward(pf, np.zeros_like(pf), fs, run_cfg(fdt, T=3.0)).trace
        down = restrict_trace(tr_f, fm, cm, dt=cdt)
        a, b = _truncate_pair(down, tr_c)
        diff = BoundaryTrace(values=a.values - b.values, dt=cdt)
        gaps.append(trace_norm(diff, cs.B_loop) / trace_norm(b, cs.B_loop))
    assert gaps[1] < gaps[0]
    assert gaps[0] / gaps[1] >= 1.5
