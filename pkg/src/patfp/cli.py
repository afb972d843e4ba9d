"""Command-line front end for the simulation/reconstruction pipeline.

Exit codes: 0 success, 2 configuration or input error, 3 numerical
failure (instability, divergence), 4 file-format or io error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .adjoint import dot_product_check
from .assembly import assemble_system, cfl_dt
from .config import RunConfig, dump_config, parse_config
from .directivity import critical_angle, directivity_table, directivity_zero
from .errors import ConfigError, FormatError, NumericsError
from .fileio import load_field, load_measurement, save_field, save_measurement
from .inversion import landweber, relative_error, save_report
from .mesh import generate_disk_mesh, load_mesh, save_mesh
from .phantoms import shepp_logan, smooth_blobs
from .render import render_field_pgm
from .sensor import Measurement, forward_operator
from .wavesolver import WaveRunConfig, restrict_trace


def _config_from(args) -> RunConfig:
    cfg = parse_config(args.config) if getattr(args, "config", None) else RunConfig()
    for key in ("refinement", "iterations", "seed", "T", "gamma", "cfl_safety"):
        value = getattr(args, key, None)
        if value is not None:
            cfg = replace(cfg, **{key: value})
    return cfg


def _run_grid(cfg: RunConfig, mesh, params) -> WaveRunConfig:
    dt = cfl_dt(mesh, params, cfg.cfl_safety)
    return WaveRunConfig(dt=dt, T=cfg.T)


def _write_pgm(field, mesh, path, resolution) -> None:
    with open(path, "wb") as fh:
        fh.write(render_field_pgm(field, mesh, resolution))


def cmd_mesh(args) -> int:
    cfg = _config_from(args)
    mesh = generate_disk_mesh(cfg.refinement)
    out = args.out or cfg.mesh_path
    if not out:
        raise ConfigError("mesh: no output path (--out or config mesh_path)")
    save_mesh(mesh, out)
    print(f"wrote {out}: {mesh.num_vertices} vertices, {mesh.num_triangles} triangles, "
          f"{mesh.num_boundary} boundary nodes")
    return 0


def _make_phantom(kind: str, mesh, scale: float):
    if kind == "shepp-logan":
        return shepp_logan(mesh, scale=scale)
    if kind == "blobs":
        spec = [
            ((-0.28, 0.22), 0.30, 1.0),
            ((0.33, -0.10), 0.24, 0.7),
            ((0.02, -0.38), 0.18, -0.5),
        ]
        return smooth_blobs(mesh, [(c, r * scale / 0.9, a) for c, r, a in spec])
    raise ConfigError(f"unknown phantom kind '{kind}'")


def cmd_phantom(args) -> int:
    mesh = load_mesh(args.mesh)
    field = _make_phantom(args.kind, mesh, args.scale)
    save_field(field, args.out)
    print(f"wrote {args.out}: {field.size} values on {args.mesh}")
    if args.pgm:
        _write_pgm(field, mesh, args.pgm, args.resolution)
        print(f"wrote {args.pgm}")
    return 0


def cmd_forward(args) -> int:
    cfg = _config_from(args)
    mesh = load_mesh(args.mesh)
    params = cfg.medium()
    system = assemble_system(mesh, params)
    p0 = load_field(args.phantom)
    if p0.size != mesh.num_vertices:
        raise ConfigError(
            f"phantom has {p0.size} values, mesh has {mesh.num_vertices} vertices"
        )
    run = _run_grid(cfg, mesh, params)
    measurement = forward_operator(p0, np.zeros_like(p0), system, run, model=args.model)
    save_measurement(measurement, args.out)
    print(f"wrote {args.out}: {measurement.trace.values.shape[0]} samples x "
          f"{measurement.trace.num_nodes} boundary nodes, dt = {run.dt:.6g}, model = {args.model}")
    return 0


def cmd_reconstruct(args) -> int:
    cfg = _config_from(args)
    mesh = load_mesh(args.mesh)
    params = cfg.medium()
    system = assemble_system(mesh, params)
    data = load_measurement(args.data)
    if data.trace.num_nodes != mesh.num_boundary:
        raise ConfigError(
            f"data has {data.trace.num_nodes} boundary columns, "
            f"mesh has {mesh.num_boundary} boundary nodes"
        )
    run = WaveRunConfig(dt=data.trace.dt, T=data.trace.num_steps * data.trace.dt)
    truth = None
    if args.truth:
        truth = load_field(args.truth)
        if truth.size != mesh.num_vertices:
            raise ConfigError("ground-truth field does not match the mesh")
    report = landweber(
        data, system, run,
        gamma=cfg.gamma, iterations=cfg.iterations, ground_truth=truth,
        adjoint=args.adjoint, keep_every=args.keep_every, norm_seed=cfg.seed,
    )
    save_report(report, args.out_dir)
    save_field(report.reconstruction, os.path.join(args.out_dir, "reconstruction.patfield"))
    _write_pgm(report.reconstruction, mesh, os.path.join(args.out_dir, "reconstruction.pgm"),
               args.resolution)
    line = (f"model = {report.model}, gamma = {report.gamma:.6g}, "
            f"iterations = {report.iterations}, final residual = {report.residual_history[-1]:.6g}")
    if report.error_history is not None:
        line += f", final relative error = {report.error_history[-1]:.6g}"
    print(line)
    print(f"wrote {args.out_dir}")
    return 0


def cmd_directivity(args) -> int:
    cfg = _config_from(args)
    params = cfg.medium()
    rows = directivity_table(params, step_deg=args.step)
    crit = critical_angle(params)
    zero = directivity_zero(params)
    lines = []
    lines.append(f"# critical_angle_deg = {'none' if crit is None else format(crit, '.10f')}")
    lines.append(f"# zero_crossing_deg = {'none' if zero is None else format(zero, '.10f')}")
    lines.append("theta_deg,R,D")
    for theta, R, D in rows:
        lines.append(f"{theta:.10g},{R:.17g},{D:.17g}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(text)
        print(f"wrote {args.out} ({rows.shape[0]} rows)")
    else:
        sys.stdout.write(text)
    return 0


def cmd_adjoint_test(args) -> int:
    cfg = _config_from(args)
    mesh = generate_disk_mesh(cfg.refinement)
    params = cfg.medium()
    system = assemble_system(mesh, params)
    run = _run_grid(cfg, mesh, params)
    report = dot_product_check(
        system, run, pairs=args.pairs, seed=cfg.seed,
        model=args.model, adjoint=args.adjoint,
    )
    for i, (lhs, rhs, mm) in enumerate(zip(report.lhs, report.rhs, report.mismatches)):
        print(f"pair {i:02d}: <Fx,psi> = {lhs:+.9e}  <x,F*psi> = {rhs:+.9e}  "
              f"relative mismatch = {mm:.3e}")
    print(f"median relative mismatch = {report.median:.6e} over {args.pairs} pairs "
          f"({args.adjoint} adjoint, {args.model} model, refinement {cfg.refinement})")
    return 0


def cmd_compare(args) -> int:
    cfg = _config_from(args)
    params = cfg.medium()
    coarse = generate_disk_mesh(cfg.refinement)
    fine = generate_disk_mesh(cfg.refinement + 1)
    coarse_sys = assemble_system(coarse, params)
    fine_sys = assemble_system(fine, params)

    run_c = _run_grid(cfg, coarse, params)
    dt_f = min(run_c.dt / 2.0, cfl_dt(fine, params, cfg.cfl_safety))
    run_f = WaveRunConfig(dt=dt_f, T=cfg.T)

    truth_fine = _make_phantom(args.phantom, fine, args.scale)
    truth_coarse = _make_phantom(args.phantom, coarse, args.scale)

    data_fine = forward_operator(
        truth_fine, np.zeros_like(truth_fine), fine_sys, run_f, model="fabry_perot"
    )
    data = Measurement(
        trace=restrict_trace(data_fine.trace, fine, coarse, dt=run_c.dt),
        model="fabry_perot",
    )

    os.makedirs(args.out_dir, exist_ok=True)
    save_field(truth_coarse, os.path.join(args.out_dir, "truth.patfield"))
    _write_pgm(truth_coarse, coarse, os.path.join(args.out_dir, "truth.pgm"), args.resolution)
    save_measurement(data, os.path.join(args.out_dir, "data.pattrace"))

    results = {}
    for model in ("fabry_perot", "idealized"):
        tagged = Measurement(trace=data.trace, model=model)
        report = landweber(
            tagged, coarse_sys, run_c,
            gamma=cfg.gamma, iterations=cfg.iterations,
            ground_truth=truth_coarse, norm_seed=cfg.seed,
        )
        sub = os.path.join(args.out_dir, model)
        save_report(report, sub)
        save_field(report.reconstruction, os.path.join(sub, "reconstruction.patfield"))
        _write_pgm(report.reconstruction, coarse, os.path.join(sub, "reconstruction.pgm"),
                   args.resolution)
        _write_pgm(np.abs(report.reconstruction - truth_coarse), coarse,
                   os.path.join(sub, "error.pgm"), args.resolution)
        results[model] = report
        print(f"{model}: final relative error = {report.error_history[-1]:.6g} "
              f"(gamma = {report.gamma:.6g}, {report.iterations} iterations)")

    err_fp = results["fabry_perot"].error_history[-1]
    err_id = results["idealized"].error_history[-1]
    ratio = err_id / err_fp if err_fp > 0 else float("inf")
    with open(os.path.join(args.out_dir, "summary.txt"), "w") as fh:
        fh.write(f"phantom = {args.phantom}\n")
        fh.write(f"refinement_recon = {cfg.refinement}\n")
        fh.write(f"refinement_synthesis = {cfg.refinement + 1}\n")
        fh.write(f"iterations = {cfg.iterations}\n")
        fh.write(f"error_fabry_perot = {err_fp:.17g}\n")
        fh.write(f"error_idealized = {err_id:.17g}\n")
        fh.write(f"error_ratio = {ratio:.17g}\n")
    print(f"error ratio (idealized / fabry_perot) = {ratio:.3g}")
    print(f"wrote {args.out_dir}")
    return 0


def cmd_dump_config(args) -> int:
    cfg = _config_from(args)
    text = dump_config(cfg)
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="patfp",
        description="Photoacoustic tomography with a layered ultrasound sensor: "
                    "simulate boundary measurements and reconstruct the initial pressure.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--deterministic", action="store_true",
        help="force a fixed reduction order (the solvers are always deterministic; "
             "accepted for interface stability)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config=True):
        if config:
            p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--refinement", type=int, help="mesh refinement level (0-8)")
        p.add_argument("--seed", type=int, help="random seed")

    p = sub.add_parser("mesh", help="generate a triangulated unit-disk mesh")
    add_common(p)
    p.add_argument("--out", help="output .patmesh path")
    p.set_defaults(func=cmd_mesh)

    p = sub.add_parser("phantom", help="evaluate a phantom on a mesh")
    p.add_argument("--mesh", required=True)
    p.add_argument("--kind", choices=("shepp-logan", "blobs"), default="shepp-logan")
    p.add_argument("--scale", type=float, default=0.9)
    p.add_argument("--out", required=True, help="output .patfield path")
    p.add_argument("--pgm", help="also rasterize to this PGM file")
    p.add_argument("--resolution", type=int, default=256)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("forward", help="simulate and emit a boundary measurement")
    add_common(p)
    p.add_argument("--mesh", required=True)
    p.add_argument("--phantom", required=True, help="initial pressure .patfield")
    p.add_argument("--model", choices=("fabry_perot", "idealized"), default="fabry_perot")
    p.add_argument("--T", type=float, help="final time")
    p.add_argument("--cfl-safety", dest="cfl_safety", type=float)
    p.add_argument("--out", required=True, help="output .pattrace path")
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("reconstruct", help="Landweber reconstruction from a measurement")
    add_common(p)
    p.add_argument("--mesh", required=True)
    p.add_argument("--data", required=True, help="measurement .pattrace")
    p.add_argument("--truth", help="ground-truth .patfield for error tracking")
    p.add_argument("--iterations", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--adjoint", choices=("continuous", "discrete"), default="continuous")
    p.add_argument("--keep-every", dest="keep_every", type=int, default=0)
    p.add_argument("--resolution", type=int, default=256)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("directivity", help="tabulate the sensor's angular response")
    add_common(p)
    p.add_argument("--step", type=float, default=0.1, help="angle step in degrees")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_directivity)

    p = sub.add_parser("adjoint-test", help="dot-product consistency report")
    add_common(p)
    p.add_argument("--pairs", type=int, default=20)
    p.add_argument("--model", choices=("fabry_perot", "idealized"), default="fabry_perot")
    p.add_argument("--adjoint", choices=("continuous", "discrete"), default="continuous")
    p.add_argument("--T", type=float, help="final time")
    p.set_defaults(func=cmd_adjoint_test)

    p = sub.add_parser(
        "compare",
        help="synthesize data on a finer mesh, reconstruct under both measurement models",
    )
    add_common(p)
    p.add_argument("--phantom", choices=("shepp-logan", "blobs"), default="shepp-logan")
    p.add_argument("--scale", type=float, default=0.9)
    p.add_argument("--iterations", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--resolution", type=int, default=256)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("dump-config", help="print the effective configuration")
    add_common(p)
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_dump_config)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"patfp: config error: {exc}", file=sys.stderr)
        return 2
    except FormatError as exc:
        print(f"patfp: format error: {exc}", file=sys.stderr)
        return 4
    except NumericsError as exc:
        print(f"patfp: numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"patfp: invalid input: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"patfp: io error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
