"""Command-line entry point: ``run``, ``check-mesh``, ``stability``,
``convergence``.

Every simulation is one invocation; snapshots, probe CSVs and the run log go
to the output directory together with a manifest that always names the last
completed step (so an interrupted run leaves usable partial outputs marked
incomplete).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import analysis, bundled, output
from . import solver as sv
from .config import ConfigError, RunConfig, load_config
from .mesh import MeshError, compute_dual_metrics, load_obj, mesh_report

__all__ = ["main", "run_simulation"]


def run_simulation(cfg: RunConfig, initial: sv.FieldState | None = None, echo=print):
    """Execute a configured run; returns the final state.

    The loop keeps only the last two states in memory (snapshots are
    streamed).  A nonzero initial state must satisfy the vertex Gauss law to
    within 1e-8 of its cancellation scale, or the run aborts (configurable to
    warn via flags.initial_constraint).
    """
    surface = load_obj(cfg.mesh_path)
    cfg.validate_against(surface)
    metrics = compute_dual_metrics(
        surface, allow_non_well_centered=cfg.allow_non_well_centered
    )
    materials = cfg.materials(surface)
    stepper = sv.assemble(
        cfg.mode, surface, metrics, materials, cfg.dt,
        solver=cfg.solver_kind, tolerance=cfg.tolerance, max_iters=cfg.max_iters,
        jm_sign=cfg.jm_sign, allow_indefinite=cfg.allow_indefinite,
    )
    stars = stepper.stars

    state = initial if initial is not None else sv.initial_state(cfg.mode, surface)
    if initial is not None:
        res = sv.gauss_residuals(state, surface, stars, materials)
        scale = sv.gauss_residual_scale(state, surface, stars, materials)
        worst = max(np.abs(res.electric).max(), np.abs(res.magnetic).max())
        if worst > 1e-8 * max(scale, 1e-300):
            msg = (
                f"initial data violates the divergence constraint "
                f"(residual {worst:.3e}, scale {scale:.3e})"
            )
            if cfg.initial_constraint == "abort":
                raise sv.SolverError(msg)
            if echo is not None:
                echo(f"warning: {msg}")

    outdir = cfg.output_dir
    os.makedirs(outdir, exist_ok=True)
    probe_writer = output.ProbeWriter(os.path.join(outdir, "probes.csv"), cfg.probes)
    log_writer = output.RunLogWriter(os.path.join(outdir, "run_log.csv"), echo=echo)
    written: list[str] = ["probes.csv", "run_log.csv"]
    manifest_path = os.path.join(outdir, "manifest.txt")

    def snapshot(st):
        stem = f"snapshot_{st.n:06d}"
        if "vtk" in cfg.formats:
            output.write_vtk_snapshot(
                os.path.join(outdir, stem + ".vtk"), surface, metrics, st
            )
            written.append(stem + ".vtk")
        if "csv" in cfg.formats:
            output.write_csv_snapshot(os.path.join(outdir, stem + ".csv"), st)
            written.append(stem + ".csv")

    def manifest(status, last_step):
        output.write_manifest(manifest_path, {
            "status": status,
            "mesh": os.path.basename(cfg.mesh_path),
            "mode": cfg.mode,
            "dt": repr(cfg.dt),
            "steps_requested": cfg.steps,
            "last_completed_step": last_step,
            "solver": cfg.solver_kind,
            "files": ",".join(written),
        })

    def diagnostics(st):
        en = sv.energy(st, stars, materials)
        res = sv.gauss_residuals(st, surface, stars, materials)
        log_writer.record(st, en, res)

    prev = None
    try:
        snapshot(state)
        probe_writer.record(state)
        diagnostics(state)
        manifest("incomplete", 0)
        for _ in range(cfg.steps):
            prev, state = state, sv.step(stepper, state, cfg.source)
            probe_writer.record(state)
            if state.n % cfg.cadence == 0 or state.n == cfg.steps:
                snapshot(state)
                diagnostics(state)
                manifest("incomplete", state.n)
        manifest("complete", state.n)
    except Exception:
        manifest("incomplete", state.n)
        raise
    finally:
        probe_writer.close()
        log_writer.close()
    del prev  # two-level ring: previous state kept alive during the loop
    return state


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    _apply_overrides(cfg, args)
    run_simulation(cfg, echo=None if args.quiet else print)
    print(f"run complete: {cfg.steps} steps, outputs in {cfg.output_dir}")
    return 0


def _cmd_check_mesh(args) -> int:
    surface = load_obj(args.mesh)
    report = mesh_report(surface, path=args.mesh)
    print(report)
    return 0 if report.endswith("PASS") else 1


def _cmd_stability(args) -> int:
    cfg = load_config(args.config)
    _apply_overrides(cfg, args)
    surface = load_obj(cfg.mesh_path)
    metrics = compute_dual_metrics(
        surface, allow_non_well_centered=cfg.allow_non_well_centered
    )
    materials = cfg.materials(surface)
    c_max = float(analysis._face_wave_speed(surface, materials).max())
    dt_base = metrics.dual_edge_len.min() / c_max
    dt_list = [f * dt_base for f in cfg.stability_dt_factors]
    report = analysis.stability_sweep(
        surface, metrics, materials, dt_list, k_samples=cfg.stability_k_samples
    )
    os.makedirs(cfg.output_dir, exist_ok=True)
    output.write_growth_csv(os.path.join(cfg.output_dir, "growth.csv"), report)
    summary = report.summary()
    with open(os.path.join(cfg.output_dir, "summary.txt"), "w") as fh:
        fh.write(summary + "\n")
    print(summary)
    return 0 if report.max_xi <= 1.0 + 1e-12 else 1


def _cmd_convergence(args) -> int:
    cfg = load_config(args.config)
    _apply_overrides(cfg, args)
    levels = cfg.convergence_levels
    family = bundled.cavity_family(levels)
    dts = [cfg.convergence_dt0 / 2**i for i in range(levels)]
    report = analysis.convergence_study(
        family, dts, time=cfg.convergence_time,
        m=cfg.convergence_m, n=cfg.convergence_n,
        eps=cfg.eps, mu=cfg.mu,
        solver_kind=cfg.solver_kind, tolerance=cfg.tolerance,
    )
    os.makedirs(cfg.output_dir, exist_ok=True)
    with open(os.path.join(cfg.output_dir, "convergence.txt"), "w") as fh:
        fh.write(report.summary() + "\n")
    with open(os.path.join(cfg.output_dir, "errors.csv"), "w") as fh:
        fh.write("study,h,dt,error\n")
        for h, dt, err in report.joint:
            fh.write(f"joint,{h!r},{dt!r},{err!r}\n")
        for dt, err in report.temporal:
            fh.write(f"temporal,,{dt!r},{err!r}\n")
    print(report.summary())
    return 0


def _apply_overrides(cfg: RunConfig, args) -> None:
    if getattr(args, "output_dir", None):
        cfg.output_dir = args.output_dir
    if getattr(args, "direct_solver", False):
        cfg.solver_kind = "direct"
    if getattr(args, "allow_non_well_centered", False):
        cfg.allow_non_well_centered = True
    if getattr(args, "allow_indefinite", False):
        cfg.allow_indefinite = True


def _add_common(parser) -> None:
    parser.add_argument("--output-dir", help="override output.directory")
    parser.add_argument("--direct-solver", action="store_true",
                        help="use the dense direct solver")
    parser.add_argument("--allow-non-well-centered", action="store_true",
                        help="accept signed dual lengths on non-well-centered meshes")
    parser.add_argument("--allow-indefinite", action="store_true",
                        help="attempt indefinite systems with a symmetric solver")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="decem",
        description="implicit DEC time-domain Maxwell solver on triangulated surfaces",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a simulation from a config file")
    p_run.add_argument("config")
    p_run.add_argument("--quiet", action="store_true", help="suppress the per-cadence log")
    _add_common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_check = sub.add_parser("check-mesh", help="geometry and duality report for an OBJ mesh")
    p_check.add_argument("mesh")
    p_check.set_defaults(func=_cmd_check_mesh)

    p_stab = sub.add_parser("stability", help="growth-factor sweep over faces, dt and k")
    p_stab.add_argument("config")
    _add_common(p_stab)
    p_stab.set_defaults(func=_cmd_stability)

    p_conv = sub.add_parser("convergence", help="cavity-mode convergence orders")
    p_conv.add_argument("config")
    _add_common(p_conv)
    p_conv.set_defaults(func=_cmd_convergence)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, MeshError, sv.SolverError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
