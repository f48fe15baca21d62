"""Command-line entry point: ``rotopulsator <subcommand> --config FILE --out DIR``.

Subcommands and their outputs (all written into ``--out``):

``simulate``      trajectory.csv, simulate.json
``reduce``        reduced.csv, reduce.json
``verify``        verify.json
``solve-masses``  solve.json
``sweep``         sweep.csv
``check-lemmas``  lemmas.json

trajectory.csv columns: ``t``, then for each body ``i`` (from 1)
``qi_1..qi_4, vi_1..vi_4``, then ``L12, L13, L14, L23, L24, L34`` (total
angular-momentum bivector) and ``drift`` (largest ``|q.q - 1|`` seen before
projection since the previous row).

reduced.csv columns: ``t, r, rdot, theta, phi, delta_spread, res1_max,
res2_max``.

sweep.csv columns: ``cell``, ``alpha1..alphan``, ``beta1..betan``,
``status``, ``residual_norm``, ``alpha_regular``, ``beta_regular``.  An
interrupted sweep ends with a ``# truncated`` row.

Every JSON file carries a ``reproducibility`` stanza with the effective
configuration and the package version.  Exit codes: 0 success, 1 other
failure, 2 configuration error, 3 singular configuration, 130 interrupted.
"""

import argparse
import itertools
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import __version__
from . import io as rio
from .analysis import (
    cancellation_signature,
    lemma1_residuals,
    lemma4_residuals,
    polygon_report,
    theorem_verdict,
    ultimate_identity_check,
)
from .config import ConfigError, ExperimentConfig, load, pi_multiple
from .dynamics import IntegrateOptions, SystemState, integrate
from .errors import (
    AmbiguousClustering,
    CriterionViolated,
    DegenerateTriangle,
    FiberSingular,
    RotopulsatorError,
    SingularConfiguration,
    ZeroDenominator,
    ZeroVector,
)
from .manifold import sigma_inner
from .rotopulse import FiberState, ReducedOptions, RotopulsatorShape, criterion_residuals, embed, integrate_reduced
from .solver import SolverOptions, default_grid, solve_masses

EXIT_FAILURE, EXIT_CONFIG, EXIT_SINGULAR = 1, 2, 3


def reproducibility(cfg, command):
    return {"command": command, "version": __version__, "config": cfg.echo()}


def solver_options(cfg):
    a = cfg.analysis
    return SolverOptions(feas_tol=a.feas_tol, mass_floor=a.mass_floor, rank_tol=a.rank_tol, r_grid=a.r_grid)


def build_shape(cfg):
    """Shape from the config plus the solver result when masses are ``solve``."""
    if cfg.shape is None:
        raise ConfigError("[shape] section is required")
    sc = cfg.shape
    n = len(sc.alphas)
    feas = None
    if sc.masses == "solve":
        feas = solve_masses(sc.alphas, sc.betas, solver_options(cfg))
        masses = feas.masses
    elif sc.masses == "equal":
        masses = np.full(n, 1.0 / n)
    else:
        masses = sc.masses
    return RotopulsatorShape(sc.alphas, sc.betas, masses), feas


def fiber_from(cfg):
    f = cfg.fiber
    return FiberState(f.r, f.rdot, f.theta, f.phi, f.c_theta, f.c_phi)


def integrate_options(cfg):
    i = cfg.integrator
    return IntegrateOptions(rtol=i.rtol, atol=i.atol, dt_min=i.dt_min, adaptive=i.adaptive)


def reduced_options(cfg):
    i, a = cfg.integrator, cfg.analysis
    return ReducedOptions(
        rtol=min(i.rtol, 1e-12), atol=min(i.atol, 1e-14), dt_min=i.dt_min, criterion_tol=a.criterion_tol
    )


def initial_state(cfg):
    if cfg.state is not None:
        st = cfg.state
        if len(st.masses) < 2:
            raise ConfigError("[state] masses: need at least two bodies")
        if any(m <= 0 for m in st.masses):
            raise ConfigError("[state] masses: masses must be positive")
        state = SystemState(st.masses, st.q, st.v, sigma=1)
        if np.max(np.abs(sigma_inner(state.q, state.q) - 1.0)) > 1e-9:
            raise ConfigError("[state]: positions must lie on the unit sphere")
        if np.max(np.abs(sigma_inner(state.q, state.v))) > 1e-9:
            raise ConfigError("[state]: velocities must be tangent (q . v = 0)")
        return state
    shape, _ = build_shape(cfg)
    return embed(shape, fiber_from(cfg))


def run_simulate(cfg):
    state = initial_state(cfg)
    traj = integrate(state, cfg.integrator.dt, cfg.integrator.t_end, integrate_options(cfg))
    L = traj.angular_momentum
    diag = {
        "samples": len(traj),
        "max_drift": traj.max_drift,
        "angular_momentum_initial": L[0],
        "angular_momentum_max_change": float(np.max(np.abs(L - L[0]))),
        "reproducibility": reproducibility(cfg, "simulate"),
    }
    return traj, diag


def run_reduce(cfg):
    shape, feas = build_shape(cfg)
    red = integrate_reduced(shape, fiber_from(cfg), cfg.integrator.dt, cfg.integrator.t_end, reduced_options(cfg))
    diag = {
        "samples": len(red),
        "masses": shape.masses,
        "r_min": float(red.r.min()),
        "r_max": float(red.r.max()),
        "max_delta_spread": red.max_spread,
        "c_theta": red.c_theta,
        "c_phi": red.c_phi,
        "reproducibility": reproducibility(cfg, "reduce"),
    }
    if feas is not None:
        diag["solver"] = feas.to_dict()
    return red, diag


def lemma_checks(shape, cfg, reduced=None):
    """Lemma-level residuals; each entry records its own failure instead of aborting."""
    out = {}
    if reduced is not None:
        try:
            res_t, res_p = lemma1_residuals(reduced)
            out["lemma1"] = {"theta_residual": res_t, "phi_residual": res_p}
        except RotopulsatorError as exc:
            out["lemma1"] = {"skipped": str(exc)}
    else:
        out["lemma1"] = {"skipped": "no reduced trajectory"}

    worst, worst_triple, used, degenerate = 0.0, None, None, []
    for triple in itertools.permutations(range(shape.n), 3):
        try:
            res = lemma4_residuals(shape, triple, cfg.analysis.lemma_r_grid)
        except DegenerateTriangle as exc:
            degenerate.append(str(exc))
            continue
        if res.max_residual >= worst:
            worst, worst_triple, used = res.max_residual, triple, res.triple
    out["lemma4"] = {
        "max_residual": worst,
        "worst_triple": worst_triple,
        "ordering_used": used,
        "r_grid": cfg.analysis.lemma_r_grid,
        "degenerate": degenerate,
    }

    r6 = r7 = 0.0
    zero_pairs = set()
    for triple in itertools.permutations(range(shape.n), 3):
        try:
            a, b = ultimate_identity_check(shape, triple)
        except ZeroDenominator as exc:
            zero_pairs.add(tuple(sorted(exc.pair)))
            continue
        r6, r7 = max(r6, a), max(r7, b)
    out["ultimate_identity"] = {"max_res6": r6, "max_res7": r7, "zero_denominator_pairs": sorted(zero_pairs)}

    try:
        out["cancellation"] = cancellation_signature(shape, rank_tol=cfg.analysis.rank_tol).summary()
    except SingularConfiguration as exc:
        out["cancellation"] = {"skipped": str(exc)}
    return out


def _try_reduce(shape, cfg):
    try:
        red = integrate_reduced(shape, fiber_from(cfg), cfg.integrator.dt, cfg.integrator.t_end, reduced_options(cfg))
        return red, None
    except (CriterionViolated, FiberSingular, SingularConfiguration) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def run_verify(cfg, include_criterion=True):
    shape, feas = build_shape(cfg)
    if feas is None:
        feas = solve_masses(shape.alphas, shape.betas, solver_options(cfg))
        solver_role = "cross-check"
    else:
        solver_role = "masses"
    grid = cfg.analysis.r_grid or default_grid()
    red, why = _try_reduce(shape, cfg)
    verdict = theorem_verdict(shape, red, cfg.analysis.polygon_tol)
    doc = {"masses": shape.masses, "solver": {**feas.to_dict(), "role": solver_role}}
    if include_criterion:
        doc["criterion"] = [criterion_residuals(shape, r).to_dict() for r in grid]
    doc["reduced"] = (
        {"r_min": float(red.r.min()), "r_max": float(red.r.max()), "max_delta_spread": red.max_spread}
        if red is not None
        else {"skipped": why}
    )
    doc.update(lemma_checks(shape, cfg, red))
    verdict_doc = verdict.to_dict()
    verdict_doc["solver_status"] = feas.status
    verdict_doc["constant_size_class"] = verdict.vacuous
    doc["verdict"] = verdict_doc
    doc["reproducibility"] = reproducibility(cfg, "verify")
    return doc


def run_check_lemmas(cfg):
    shape, _ = build_shape(cfg)
    red, why = _try_reduce(shape, cfg)
    doc = lemma_checks(shape, cfg, red)
    if red is None:
        doc["lemma1"] = {"skipped": why}
    doc["reproducibility"] = reproducibility(cfg, "check-lemmas")
    return doc


def run_solve(cfg):
    if cfg.shape is None:
        raise ConfigError("[shape] section is required")
    feas = solve_masses(cfg.shape.alphas, cfg.shape.betas, solver_options(cfg))
    doc = feas.to_dict()
    doc["reproducibility"] = reproducibility(cfg, "solve-masses")
    return doc


# -- sweep -------------------------------------------------------------------


def _axis_values(axis):
    """Cell values ``start + (stop - start) * k / cells``, exact for pi multiples."""
    (k0, v0), (k1, v1) = axis.start, axis.stop
    if k0 == k1 == "pi":
        return [pi_multiple(v0 + (v1 - v0) * Fraction(k, axis.cells)) for k in range(axis.cells)]
    a = pi_multiple(v0) if k0 == "pi" else v0
    b = pi_multiple(v1) if k1 == "pi" else v1
    return [a + (b - a) * k / axis.cells for k in range(axis.cells)]


def sweep_cells(cfg):
    if cfg.shape is None:
        raise ConfigError("[shape] section is required")
    n = len(cfg.shape.alphas)
    slots = []
    for axis in cfg.sweep:
        kind, idx = ("alpha", axis.slot[5:]) if axis.slot.startswith("alpha") else ("beta", axis.slot[4:])
        idx = int(idx) - 1
        if idx >= n:
            raise ConfigError(f"[sweep] {axis.slot}: shape has only {n} bodies")
        slots.append((kind, idx))
    values = [_axis_values(a) for a in cfg.sweep]
    cells = []
    for combo in itertools.product(*values) if values else []:
        alphas = list(cfg.shape.alphas)
        betas = list(cfg.shape.betas)
        for (kind, idx), v in zip(slots, combo):
            (alphas if kind == "alpha" else betas)[idx] = v
        cells.append((alphas, betas))
    return cells


def evaluate_cell(alphas, betas, opts, polygon_tol):
    """One sweep row: solver status plus regularity of both projections."""
    try:
        RotopulsatorShape(alphas, betas, np.ones(len(alphas)))
        feas = solve_masses(alphas, betas, opts)
        status, resid = feas.status, feas.residual_norm
    except SingularConfiguration:
        status, resid = "Singular", ""
    flags = []
    for angles in (alphas, betas):
        try:
            flags.append(int(polygon_report(angles, polygon_tol).regular))
        except AmbiguousClustering:
            flags.append("ambiguous")
    return [status, resid] + flags


def sweep_header(n):
    return ["cell"] + [f"alpha{i}" for i in range(1, n + 1)] + [f"beta{i}" for i in range(1, n + 1)] + [
        "status",
        "residual_norm",
        "alpha_regular",
        "beta_regular",
    ]


def run_sweep(cfg, path, threads=1):
    cells = sweep_cells(cfg)
    n = len(cfg.shape.alphas)
    opts = solver_options(cfg)
    tol = cfg.analysis.polygon_tol

    def work(cell):
        return evaluate_cell(cell[0], cell[1], opts, tol)

    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rio.format_csv(sweep_header(n), []))
        done = 0
        try:
            with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
                for k, (cell, result) in enumerate(zip(cells, pool.map(work, cells))):
                    fh.write(rio.format_csv(None, [[k] + cell[0] + cell[1] + result]))
                    fh.flush()
                    done += 1
        except KeyboardInterrupt:
            fh.write(f"# truncated,{done},{len(cells)}\n")
            raise
    return len(cells)


# -- argument handling ---------------------------------------------------------

TOL_FLAGS = {
    "rtol": ("integrator", "rtol"),
    "atol": ("integrator", "atol"),
    "dt_min": ("integrator", "dt_min"),
    "polygon": ("analysis", "polygon_tol"),
    "criterion": ("analysis", "criterion_tol"),
    "feas": ("analysis", "feas_tol"),
    "mass_floor": ("analysis", "mass_floor"),
    "rank": ("analysis", "rank_tol"),
}


def make_parser():
    parser = argparse.ArgumentParser(prog="rotopulsator", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("simulate", "reduce", "verify", "solve-masses", "sweep", "check-lemmas"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="INI or JSON experiment config")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=1, help="sweep worker count")
        p.add_argument("--r-grid", help='comma list of radii, e.g. "0.2,0.5,0.8"')
        for flag in TOL_FLAGS:
            p.add_argument(f"--tol-{flag.replace('_', '-')}", type=float, dest=f"tol_{flag}")
    return parser


def apply_overrides(cfg, args):
    for flag, (section, key) in TOL_FLAGS.items():
        value = getattr(args, f"tol_{flag}")
        if value is not None:
            if value <= 0:
                raise ConfigError(f"--tol-{flag}: tolerance must be positive")
            setattr(getattr(cfg, section), key, value)
    if args.r_grid:
        try:
            grid = [float(x) for x in args.r_grid.split(",")]
        except ValueError:
            raise ConfigError(f"--r-grid: cannot parse {args.r_grid!r}") from None
        if any(not 0 < r < 1 for r in grid):
            raise ConfigError("--r-grid: radii must lie in (0, 1)")
        cfg.analysis.r_grid = grid
    return cfg


def dispatch(args):
    cfg = apply_overrides(load(args.config), args)
    os.makedirs(args.out, exist_ok=True)
    out = lambda name: os.path.join(args.out, name)  # noqa: E731
    if args.command == "simulate":
        traj, diag = run_simulate(cfg)
        rio.write_csv(out("trajectory.csv"), rio.trajectory_header(traj.q.shape[1]), rio.trajectory_rows(traj))
        rio.write_json(out("simulate.json"), diag)
        print(f"{len(traj)} samples, max drift {diag['max_drift']:.3e}")
    elif args.command == "reduce":
        red, diag = run_reduce(cfg)
        rio.write_csv(out("reduced.csv"), rio.REDUCED_HEADER, rio.reduced_rows(red))
        rio.write_json(out("reduce.json"), diag)
        print(f"{len(red)} samples, r in [{diag['r_min']:.6g}, {diag['r_max']:.6g}]")
    elif args.command == "verify":
        doc = run_verify(cfg)
        rio.write_json(out("verify.json"), doc)
        v = doc["verdict"]
        print(f"pass={v['pass']} vacuous={v['vacuous']} solver={v['solver_status']}")
    elif args.command == "solve-masses":
        doc = run_solve(cfg)
        rio.write_json(out("solve.json"), doc)
        print(doc["status"])
    elif args.command == "sweep":
        count = run_sweep(cfg, out("sweep.csv"), args.threads)
        print(f"{count} cells")
    elif args.command == "check-lemmas":
        rio.write_json(out("lemmas.json"), run_check_lemmas(cfg))
    return 0


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        return dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularConfiguration, FiberSingular, ZeroVector) as exc:
        msg = str(exc)
        if not msg.startswith("singular configuration"):
            msg = f"singular configuration: {msg}"
        print(msg, file=sys.stderr)
        return EXIT_SINGULAR
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return 130
    except (RotopulsatorError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
