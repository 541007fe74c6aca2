"""Command-line front end.

Commands: ``flow`` (dimension flow curves), ``simulate`` (walker ensembles
with MSD summaries), ``pdf`` (density slices), ``kernel`` (return-probability
curves), ``validate`` (oracle cross-checks of the closed forms).

Exit codes: 0 ok, 1 validation failure, 2 config error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernel as kernel_mod
from . import spectral, walker
from .config import COMMANDS, RunConfig, build_spec, merge_overrides, parse_config
from .csvio import write_csv, write_line_chart
from .dispersion import (
    DiffusionSpec,
    binomial_time_integral,
    dispersion,
    dispersion_quadrature,
    sample_dispersion,
    time_weight,
)
from .errors import ConfigError, MultiflowError
from .measure import FractionalCharges
from .spectral import LegacyAnsatzWarning

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _sigma_grid(cfg: RunConfig) -> np.ndarray:
    if cfg.log:
        return np.geomspace(cfg.sigma_min, cfg.sigma_max, cfg.points)
    return np.linspace(cfg.sigma_min, cfg.sigma_max, cfg.points)


def _d_hausdorff(spec: DiffusionSpec) -> float:
    charges = spec.charges or FractionalCharges.isotropic(1.0, spec.dim)
    return float(sum(charges.alphas))


def run_flow(cfg: RunConfig) -> None:
    """Write (sigma, ell2, ds, d_w, model) rows with asymptote metadata."""
    spec = build_spec(cfg)
    grid = _sigma_grid(cfg)
    d_h = _d_hausdorff(spec)
    meta = {"model": spec.model, "dim": spec.dim, "fuzzy": spec.fuzzy}

    if spec.model in ("weighted", "ordinary") and spec.multiscale is not None:
        flow = spectral.weighted_flow_curve(spec, grid)
    elif spec.model == "q":
        from .dispersion import q_time_profile

        flow = spectral.q_flow_curve(
            q_time_profile(spec), spec.dim, grid, lstar=spec.scales.lstar
        )
    elif spec.model == "legacy":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LegacyAnsatzWarning)
            ds0 = spectral.legacy_ds(spec.charges or FractionalCharges.isotropic(1.0, spec.dim))
        flow = spectral.SpectralFlow(
            sigmas=grid, ds=np.full(grid.size, ds0),
            uv_asymptote=ds0, ir_asymptote=ds0, model="legacy",
            uv_converged=True, ir_converged=True,
        )
        meta["caveat"] = "legacy ansatz: regularized, normalization-dependent trace"
    else:  # fixed-dimensionality weighted/ordinary: constant spectral dimension
        ds0 = spectral.fixed_point_ds(spec.model, spec.dim, beta=spec.scales.beta, nu=spec.scales.nu)
        flow = spectral.SpectralFlow(
            sigmas=grid, ds=np.full(grid.size, ds0),
            uv_asymptote=ds0, ir_asymptote=ds0, model=spec.model,
            uv_converged=True, ir_converged=True,
        )

    meta.update(
        uv_asymptote=flow.uv_asymptote, ir_asymptote=flow.ir_asymptote,
        uv_converged=flow.uv_converged, ir_converged=flow.ir_converged,
    )
    ell2 = np.array([dispersion(spec, s) for s in grid])
    rows = [
        (s, e2, d, spectral.walk_dimension(spec.model, spec.dim, d_h, d), spec.model)
        for s, e2, d in zip(grid, ell2, flow.ds)
    ]
    write_csv(cfg.out, "flow", ("sigma", "ell2", "ds", "d_w", "model"), rows, meta)
    if cfg.svg:
        write_line_chart(cfg.svg, list(grid), [("ds", list(flow.ds))], logx=cfg.log)


def run_simulate(cfg: RunConfig) -> None:
    """Run a walker ensemble; emit trajectory and MSD summary files."""
    spec = build_spec(cfg)
    grid = (
        walker.geometric_grid(cfg.sigma_min, cfg.sigma_max, cfg.steps)
        if cfg.log
        else walker.uniform_grid(cfg.sigma_min, cfg.sigma_max, cfg.steps)
    )
    ensemble = walker.simulate(cfg.process, cfg.paths, grid, spec, cfg.seed)
    sigmas, mean_sq, stderr = walker.msd(ensemble)
    window = (cfg.sigma_max / 100.0, cfg.sigma_max)  # last two decades
    heavy_tailed = cfg.process == "fsbm-q"
    if heavy_tailed:
        fit = walker.fit_scaling_exponent_batched(ensemble, window)
    else:
        fit = walker.fit_scaling_exponent(sigmas, mean_sq, window)

    meta = {
        "process": cfg.process, "dim": spec.dim, "paths": cfg.paths,
        "steps": cfg.steps, "seed": cfg.seed,
    }
    footer = {
        "fit_exponent": fit.exponent, "fit_stderr": fit.stderr,
        "fit_window_lo": fit.window[0], "fit_window_hi": fit.window[1],
        "heavy_tailed": heavy_tailed,
    }
    write_csv(
        cfg.out, "msd", ("sigma", "msd", "stderr"),
        zip(sigmas, mean_sq, stderr), meta, footer,
    )

    if cfg.traj_paths > 0:
        base = cfg.out[:-4] if cfg.out.endswith(".csv") else cfg.out
        traj_path = f"{base}.traj.csv"
        columns = ["path_id", "step", "sigma"] + [f"x_{i + 1}" for i in range(spec.dim)]
        n_show = min(cfg.traj_paths, ensemble.n_paths)
        rows = (
            [p, s, float(grid[s]), *map(float, ensemble.positions[p, s])]
            for p in range(n_show)
            for s in range(0, ensemble.n_steps, cfg.subsample)
        )
        write_csv(traj_path, "trajectory", columns, rows, {"process": cfg.process, "subsample": cfg.subsample})
        if cfg.svg:
            steps = list(range(0, ensemble.n_steps, cfg.subsample))
            series = [
                (f"path {p}", [float(ensemble.positions[p, s, 0]) for s in steps])
                for p in range(min(3, n_show))
            ]
            write_line_chart(cfg.svg, [float(grid[s]) for s in steps], series)


def run_pdf(cfg: RunConfig) -> None:
    """Sample the model density along the first axis through x0.

    Transverse coordinates sit at 1.0 (in units of lstar) so the slice stays
    clear of the measure singularities on the coordinate hyperplanes.
    """
    spec = build_spec(cfg)
    xs = np.linspace(-cfg.x_max, cfg.x_max, cfg.x_points)
    transverse = spec.scales.lstar
    x0 = np.full(spec.dim, transverse)
    x0[0] = cfg.x0
    rows = []
    for x1 in xs:
        if x1 == 0.0 and spec.model in ("weighted", "legacy"):
            continue  # measure-singular point of the weighted density
        point = np.full(spec.dim, transverse)
        point[0] = x1
        evaluation = kernel_mod.pdf_evaluate(spec, point, x0, cfg.sigma)
        rows.append((float(x1), evaluation.density, spec.model))
    write_csv(
        cfg.out, "pdf", ("x", "density", "model"), rows,
        {"model": spec.model, "dim": spec.dim, "sigma": cfg.sigma,
         "x0": cfg.x0, "transverse": transverse},
    )
    if cfg.svg:
        write_line_chart(cfg.svg, [r[0] for r in rows], [("density", [r[1] for r in rows])])


def run_kernel(cfg: RunConfig) -> None:
    """Sample the return probability Z(sigma) and write (sigma, Z, convention)."""
    spec = build_spec(cfg)
    grid = _sigma_grid(cfg)
    curve = kernel_mod.heat_kernel_curve(spec, grid, box_halfwidth=cfg.box)
    write_csv(
        cfg.out, "kernel", ("sigma", "Z", "convention"), curve.rows(),
        {"model": spec.model, "dim": spec.dim, "convention": curve.convention},
    )
    if cfg.svg:
        write_line_chart(cfg.svg, list(curve.sigmas), [("Z", list(curve.Z))], logx=cfg.log, logy=True)


@dataclass
class _Check:
    name: str
    measured: float
    expected: float
    tol: float

    @property
    def passed(self) -> bool:
        return abs(self.measured - self.expected) <= self.tol


def _validate_checks(cfg: RunConfig, quick: bool, kappa_error: float) -> list[_Check]:
    checks: list[_Check] = []
    kappa_fudge = 1.0 + kappa_error / 100.0

    # Closed-form dispersion against adaptive quadrature of its defining integral.
    beta_stars = (0.5, 1.5) if quick else (0.25, 0.5, 0.75, 1.25, 1.5, 1.75)
    n_sigma = 10 if quick else 50
    for beta_star in beta_stars:
        cfg_ms = merge_overrides(cfg, {"command": "flow", "model": "weighted", "beta_star": beta_star})
        spec = build_spec(cfg_ms)
        weight = time_weight(spec)
        worst = 0.0
        for s in np.geomspace(1e-3 * cfg.lstar, 1e3 * cfg.lstar, n_sigma):
            closed = kappa_fudge * dispersion(spec, s)
            quad = dispersion_quadrature(
                weight, spec.scales.kappa, 1.0, s, 0.0,
                min_charge=spec.multiscale.min_charge,
            )
            worst = max(worst, abs(closed - quad) / quad)
        checks.append(_Check(f"dispersion-oracle-beta-star-{beta_star}", worst, 0.0, 1e-7))

    # Removable-pole continuity at beta* = 1.5 +- 1e-6.
    s_probe = 37.0 * cfg.lstar
    center = binomial_time_integral(1.5, cfg.lstar, s_probe)
    for eps in (-1e-6, 1e-6):
        near = binomial_time_integral(1.5 + eps, cfg.lstar, s_probe)
        drift = abs(near - center) / center
        checks.append(_Check(f"removable-pole-continuity-{eps:+.0e}", drift, 0.0, 1e-4))

    # Numeric spectral dimension against the closed flow.
    cfg_flow = merge_overrides(cfg, {"command": "flow", "model": "weighted", "beta_star": 0.5})
    spec = build_spec(cfg_flow)
    grid = np.geomspace(1e-2 * cfg.lstar, 1e2 * cfg.lstar, 40 if quick else 200)
    curve = sample_dispersion(spec, grid, method="closed-form")
    worst = 0.0
    for s in grid[2:-2:5]:
        numeric = spectral.spectral_from_dispersion(curve, spec.dim, s)
        closed = spectral.spectral_weighted_flow(spec, s)
        worst = max(worst, abs(numeric - closed))
    checks.append(_Check("numeric-vs-closed-flow", worst, 0.0, 1e-3))

    # Fixed points are exact identities.
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        beta = rng.uniform(0.1, 1.4)
        nu = rng.uniform(0.5, 1.5)
        expected = cfg.dim * (1.0 + nu - beta)
        got = spectral.fixed_point_ds("weighted", cfg.dim, beta=beta, nu=nu)
        worst = max(worst, abs(got - expected))
    checks.append(_Check("fixed-point-identity", worst, 0.0, 0.0))

    if not quick:
        # Kummer normalization against direct quadrature (1-d, alpha = 0.5).
        from scipy import integrate as _integrate

        cfg_k = merge_overrides(
            cfg, {"command": "kernel", "model": "ordinary", "dim": 1, "alpha": 0.5, "beta": 1.0}
        )
        spec_k = build_spec(cfg_k)
        worst = 0.0
        for x0 in (0.5, 2.0):
            for s in (0.2, 2.0):
                c_closed = kernel_mod.ordinary_normalization([x0], s, spec_k)
                ell2 = dispersion(spec_k, s)

                def integrand(x, _x0=x0, _e2=ell2):
                    return abs(x) ** (-0.5) / math.gamma(0.5) * math.exp(
                        -((x - _x0) ** 2) / (4.0 * _e2)
                    )

                lo = min(0.0, x0) - 14.0 * math.sqrt(ell2)
                hi = max(0.0, x0) + 14.0 * math.sqrt(ell2)
                val = 0.0
                for a, b in ((lo, 0.0), (0.0, hi)):
                    part, _ = _integrate.quad(
                        integrand, a, b, epsabs=1e-12, epsrel=1e-11, limit=300,
                        points=[p for p in (x0,) if a < p < b],
                    )
                    val += part
                worst = max(worst, abs(c_closed * val - 1.0))
        checks.append(_Check("kummer-normalization-quadrature", worst, 0.0, 1e-6))

        # Walker scaling: Brownian exponent.
        grid_w = walker.geometric_grid(1e-3, 10.0, 256)
        ens = walker.simulate_bm(2000, grid_w, cfg.kappa, 1, cfg.seed)
        sig, mean_sq, _ = walker.msd(ens)
        fit = walker.fit_scaling_exponent(sig, mean_sq, (0.1, 10.0))
        checks.append(_Check("bm-msd-exponent", fit.exponent, 1.0, 0.05))

    return checks


def run_validate(cfg: RunConfig, quick: bool = False, kappa_error: float = 0.0) -> int:
    """Oracle cross-checks; prints one line per check, exit 0 iff all pass."""
    checks = _validate_checks(cfg, quick, kappa_error)
    status = EXIT_OK
    for check in checks:
        verdict = "PASS" if check.passed else "FAIL"
        print(
            f"check {check.name}: measured={check.measured:.6e} "
            f"expected={check.expected:.6e} tol={check.tol:.1e} {verdict}"
        )
        if not check.passed:
            status = EXIT_VALIDATION
    print(f"validate: {'all checks passed' if status == EXIT_OK else 'FAILURES detected'}")
    return status


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multiflow",
        description="Diffusion, dimensional flow, and random walkers on multiscale spacetimes.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="|".join(COMMANDS))
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="config file to load before applying flags")
        p.add_argument("--model", help="flow/pdf/kernel: weighted|ordinary|q|legacy; simulate: process tag")
        p.add_argument("--dim", type=int)
        p.add_argument("--beta", type=float)
        p.add_argument("--beta-star", type=float, dest="beta_star")
        p.add_argument("--nu", type=float)
        p.add_argument("--alpha", type=float)
        p.add_argument("--lstar", type=float)
        p.add_argument("--kappa", type=float)
        p.add_argument("--fuzzy", action="store_const", const=True)
        p.add_argument("--multiscale-space", action="store_const", const=True, dest="multiscale_space")
        p.add_argument("--sigma-min", type=float, dest="sigma_min")
        p.add_argument("--sigma-max", type=float, dest="sigma_max")
        p.add_argument("--sigma-points", type=int, dest="points")
        p.add_argument("--sigma-log", dest="log", choices=("true", "false"))
        p.add_argument("--paths", type=int)
        p.add_argument("--steps", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--svg")
        if name == "simulate":
            p.add_argument("--subsample", type=int)
            p.add_argument("--traj-paths", type=int, dest="traj_paths")
        if name == "pdf":
            p.add_argument("--sigma", type=float)
            p.add_argument("--x-max", type=float, dest="x_max")
            p.add_argument("--x-points", type=int, dest="x_points")
            p.add_argument("--x0", type=float)
        if name == "kernel":
            p.add_argument("--box", type=float)
        if name == "validate":
            p.add_argument("--quick", action="store_true")
            p.add_argument(
                "--inject-kappa-error", type=float, default=0.0, dest="inject_kappa_error",
                help="negative control: perturb kappa by this percent so checks must fail",
            )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.config:
            with open(args.config) as fh:
                cfg = parse_config(fh.read())
        else:
            cfg = RunConfig()
        overrides = {
            key: value
            for key, value in vars(args).items()
            if key not in ("config", "quick", "inject_kappa_error") and value is not None
        }
        if "model" in overrides and args.command == "simulate":
            overrides["process"] = overrides.pop("model")
        if "log" in overrides:
            overrides["log"] = overrides["log"] == "true"
        overrides["command"] = args.command
        cfg = merge_overrides(cfg, overrides)

        if args.command == "flow":
            run_flow(cfg)
        elif args.command == "simulate":
            run_simulate(cfg)
        elif args.command == "pdf":
            run_pdf(cfg)
        elif args.command == "kernel":
            run_kernel(cfg)
        else:
            return run_validate(cfg, quick=args.quick, kappa_error=args.inject_kappa_error)
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MultiflowError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
