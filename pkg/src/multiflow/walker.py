"""Monte Carlo walkers: Brownian, scaled, and multiscale-spacetime processes.

Five processes are simulated, all reducible to Gaussian increments:

* ``bm``      -- Brownian motion, variance 2 kappa dsigma per step/direction;
* ``sbm``     -- scaled Brownian motion, the exact time change sigma -> sigma^nu;
* ``fsbm-v``  -- Brownian motion divided pointwise by sqrt(v(sigma));
* ``fssbm``   -- scaled Brownian motion divided by sqrt(v(sigma));
* ``fsbm-q``  -- scaled Brownian motion (nu = beta) mapped through the
  sign-preserving inverse geometric profile x = sgn(Q)[Gamma(alpha+1)|Q|]^(1/alpha).

Reproducibility contract: every path draws from its own counter-based Philox
stream keyed by (master seed, path index), consumed in (step, direction)
order, so ensembles are bit-identical for a fixed (seed, grid, spec)
regardless of how many worker threads are used.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

from .dispersion import DiffusionSpec, time_weight
from .errors import DomainError, GridError, SingularPointError

__all__ = [
    "WalkerEnsemble",
    "MsdFit",
    "IncrementReport",
    "PROCESSES",
    "geometric_grid",
    "uniform_grid",
    "simulate_bm",
    "simulate_sbm",
    "simulate_fsbm_v",
    "simulate_fsbm_q",
    "simulate",
    "msd",
    "fit_scaling_exponent",
    "fit_scaling_exponent_batched",
    "increment_diagnostics",
    "worker_count",
]

PROCESSES = ("bm", "sbm", "fsbm-v", "fssbm", "fsbm-q")

_THREADS_ENV = "MULTIFLOW_THREADS"
_MEDIAN_BATCHES = 16


def worker_count() -> int:
    """Worker threads to use: min(cpu count, MULTIFLOW_THREADS if set)."""
    cpus = os.cpu_count() or 1
    raw = os.environ.get(_THREADS_ENV)
    if raw is None:
        return max(1, min(cpus, 8))
    try:
        cap = int(raw)
    except ValueError as exc:
        raise DomainError(f"{_THREADS_ENV} must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise DomainError(f"{_THREADS_ENV} must be >= 1, got {cap}")
    return min(cap, cpus) if cpus > 0 else cap


@dataclass(frozen=True)
class WalkerEnsemble:
    """Sampled trajectories of one process on a common diffusion-time grid."""

    process: str
    grid: np.ndarray
    positions: np.ndarray  # (n_paths, n_steps, dim)
    seed: int
    kappa: float = 1.0
    params: dict = field(default_factory=dict)
    spec: DiffusionSpec | None = None

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=float)
        pos = np.asarray(self.positions, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "positions", pos)
        if self.process not in PROCESSES:
            raise DomainError(f"unknown process {self.process!r}")
        if grid.ndim != 1 or grid.size < 2 or grid[0] <= 0.0 or np.any(np.diff(grid) <= 0.0):
            raise GridError("grid must be 1-d, strictly increasing, and start after 0")
        if pos.ndim != 3 or pos.shape[1] != grid.size:
            raise GridError(f"positions shape {pos.shape} does not match grid of {grid.size} steps")
        if not np.all(np.isfinite(pos)):
            raise DomainError("ensemble contains non-finite positions")

    @property
    def n_paths(self) -> int:
        return self.positions.shape[0]

    @property
    def n_steps(self) -> int:
        return self.positions.shape[1]

    @property
    def dim(self) -> int:
        return self.positions.shape[2]


@dataclass(frozen=True)
class MsdFit:
    """Power-law fit of a mean-squared-displacement curve."""

    exponent: float
    prefactor: float
    stderr: float
    window: tuple[float, float]

    def __post_init__(self) -> None:
        if self.stderr < 0.0:
            raise DomainError("stderr must be nonnegative")


@dataclass(frozen=True)
class IncrementReport:
    """Stationarity and correlation diagnostics of path increments.

    ``stationarity_tstat`` is the t statistic of the regression slope of the
    increment variance against the window start time (0 for stationary
    increments).  ``correlation_tstat`` is the normalized sample correlation
    of two disjoint, well-separated increments (0 for uncorrelated ones).
    """

    stationarity_slope: float
    stationarity_tstat: float
    correlation: float
    correlation_tstat: float
    lag: int

    @property
    def stationary(self) -> bool:
        return abs(self.stationarity_tstat) < 3.0

    @property
    def uncorrelated(self) -> bool:
        return abs(self.correlation_tstat) < 3.0


def geometric_grid(sigma_min: float, sigma_max: float, n_steps: int) -> np.ndarray:
    """Log-spaced grid, the default: exact variance differences need no small
    steps and the decades of a scaling law get equal weight."""
    if not 0.0 < sigma_min < sigma_max:
        raise GridError(f"need 0 < sigma_min < sigma_max, got {sigma_min}, {sigma_max}")
    if n_steps < 2:
        raise GridError(f"need at least 2 steps, got {n_steps}")
    return np.geomspace(sigma_min, sigma_max, n_steps)


def uniform_grid(sigma_min: float, sigma_max: float, n_steps: int) -> np.ndarray:
    """Uniformly spaced grid starting after zero (for increment diagnostics)."""
    if not 0.0 < sigma_min < sigma_max:
        raise GridError(f"need 0 < sigma_min < sigma_max, got {sigma_min}, {sigma_max}")
    if n_steps < 2:
        raise GridError(f"need at least 2 steps, got {n_steps}")
    return np.linspace(sigma_min, sigma_max, n_steps)


def _path_generator(key: np.ndarray, path: int) -> Generator:
    # Each path owns a 2^128-wide counter block: bit-identical streams no
    # matter how paths are distributed over workers.
    counter = np.array([0, 0, path, 0], dtype=np.uint64)
    return Generator(Philox(counter=counter, key=key))


def _accumulate_bm(
    grid: np.ndarray, kappa: float, nu: float, dim: int, seed: int, n_paths: int
) -> np.ndarray:
    """Brownian paths in the (possibly rescaled) time sigma^nu.

    Increment n has variance 2*kappa*(sigma_{n}^nu - sigma_{n-1}^nu) per
    direction, with sigma_{-1} = 0, which is the exact simulation of the time
    change (no Euler bias).
    """
    taus = grid.astype(float) ** nu
    dtau = np.diff(np.concatenate(([0.0], taus)))
    if np.any(dtau <= 0.0):
        raise GridError("time-change increments must be positive")
    scale = np.sqrt(2.0 * kappa * dtau)[:, None]  # (n_steps, 1)
    key = SeedSequence(seed).generate_state(2, np.uint64)
    out = np.empty((n_paths, grid.size, dim), dtype=float)

    def fill(lo: int, hi: int) -> None:
        for p in range(lo, hi):
            normals = _path_generator(key, p).standard_normal((grid.size, dim))
            np.cumsum(normals * scale, axis=0, out=out[p])

    workers = worker_count()
    if workers == 1 or n_paths < 2 * workers:
        fill(0, n_paths)
    else:
        chunk = (n_paths + workers - 1) // workers
        bounds = [(i, min(i + chunk, n_paths)) for i in range(0, n_paths, chunk)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda b: fill(*b), bounds))
    return out


def simulate_bm(
    n_paths: int, grid: Sequence[float] | np.ndarray, kappa: float, dim: int, seed: int
) -> WalkerEnsemble:
    """Brownian motion: independent Gaussian increments, <X^2> = 2 D kappa sigma."""
    grid = np.asarray(grid, dtype=float)
    pos = _accumulate_bm(grid, kappa, 1.0, dim, seed, n_paths)
    return WalkerEnsemble(process="bm", grid=grid, positions=pos, seed=seed, kappa=kappa)


def simulate_sbm(
    n_paths: int,
    grid: Sequence[float] | np.ndarray,
    kappa: float,
    nu: float,
    dim: int,
    seed: int,
) -> WalkerEnsemble:
    """Scaled Brownian motion X(sigma) = BM(sigma^nu); time ordering needs nu > 0."""
    if nu <= 0.0:
        raise DomainError(f"nu must be positive, got {nu}")
    grid = np.asarray(grid, dtype=float)
    pos = _accumulate_bm(grid, kappa, nu, dim, seed, n_paths)
    return WalkerEnsemble(
        process="sbm", grid=grid, positions=pos, seed=seed, kappa=kappa, params={"nu": nu}
    )


def simulate_fsbm_v(
    n_paths: int, grid: Sequence[float] | np.ndarray, spec: DiffusionSpec, seed: int
) -> WalkerEnsemble:
    """Multiscale-spacetime Brownian motion: BM (or SBM for nu != 1) divided
    pointwise by sqrt(v(sigma)).

    The diffusion-time weight comes from the spec: fractional power law
    sigma^(beta-1)/Gamma(beta) or binomial multiscale profile.  The grid must
    stay clear of the weight's singular point at zero (it does, by
    construction: grids start after 0).
    """
    grid = np.asarray(grid, dtype=float)
    sc = spec.scales
    weight = time_weight(spec)
    v = np.array([weight(s) for s in grid])
    if np.any(v <= 0.0) or not np.all(np.isfinite(v)):
        raise SingularPointError("diffusion-time weight must be finite and positive on the grid")
    pos = _accumulate_bm(grid, sc.kappa, sc.nu, spec.dim, seed, n_paths)
    pos /= np.sqrt(v)[None, :, None]
    process = "fsbm-v" if abs(sc.nu - 1.0) <= 1e-12 else "fssbm"
    return WalkerEnsemble(
        process=process,
        grid=grid,
        positions=pos,
        seed=seed,
        kappa=sc.kappa,
        params={"beta": sc.beta, "nu": sc.nu, "multiscale": spec.multiscale is not None},
        spec=spec,
    )


def simulate_fsbm_q(
    n_paths: int,
    grid: Sequence[float] | np.ndarray,
    alpha: float,
    beta: float,
    dim: int,
    seed: int,
    kappa: float = 1.0,
) -> WalkerEnsemble:
    """q-model walker: SBM with nu = beta pushed through the inverse profile.

    Each coordinate is mapped by x = sgn(Q)[Gamma(alpha+1)|Q|]^(1/alpha),
    extending the first-orthant identification to all orthants through the
    sign-preserving inverse (an implementation choice; the map is odd).
    """
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    if not 0.0 < beta <= 1.0:
        raise DomainError(f"beta must lie in (0, 1], got {beta}")
    grid = np.asarray(grid, dtype=float)
    pos = _accumulate_bm(grid, kappa, beta, dim, seed, n_paths)
    if alpha != 1.0:
        gamma_a1 = math.gamma(alpha + 1.0)
        pos = np.sign(pos) * (gamma_a1 * np.abs(pos)) ** (1.0 / alpha)
    return WalkerEnsemble(
        process="fsbm-q",
        grid=grid,
        positions=pos,
        seed=seed,
        kappa=kappa,
        params={"alpha": alpha, "beta": beta},
    )


def simulate(
    process: str,
    n_paths: int,
    grid: Sequence[float] | np.ndarray,
    spec: DiffusionSpec,
    seed: int,
) -> WalkerEnsemble:
    """Dispatch by process tag, pulling parameters from the spec."""
    sc = spec.scales
    if process == "bm":
        return simulate_bm(n_paths, grid, sc.kappa, spec.dim, seed)
    if process == "sbm":
        return simulate_sbm(n_paths, grid, sc.kappa, sc.nu, spec.dim, seed)
    if process in ("fsbm-v", "fssbm"):
        return simulate_fsbm_v(n_paths, grid, spec, seed)
    if process == "fsbm-q":
        alpha = spec.charges.alphas[0] if spec.charges is not None else 1.0
        return simulate_fsbm_q(n_paths, grid, alpha, sc.beta, spec.dim, seed, sc.kappa)
    raise DomainError(f"unknown process {process!r}; expected one of {PROCESSES}")


def msd(ensemble: WalkerEnsemble) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mean squared displacement from the origin at each grid time.

    Returns (sigmas, msd, stderr); the ensemble mean is a fixed-order
    reduction, so it inherits the simulator's determinism.
    """
    if ensemble.n_paths == 0:
        raise DomainError("empty ensemble")
    sq = np.sum(ensemble.positions ** 2, axis=2)  # (n_paths, n_steps)
    mean = sq.mean(axis=0)
    stderr = sq.std(axis=0, ddof=1) / math.sqrt(ensemble.n_paths)
    return ensemble.grid.copy(), mean, stderr


def fit_scaling_exponent(
    sigmas: np.ndarray,
    values: np.ndarray,
    window: tuple[float, float],
) -> MsdFit:
    """Least-squares slope of ln(values) against ln(sigmas) inside the window.

    Needs at least 10 strictly positive points; the standard error is the
    usual OLS slope error from the fit residuals.
    """
    sigmas = np.asarray(sigmas, dtype=float)
    values = np.asarray(values, dtype=float)
    lo, hi = window
    if not lo < hi:
        raise DomainError(f"degenerate fit window {window}")
    mask = (sigmas >= lo) & (sigmas <= hi)
    if int(mask.sum()) < 10:
        raise DomainError(f"fit window {window} holds {int(mask.sum())} points; need >= 10")
    if np.any(values[mask] <= 0.0):
        raise DomainError("fit window contains non-positive values")
    x = np.log(sigmas[mask])
    y = np.log(values[mask])
    n = x.size
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    variance = float(np.sum(resid ** 2)) / (n - 2) if n > 2 else 0.0
    stderr = math.sqrt(variance / sxx)
    return MsdFit(exponent=slope, prefactor=math.exp(intercept), stderr=stderr, window=(lo, hi))


def fit_scaling_exponent_batched(
    ensemble: WalkerEnsemble,
    window: tuple[float, float],
    n_batches: int = _MEDIAN_BATCHES,
) -> MsdFit:
    """Median-of-batches exponent fit for heavy-tailed walkers.

    Paths are split into ``n_batches`` contiguous batches, the exponent is
    fitted per batch, and the median is reported with a MAD-based standard
    error.  This keeps the scaling estimate robust when squared displacements
    have large kurtosis (the q-model walker raises Gaussians to 1/alpha).
    """
    if ensemble.n_paths < n_batches:
        raise DomainError(f"need at least {n_batches} paths, got {ensemble.n_paths}")
    bounds = np.linspace(0, ensemble.n_paths, n_batches + 1, dtype=int)
    exponents = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        sq = np.sum(ensemble.positions[lo:hi] ** 2, axis=2).mean(axis=0)
        exponents.append(fit_scaling_exponent(ensemble.grid, sq, window).exponent)
    exponents = np.asarray(exponents)
    med = float(np.median(exponents))
    mad = float(np.median(np.abs(exponents - med)))
    stderr = 1.4826 * mad / math.sqrt(n_batches)
    return MsdFit(exponent=med, prefactor=math.nan, stderr=stderr, window=window)


def increment_diagnostics(ensemble: WalkerEnsemble, lag: int) -> IncrementReport:
    """Stationarity and correlation statistics of increments at a given lag.

    Stationarity: the variance of X(sigma_{i+lag}) - X(sigma_i) is regressed
    against sigma_i over all window starts; a nonzero slope flags
    nonstationary increments.  Meaningful start-to-start comparison needs a
    uniform grid (equal sigma differences), which is enforced.

    Correlation: the sample correlation across paths between the first and
    the last lag-sized increments (disjoint and maximally separated).  The
    t statistic uses stderr = 1/sqrt(n_paths).
    """
    if lag < 1 or lag >= ensemble.n_steps:
        raise DomainError(f"lag must lie in [1, n_steps), got {lag}")
    n_pairs = ensemble.n_steps - lag
    if n_pairs < 3 or ensemble.n_paths < 8:
        raise DomainError("insufficient data for increment diagnostics")
    steps = np.diff(ensemble.grid)
    if np.any(np.abs(steps - steps[0]) > 1e-9 * abs(steps[0])):
        raise GridError("increment diagnostics need a uniform grid")

    pos = ensemble.positions
    inc = pos[:, lag:, :] - pos[:, :-lag, :]  # (paths, n_pairs, dim)
    inc_sq = np.sum(inc ** 2, axis=2)
    variances = inc_sq.mean(axis=0)
    var_of_var = inc_sq.var(axis=0, ddof=1) / ensemble.n_paths

    starts = ensemble.grid[:-lag]
    xm = starts.mean()
    sxx = float(np.sum((starts - xm) ** 2))
    scale = variances.mean()
    slope = float(np.sum((starts - xm) * (variances - variances.mean())) / sxx) / scale
    # Propagated per-point sampling error of the slope (variance estimates are
    # independent across paths, approximately across starts).
    slope_err = math.sqrt(float(np.sum(((starts - xm) / sxx) ** 2 * var_of_var))) / scale
    stat_t = slope / slope_err if slope_err > 0.0 else math.inf if slope else 0.0

    first = inc[:, 0, :].sum(axis=1)
    last = inc[:, -1, :].sum(axis=1)
    fm, lm = first.mean(), last.mean()
    num = float(np.mean((first - fm) * (last - lm)))
    den = float(first.std(ddof=0) * last.std(ddof=0))
    corr = num / den if den > 0.0 else 0.0
    corr_t = corr * math.sqrt(ensemble.n_paths)
    return IncrementReport(
        stationarity_slope=slope,
        stationarity_tstat=stat_t,
        correlation=corr,
        correlation_tstat=corr_t,
        lag=lag,
    )
