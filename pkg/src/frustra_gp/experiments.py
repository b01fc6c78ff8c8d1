"""Parameter sweeps: geometric-phase surfaces, coupling-strategy comparison,
and the self-verification suite binding the analytic and exact routes.

Surfaces evaluate the closed-form geometric phase over an (theta, phi) grid
of initial states at a fixed evolution time, with the time grid chosen
automatically from the fastest sector frequency: dt <= 2 pi / (s * Gamma_max)
for sampling factor s (default 40) and Gamma_max = Gamma(N/2, N/2).

`strategy_compare` contrasts coupling allocations (single bath vs split
couplings) by two grid metrics: mean |gamma| and mean angular distance to
the decoupled-limit reference gamma_u(theta) = -pi (1 - cos theta).  The
winner is always the config closest to the reference under the distance
metric.  Iteration order, summation order, and cell placement are fixed, so
identical invocations reproduce identical reports bit for bit regardless of
the worker-thread count.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    TimeGrid,
    bloch_trajectory,
    gamma_freq,
    literal_points,
    rotation_matrices,
)
from .errors import ConfigError, IndeterminatePhaseError, ResolutionError
from .model import (
    InitialStateAngles,
    SystemConfig,
    initial_bloch,
    sector_weights,
    validate_config,
)
from .oracle import OracleLimits, oracle_trajectory
from .phase import (
    DEFAULT_R_TOL,
    PolarTrack,
    _track_arrays,
    angular_distance,
    gp_closed_form,
    gp_discrete_holonomy,
    gp_south_pole,
    gp_unitary_reference,
    polar_track,
)

SURFACE_MODES = ("physical", "literal")
COMPARE_METRICS = ("mean_dist_to_unitary", "mean_abs_gp")


@dataclass(frozen=True)
class AngleGrid:
    """Rectangular grid of initial-state angles.

    theta spans [theta_min, theta_max] inclusively with n_theta nodes and
    must stay strictly inside (0, pi) unless include_poles is set; phi spans
    [0, 2 pi) with n_phi equally spaced nodes (endpoint excluded).
    """

    n_theta: int = 61
    n_phi: int = 61
    theta_min: float = 0.05
    theta_max: float = math.pi - 0.05
    include_poles: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.n_theta, int) or self.n_theta < 2:
            raise ConfigError("n_theta must be an integer >= 2")
        if not isinstance(self.n_phi, int) or self.n_phi < 2:
            raise ConfigError("n_phi must be an integer >= 2")
        if not (math.isfinite(self.theta_min) and math.isfinite(self.theta_max)):
            raise ConfigError("theta bounds must be finite")
        if self.theta_min >= self.theta_max:
            raise ConfigError("theta_min must be smaller than theta_max")
        lo, hi = (0.0, math.pi) if self.include_poles else (None, None)
        if self.include_poles:
            if self.theta_min < lo or self.theta_max > hi:
                raise ConfigError("theta bounds must lie in [0, pi]")
        elif not (0.0 < self.theta_min and self.theta_max < math.pi):
            raise ConfigError(
                "theta bounds must lie strictly inside (0, pi);"
                " pass include_poles=True to sample the poles"
            )

    def thetas(self) -> np.ndarray:
        return np.linspace(self.theta_min, self.theta_max, self.n_theta)

    def phis(self) -> np.ndarray:
        return np.linspace(0.0, 2.0 * math.pi, self.n_phi, endpoint=False)


def max_sector_freq(config: SystemConfig) -> float:
    """Largest Gamma over the sector grid (attained at m1 = m2 = N/2)."""
    half = config.bath_size / 2.0
    return gamma_freq(config, half, half)


def auto_time_grid(
    config: SystemConfig,
    t_end: float,
    sampling_factor: int = 40,
    min_steps: int = 201,
) -> TimeGrid:
    """Uniform grid on [0, t_end] with dt <= 2 pi / (sampling_factor * Gamma_max)."""
    if not (math.isfinite(t_end) and t_end > 0.0):
        raise ConfigError("t_end must be positive and finite")
    if sampling_factor < 1:
        raise ConfigError("sampling_factor must be >= 1")
    needed = math.ceil(t_end * sampling_factor * max_sector_freq(config) / (2.0 * math.pi))
    return TimeGrid(0.0, float(t_end), max(min_steps, needed + 1))


@dataclass(frozen=True)
class GpSurface:
    """Geometric phase over an angle grid at one evolution time.

    gamma holds principal values in [-pi, pi); gamma_unwrapped the unreduced
    values; singular_count the number of flagged azimuth nodes per cell.
    Cells whose phase is indeterminate are NaN in both gamma arrays.
    """

    grid: AngleGrid
    config: SystemConfig
    t: float
    mode: str
    time_steps: int
    gamma: np.ndarray
    gamma_unwrapped: np.ndarray
    singular_count: np.ndarray

    def __post_init__(self) -> None:
        shape = (self.grid.n_theta, self.grid.n_phi)
        for name in ("gamma", "gamma_unwrapped", "singular_count"):
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ConfigError(f"{name} must have shape {shape}")
            arr.setflags(write=False)
        finite = self.gamma[np.isfinite(self.gamma)]
        if finite.size and (finite.min() < -math.pi or finite.max() >= math.pi):
            raise ConfigError("gamma entries fall outside the principal range")


def _surface_row(
    theta: float,
    phis: np.ndarray,
    rot: np.ndarray,
    mode: str,
    grid: TimeGrid,
    r_tol: float,
):
    """Evaluate one constant-theta row of a surface; returns three 1-d arrays."""
    st, ct = math.sin(theta), math.cos(theta)
    if mode == "physical":
        starts = np.column_stack([-st * np.sin(phis), st * np.cos(phis), np.full_like(phis, ct)])
        scale = 1.0
    else:
        # Literal series equals -1/2 times the same rotation sum applied to
        # the reflected frame vector (sin t sin p, sin t cos p, cos t).
        starts = np.column_stack([st * np.sin(phis), st * np.cos(phis), np.full_like(phis, ct)])
        scale = -0.5
    cells = scale * np.einsum("nij,cj->cni", rot, starts)
    gam = np.empty(phis.size)
    unw = np.empty(phis.size)
    sing = np.empty(phis.size, dtype=int)
    for j in range(phis.size):
        try:
            series = _track_arrays(cells[j], r_tol)
            track = PolarTrack(grid=grid, **series)
            res = gp_closed_form(track, require_pure=(mode == "physical"))
            gam[j] = res.gamma
            unw[j] = res.gamma_unwrapped
            sing[j] = res.diagnostics.singular_nodes
        except IndeterminatePhaseError:
            gam[j] = math.nan
            unw[j] = math.nan
            sing[j] = int(series["singular"].sum())
        except ResolutionError as exc:
            raise ResolutionError(
                f"cell theta={theta:.6f}, phi={phis[j]:.6f}: {exc}"
            ) from exc
    return gam, unw, sing


def gp_surface(
    config: SystemConfig,
    grid: AngleGrid,
    t: float,
    mode: str = "physical",
    time_steps: int | None = None,
    sampling_factor: int = 40,
    threads: int = 1,
    r_tol: float = DEFAULT_R_TOL,
) -> GpSurface:
    """Closed-form geometric phase over an angle grid (theta outer, phi inner)."""
    validate_config(config)
    if mode not in SURFACE_MODES:
        raise ConfigError(f"mode must be one of {SURFACE_MODES}")
    if threads < 1:
        raise ConfigError("threads must be >= 1")
    if time_steps is not None:
        tg = TimeGrid(0.0, float(t), time_steps)
    else:
        tg = auto_time_grid(config, t, sampling_factor)
    times = tg.times()
    rot = rotation_matrices(config, times)
    thetas = grid.thetas()
    phis = grid.phis()
    gamma = np.empty((grid.n_theta, grid.n_phi))
    unwrapped = np.empty((grid.n_theta, grid.n_phi))
    singular = np.empty((grid.n_theta, grid.n_phi), dtype=int)

    def fill(i: int) -> None:
        gamma[i], unwrapped[i], singular[i] = _surface_row(
            float(thetas[i]), phis, rot, mode, tg, r_tol
        )

    if threads == 1:
        for i in range(grid.n_theta):
            fill(i)
    else:
        with ThreadPoolExecutor(max_workers=min(threads, grid.n_theta)) as pool:
            list(pool.map(fill, range(grid.n_theta)))
    return GpSurface(
        grid=grid,
        config=config,
        t=float(t),
        mode=mode,
        time_steps=tg.n_steps,
        gamma=gamma,
        gamma_unwrapped=unwrapped,
        singular_count=singular,
    )


@dataclass(frozen=True)
class StrategySummary:
    """Grid metrics for one coupling allocation."""

    label: str
    config: SystemConfig
    mean_abs_gp: float
    mean_dist_to_unitary: float
    min_gp: float
    max_gp: float
    missing_cells: int


@dataclass(frozen=True)
class StrategyReport:
    """Comparison of coupling allocations over a shared angle grid."""

    entries: tuple[StrategySummary, ...]
    metric: str
    ranking: tuple[str, ...]
    winner: str
    grid: AngleGrid
    t: float
    mode: str
    time_steps: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "ranking": list(self.ranking),
            "winner": self.winner,
            "t": self.t,
            "mode": self.mode,
            "time_steps": list(self.time_steps),
            "n_theta": self.grid.n_theta,
            "n_phi": self.grid.n_phi,
            "entries": [
                {
                    "label": e.label,
                    "omega": e.config.omega,
                    "alpha1": e.config.alpha1,
                    "alpha2": e.config.alpha2,
                    "bath_size": e.config.bath_size,
                    "mean_abs_gp": e.mean_abs_gp,
                    "mean_dist_to_unitary": e.mean_dist_to_unitary,
                    "min_gp": e.min_gp,
                    "max_gp": e.max_gp,
                    "missing_cells": e.missing_cells,
                }
                for e in self.entries
            ],
        }


def _summarize(label: str, surface: GpSurface) -> StrategySummary:
    gamma = surface.gamma
    finite = np.isfinite(gamma)
    refs = np.array([gp_unitary_reference(th) for th in surface.grid.thetas()])
    dists = angular_distance(gamma, refs[:, None])
    if finite.any():
        mean_abs = float(np.mean(np.abs(gamma[finite])))
        mean_dist = float(np.mean(dists[finite]))
        gmin = float(gamma[finite].min())
        gmax = float(gamma[finite].max())
    else:
        mean_abs = mean_dist = gmin = gmax = math.nan
    return StrategySummary(
        label=label,
        config=surface.config,
        mean_abs_gp=mean_abs,
        mean_dist_to_unitary=mean_dist,
        min_gp=gmin,
        max_gp=gmax,
        missing_cells=int(np.count_nonzero(~finite)),
    )


def strategy_compare(
    configs,
    grid: AngleGrid,
    t: float,
    metric: str = "mean_dist_to_unitary",
    mode: str = "physical",
    time_steps: int | None = None,
    sampling_factor: int = 40,
    threads: int = 1,
) -> StrategyReport:
    """Compare >= 2 labeled coupling allocations sharing omega, N, and t.

    configs: sequence of (label, SystemConfig) pairs.  Ranking sorts by the
    chosen metric (distance ascending; |gamma| descending), ties broken by
    label; the winner is always the entry with the smallest distance to the
    decoupled-limit reference.
    """
    pairs = list(configs)
    if len(pairs) < 2:
        raise ConfigError("strategy comparison needs at least two configs")
    labels = [label for label, _ in pairs]
    if len(set(labels)) != len(labels):
        raise ConfigError("strategy labels must be unique")
    if metric not in COMPARE_METRICS:
        raise ConfigError(f"metric must be one of {COMPARE_METRICS}")
    first = pairs[0][1]
    for label, cfg in pairs:
        validate_config(cfg)
        if cfg.omega != first.omega or cfg.bath_size != first.bath_size:
            raise ConfigError(
                f"config '{label}' does not share omega and bath_size with"
                f" '{pairs[0][0]}'"
            )
    summaries = []
    steps = []
    for label, cfg in pairs:
        surface = gp_surface(
            cfg,
            grid,
            t,
            mode=mode,
            time_steps=time_steps,
            sampling_factor=sampling_factor,
            threads=threads,
        )
        steps.append(surface.time_steps)
        summaries.append(_summarize(label, surface))

    def dist_key(s: StrategySummary):
        return (math.isnan(s.mean_dist_to_unitary), s.mean_dist_to_unitary, s.label)

    def abs_key(s: StrategySummary):
        return (math.isnan(s.mean_abs_gp), -s.mean_abs_gp, s.label)

    by_dist = sorted(summaries, key=dist_key)
    ranking = by_dist if metric == "mean_dist_to_unitary" else sorted(summaries, key=abs_key)
    return StrategyReport(
        entries=tuple(summaries),
        metric=metric,
        ranking=tuple(s.label for s in ranking),
        winner=by_dist[0].label,
        grid=grid,
        t=float(t),
        mode=mode,
        time_steps=tuple(steps),
    )


@dataclass(frozen=True)
class VerifyCheck:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str


@dataclass(frozen=True)
class VerifyReport:
    """Machine-readable outcome of the cross-validation suite."""

    checks: tuple[VerifyCheck, ...]
    runtime_s: float

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "all_passed": self.all_passed,
            "runtime_s": self.runtime_s,
            "checks": [
                {
                    "name": c.name,
                    "passed": c.passed,
                    "measured": c.measured,
                    "tolerance": c.tolerance,
                    "detail": c.detail,
                }
                for c in self.checks
            ],
        }


def verify_suite(
    limits: OracleLimits | None = None, seed: int = 20260814
) -> VerifyReport:
    """Run the built-in cross-checks and report measured errors.

    Covers: sector sum vs dense evolution for N in {1, 2, 3}; the
    decoupled-limit phase against -pi (1 - cos theta0); closed form vs
    discrete holonomy on randomized decohering configs; the documented
    normalization discrepancy of the literal polarization series; the
    south-pole special case; and exact sector-weight normalization.
    Failures are recorded as entries, never raised.
    """
    limits = limits or OracleLimits()
    rng = np.random.default_rng(seed)
    started = time.perf_counter()
    checks = []

    # Sector sum against the dense reference.
    worst = 0.0
    for n in (1, 2, 3):
        for _ in range(3):
            cfg = SystemConfig(
                omega=float(rng.uniform(0.5, 2.5)),
                alpha1=float(rng.uniform(0.0, 1.5)),
                alpha2=float(rng.uniform(0.0, 1.5)),
                bath_size=n,
            )
            ang = InitialStateAngles(
                theta=float(rng.uniform(0.0, math.pi)),
                phi=float(rng.uniform(0.0, 2.0 * math.pi)),
            )
            grid = TimeGrid(0.0, float(rng.uniform(2.0, 8.0)), 7)
            exact = oracle_trajectory(cfg, ang, grid, limits)
            approx = bloch_trajectory(cfg, ang, grid)
            worst = max(worst, float(np.max(np.abs(exact.points - approx.points))))
    checks.append(
        VerifyCheck(
            name="oracle_vs_analytic",
            passed=worst <= 1e-10,
            measured=worst,
            tolerance=1e-10,
            detail="max Bloch-component deviation, N in {1, 2, 3}",
        )
    )

    # Decoupled limit against the closed-form reference value.
    worst = 0.0
    for theta0 in (0.3, 0.9, 1.5, 2.1, 2.7):
        cfg = SystemConfig(omega=2.0, alpha1=0.0, alpha2=0.0, bath_size=1)
        ang = InitialStateAngles(theta=theta0, phi=0.4)
        tg = TimeGrid(0.0, math.pi, 4001)
        res = gp_closed_form(polar_track(bloch_trajectory(cfg, ang, tg)), ang)
        worst = max(worst, angular_distance(res.gamma, gp_unitary_reference(theta0)))
    checks.append(
        VerifyCheck(
            name="unitary_limit_gp",
            passed=worst <= 1e-4,
            measured=worst,
            tolerance=1e-4,
            detail="max |gamma - gamma_u(theta0)| mod 2pi at 4001 steps",
        )
    )

    # Closed form against the discrete holonomy product.
    worst = 0.0
    for _ in range(4):
        cfg = SystemConfig(
            omega=float(rng.uniform(1.0, 2.5)),
            alpha1=float(rng.uniform(0.0, 1.0)),
            alpha2=float(rng.uniform(0.0, 1.0)),
            bath_size=int(rng.integers(1, 5)),
        )
        ang = InitialStateAngles(
            theta=float(rng.uniform(0.4, math.pi - 0.4)),
            phi=float(rng.uniform(0.0, 2.0 * math.pi)),
        )
        tg = TimeGrid(0.0, 5.0, 10_000)
        traj = bloch_trajectory(cfg, ang, tg)
        cf = gp_closed_form(polar_track(traj), ang)
        dh = gp_discrete_holonomy(traj)
        worst = max(worst, angular_distance(cf.gamma, dh.gamma))
    checks.append(
        VerifyCheck(
            name="closed_form_vs_holonomy",
            passed=worst <= 1e-3,
            measured=worst,
            tolerance=1e-3,
            detail="max cross-method deviation mod 2pi at 10^4 steps, tau = 5",
        )
    )

    # Documented discrepancy of the literal polarization series.
    cfg = SystemConfig(omega=2.0, alpha1=0.5, alpha2=0.5, bath_size=3)
    worst = 0.0
    ratio = math.nan
    for _ in range(5):
        ang = InitialStateAngles(
            theta=float(rng.uniform(0.1, math.pi - 0.1)),
            phi=float(rng.uniform(0.0, 2.0 * math.pi)),
        )
        lit = literal_points(cfg, ang, np.array([0.0]))[0]
        phys = initial_bloch(ang).as_array()
        ratio = float(np.linalg.norm(lit) / np.linalg.norm(phys))
        worst = max(worst, abs(ratio - 0.5))
    checks.append(
        VerifyCheck(
            name="literal_norm_ratio",
            passed=worst <= 1e-12,
            measured=ratio,
            tolerance=1e-12,
            detail="literal series norm at t = 0 is half the physical norm"
            " (documented, intentionally unpatched)",
        )
    )

    # South-pole special case against the closed form.
    worst = 0.0
    for _ in range(3):
        cfg = SystemConfig(
            omega=float(rng.uniform(1.0, 2.5)),
            alpha1=float(rng.uniform(0.1, 1.0)),
            alpha2=float(rng.uniform(0.1, 1.0)),
            bath_size=2,
        )
        ang = InitialStateAngles(theta=math.pi, phi=0.0)
        tg = TimeGrid(0.0, 5.0, 8_001)
        track = polar_track(bloch_trajectory(cfg, ang, tg))
        sp = gp_south_pole(track)
        cf = gp_closed_form(track, ang)
        worst = max(worst, angular_distance(sp.gamma, cf.gamma))
    checks.append(
        VerifyCheck(
            name="south_pole_consistency",
            passed=worst <= 1e-6,
            measured=worst,
            tolerance=1e-6,
            detail="pole form vs closed form at theta0 = pi",
        )
    )

    # Exact combinatorial weights.
    worst = 0.0
    for n in (1, 2, 3, 7, 50, 501):
        ladder = sector_weights(n)
        if sum(s.zeta for s in ladder) != 2**n:
            worst = math.inf
        worst = max(worst, abs(math.fsum(s.w for s in ladder) - 1.0))
    checks.append(
        VerifyCheck(
            name="sector_weight_normalization",
            passed=worst <= 1e-12,
            measured=worst,
            tolerance=1e-12,
            detail="exact zeta totals and unit weight sums up to N = 501",
        )
    )

    return VerifyReport(
        checks=tuple(checks), runtime_s=time.perf_counter() - started
    )


__all__ = [
    "AngleGrid",
    "GpSurface",
    "StrategyReport",
    "StrategySummary",
    "VerifyCheck",
    "VerifyReport",
    "auto_time_grid",
    "gp_surface",
    "max_sector_freq",
    "strategy_compare",
    "verify_suite",
]
