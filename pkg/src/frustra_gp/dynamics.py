"""Closed-form reduced dynamics of the qubit as a weighted sum over sectors.

With both baths maximally mixed, each joint collective eigenvalue pair
(m1, m2) evolves the qubit under the effective field

    b(m1, m2) = (alpha1 * m1, alpha2 * m2, omega),
    Gamma(m1, m2) = |b| = sqrt(omega^2 + alpha1^2 m1^2 + alpha2^2 m2^2),

so the sector Bloch vector rotates about n = b / Gamma by angle Gamma * t:

    v(t) = cos(Gamma t) v0 + sin(Gamma t) (n x v0) + (1 - cos(Gamma t)) (n.v0) n.

The rotation sense is fixed by the Heisenberg equations for H = omega
sigma_z / 2 in the stated basis: the alpha = 0 limit satisfies
dv/dt = omega (z x v).  The reduced state is the exact convex combination

    v_S(t) = sum_{m1, m2} w(m1) w(m2) R_{m1 m2}(t) v(0),

a contraction (|v_S(t)| <= 1) that is unitary only when a single sector
carries all weight.

`literal_polarizations` additionally evaluates an alternate transcription of
the same sector sum that carries a -1 / 2^(2N+1) prefactor and a reflected
x axis in its initial frame.  It is kept, unpatched, to document its
normalization discrepancy: at t = 0 it yields a Bloch norm of 1/2 for pure
initial states where `bloch_at` yields 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConfigError
from .model import (
    BlochVector,
    InitialStateAngles,
    SystemConfig,
    initial_bloch,
    sector_weights,
    validate_config,
)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform sampling of [t_start, t_end] with n_steps nodes (>= 2)."""

    t_start: float
    t_end: float
    n_steps: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.t_start) and math.isfinite(self.t_end)):
            raise ConfigError("time grid bounds must be finite")
        if self.t_start < 0.0:
            raise ConfigError("t_start must be >= 0")
        if self.t_end <= self.t_start:
            raise ConfigError("t_end must exceed t_start")
        if not isinstance(self.n_steps, int) or self.n_steps < 2:
            raise ConfigError("n_steps must be an integer >= 2")

    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.n_steps)

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / (self.n_steps - 1)


@dataclass(frozen=True)
class BlochTrajectory:
    """Sampled reduced Bloch vectors on a time grid.

    points has shape (n_steps, 3); every node obeys |v| <= 1 + 1e-12 and the
    first node is unit within 1e-10 (pure initial state).
    """

    grid: TimeGrid
    points: np.ndarray
    config: SystemConfig
    initial: InitialStateAngles = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape != (self.grid.n_steps, 3):
            raise ConfigError(
                f"trajectory points must have shape ({self.grid.n_steps}, 3)"
            )
        if not np.all(np.isfinite(pts)):
            raise ConfigError("trajectory contains non-finite points")
        norms = np.linalg.norm(pts, axis=1)
        if norms.max() > 1.0 + 1e-12:
            raise ConfigError("trajectory leaves the Bloch ball beyond 1e-12")
        if abs(norms[0] - 1.0) > 1e-10:
            raise ConfigError("trajectory must start on the Bloch sphere (pure state)")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)


def gamma_freq(config: SystemConfig, m1: float, m2: float) -> float:
    """Sector precession frequency sqrt(omega^2 + alpha1^2 m1^2 + alpha2^2 m2^2)."""
    return math.sqrt(
        config.omega**2 + (config.alpha1 * m1) ** 2 + (config.alpha2 * m2) ** 2
    )


def sector_rotation(
    v0: BlochVector, config: SystemConfig, m1: float, m2: float, t: float
) -> BlochVector:
    """Rotate v0 about n = b/Gamma by angle Gamma*t for one (m1, m2) sector.

    Gamma = 0 (possible only when every field component vanishes) leaves the
    vector unchanged for all t.
    """
    b = np.array([config.alpha1 * m1, config.alpha2 * m2, config.omega], dtype=float)
    gamma = float(np.linalg.norm(b))
    v = v0.as_array()
    if gamma == 0.0:
        return BlochVector.from_array(v)
    n = b / gamma
    ang = gamma * t
    c, s = math.cos(ang), math.sin(ang)
    rotated = c * v + s * np.cross(n, v) + (1.0 - c) * np.dot(n, v) * n
    return BlochVector.from_array(rotated)


@lru_cache(maxsize=64)
def _sector_tables(config: SystemConfig):
    """Flattened (m1-major ascending, then m2) sector arrays for fast sums.

    Returns (weights, axes, gammas): weights (S,), unit axes (S, 3) with zero
    rows for Gamma = 0 sectors, gammas (S,), for S = (N + 1)^2 sectors.
    """
    ladder = sector_weights(config.bath_size)
    m = np.array([s.m for s in ladder])
    w = np.array([s.w for s in ladder])
    m1 = np.repeat(m, m.size)
    m2 = np.tile(m, m.size)
    weights = np.repeat(w, w.size) * np.tile(w, w.size)
    bx = config.alpha1 * m1
    by = config.alpha2 * m2
    bz = np.full_like(bx, config.omega)
    gammas = np.sqrt(bx * bx + by * by + bz * bz)
    axes = np.zeros((gammas.size, 3))
    nz = gammas > 0.0
    axes[nz, 0] = bx[nz] / gammas[nz]
    axes[nz, 1] = by[nz] / gammas[nz]
    axes[nz, 2] = bz[nz] / gammas[nz]
    for arr in (weights, axes, gammas):
        arr.setflags(write=False)
    return weights, axes, gammas


def rotation_matrices(config: SystemConfig, times: np.ndarray) -> np.ndarray:
    """Weighted sector-sum rotation map M(t), shape (n_times, 3, 3).

    v_S(t) = M(t) @ v(0).  Gamma = 0 sectors contribute w * identity through
    the cos term (their axis rows are zeroed).
    """
    validate_config(config)
    times = np.asarray(times, dtype=float)
    weights, axes, gammas = _sector_tables(config)
    # Per-sector cross-product matrices K and projectors P = n n^T.
    k_mats = np.zeros((gammas.size, 3, 3))
    k_mats[:, 0, 1] = -axes[:, 2]
    k_mats[:, 0, 2] = axes[:, 1]
    k_mats[:, 1, 0] = axes[:, 2]
    k_mats[:, 1, 2] = -axes[:, 0]
    k_mats[:, 2, 0] = -axes[:, 1]
    k_mats[:, 2, 1] = axes[:, 0]
    p_mats = axes[:, :, None] * axes[:, None, :]
    phases = np.outer(times, gammas)
    cosv = np.cos(phases)
    sinv = np.sin(phases)
    eye_part = (cosv * weights).sum(axis=1)
    out = np.einsum("n,ij->nij", eye_part, np.eye(3))
    out += np.einsum("ns,sij->nij", sinv * weights, k_mats)
    out += np.einsum("ns,sij->nij", (1.0 - cosv) * weights, p_mats)
    return out


def bloch_at(
    config: SystemConfig, angles: InitialStateAngles, t: float
) -> BlochVector:
    """Reduced Bloch vector at time t >= 0 (exact sector sum).

    At t = 0 this returns initial_bloch(angles); the map is a contraction so
    |v(t)| <= 1 always.
    """
    if not (isinstance(t, (int, float)) and math.isfinite(t)) or t < 0.0:
        raise ConfigError("t must be finite and >= 0")
    m = rotation_matrices(config, np.array([float(t)]))
    return BlochVector.from_array(m[0] @ initial_bloch(angles).as_array())


def bloch_trajectory(
    config: SystemConfig, angles: InitialStateAngles, grid: TimeGrid
) -> BlochTrajectory:
    """Sample the reduced dynamics on a uniform time grid."""
    m = rotation_matrices(config, grid.times())
    pts = np.einsum("nij,j->ni", m, initial_bloch(angles).as_array())
    return BlochTrajectory(grid=grid, points=pts, config=config, initial=angles)


def trajectory_batch(
    config: SystemConfig, v0s: np.ndarray, times: np.ndarray
) -> np.ndarray:
    """Evolve many initial Bloch vectors at once; returns (n_cells, n_times, 3)."""
    m = rotation_matrices(config, times)
    return np.einsum("nij,cj->cni", m, np.asarray(v0s, dtype=float))


def _sinc_factors(gammas: np.ndarray, t: float):
    """sin(Gamma t)/Gamma and (1 - cos(Gamma t))/Gamma^2 with Gamma -> 0 limits."""
    safe = np.where(gammas > 0.0, gammas, 1.0)
    ang = gammas * t
    s_over = np.where(gammas > 0.0, np.sin(ang) / safe, t)
    c_over = np.where(gammas > 0.0, (1.0 - np.cos(ang)) / safe**2, t * t / 2.0)
    return s_over, c_over


def literal_points(
    config: SystemConfig, angles: InitialStateAngles, times: np.ndarray
) -> np.ndarray:
    """Evaluate the literal polarization sum on an array of times.

    Transcribes the three closed-form component series verbatim, including
    their -1 / 2^(2N+1) prefactor (evaluated as -w1*w2/2 per sector, which is
    the same dyadic number).  Shape (n_times, 3) ordered (x, y, z).
    """
    validate_config(config)
    times = np.asarray(times, dtype=float)
    ladder = sector_weights(config.bath_size)
    m = np.array([s.m for s in ladder])
    w = np.array([s.w for s in ladder])
    a1m = config.alpha1 * np.repeat(m, m.size)
    a2m = config.alpha2 * np.tile(m, m.size)
    weights = np.repeat(w, w.size) * np.tile(w, w.size)
    omega = config.omega
    gammas = np.sqrt(omega**2 + a1m * a1m + a2m * a2m)

    st, ct = math.sin(angles.theta), math.cos(angles.theta)
    sp, cp = math.sin(angles.phi), math.cos(angles.phi)
    # Frame-projection factor shared by all three components.
    common = a1m * st * sp + a2m * st * cp + omega * ct

    out = np.empty((times.size, 3))
    for i, t in enumerate(times):
        cosv = np.cos(gammas * t)
        s_over, c_over = _sinc_factors(gammas, float(t))
        sz = cosv * ct + s_over * st * (a1m * cp - a2m * sp) + omega * common * c_over
        sx = cosv * st * sp - s_over * (omega * st * cp - a2m * ct) + a1m * common * c_over
        sy = cosv * st * cp - s_over * (-omega * st * sp + a1m * ct) + a2m * common * c_over
        out[i, 0] = -0.5 * float(np.dot(weights, sx))
        out[i, 1] = -0.5 * float(np.dot(weights, sy))
        out[i, 2] = -0.5 * float(np.dot(weights, sz))
    return out


def literal_polarizations(
    config: SystemConfig, angles: InitialStateAngles, t: float
) -> BlochVector:
    """Literal-form polarizations (x, y, z) at a single time.

    Not a physical Bloch vector: at t = 0 its norm is exactly 1/2 for pure
    initial states, and its x axis is reflected relative to bloch_at.  Kept
    for documenting that discrepancy and for reproducing figures generated
    from the literal series.
    """
    if not (isinstance(t, (int, float)) and math.isfinite(t)) or t < 0.0:
        raise ConfigError("t must be finite and >= 0")
    pts = literal_points(config, angles, np.array([float(t)]))
    return BlochVector.from_array(pts[0])
