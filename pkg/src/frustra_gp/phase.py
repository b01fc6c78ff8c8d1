"""Mixed-state geometric phase of sampled Bloch trajectories.

A trajectory v(t) is first reduced to polar-track series

    A = <sigma_z>,  R = (1/2) sqrt(<sigma_x>^2 + <sigma_y>^2),
    eps_plus = sqrt(A^2 + 4 R^2) = |v|,
    tan(chi) = <sigma_y> / <sigma_x>   (four-quadrant, unwrapped),
    sin(theta_t / 2) = 2 R / sqrt(4 R^2 + (eps_plus - A)^2),

with theta_t in [0, pi] (equivalently sin^2(theta_t/2) = (1 + A/eps_plus)/2,
the numerically stable form used here; it follows that
cos(theta_t) = -A / eps_plus).  Nodes with R below a tolerance have an
indeterminate azimuth; chi is propagated flat across them and they are
flagged singular.

The geometric phase of the dominant spectral branch is then

    gamma = arg[ sqrt(lambda_plus(tau))
                 * ( cos(theta0/2) sin(theta_tau/2)
                     + e^{i dchi(tau)} sin(theta0/2) cos(theta_tau/2) )
                 * e^{-i integral_0^tau chi_dot cos^2(theta_t/2) dt} ],

with cos(theta0/2) = sqrt((1 + <sigma_z(0)> / eps_plus(0)) / 2) taken from
the normalized initial state and the connection integral evaluated by the
trapezoid rule on chi increments.  sqrt(lambda_plus) is a positive scalar and cannot move the
arg; it is reported as a diagnostic and never multiplied in, which makes the
result bit-identical under any positive rescaling of that factor.

Two independent routes are provided for cross-checking: a discrete holonomy
product over eigenvector overlaps (`gp_discrete_holonomy`) and the pole
special case gamma = (1/2) integral chi_dot (1 - cos(theta_t)) dt
(`gp_south_pole`, valid only when the state starts at theta0 = pi).  In the
decoupled limit both reproduce gamma = -pi (1 - cos(theta0)) at tau =
2 pi / omega, the value returned by `gp_unitary_reference`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import BlochTrajectory, TimeGrid
from .errors import (
    ConfigError,
    IndeterminatePhaseError,
    PreconditionError,
    ResolutionError,
)
from .model import InitialStateAngles

TWO_PI = 2.0 * math.pi

# Azimuth tolerance: a node with R below this has no usable phase.
DEFAULT_R_TOL = 1e-12
# Unwrap increments at the branch boundary cannot be resolved.
_JUMP_LIMIT = math.pi - 1e-9


def principal_value(angle):
    """Reduce an angle to [-pi, pi), i.e. (-pi, pi] with +pi reported as -pi.

    Rounding in angle - 2*pi*k can overshoot either boundary by a few ulp
    for large inputs, so the result is folded once more where needed.
    """
    angle = np.asarray(angle, dtype=float)
    wrapped = angle - TWO_PI * np.floor((angle + math.pi) / TWO_PI)
    wrapped = np.where(wrapped >= math.pi, wrapped - TWO_PI, wrapped)
    wrapped = np.where(wrapped < -math.pi, wrapped + TWO_PI, wrapped)
    if wrapped.ndim == 0:
        return float(wrapped)
    return wrapped


def angular_distance(a, b):
    """Distance between angles modulo 2*pi, in [0, pi]."""
    d = principal_value(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    return np.abs(d) if isinstance(d, np.ndarray) else abs(d)


@dataclass(frozen=True)
class PolarTrack:
    """Polar-decomposition series of a Bloch trajectory.

    chi is unwrapped (consecutive increments lie strictly inside (-pi, pi));
    singular marks nodes whose azimuth was propagated from a neighbor.
    """

    grid: TimeGrid
    A: np.ndarray
    R: np.ndarray
    chi: np.ndarray
    theta_t: np.ndarray
    eps_plus: np.ndarray
    singular: np.ndarray
    unwrap_jumps: int

    def __post_init__(self) -> None:
        for arr in (self.A, self.R, self.chi, self.theta_t, self.eps_plus, self.singular):
            np.asarray(arr).setflags(write=False)

    @property
    def n_steps(self) -> int:
        return self.A.size


@dataclass(frozen=True)
class GpDiagnostics:
    """Bookkeeping recorded alongside every geometric-phase value."""

    n_steps: int
    singular_nodes: int
    unwrap_jumps: int
    lambda_plus_end: float
    min_step_overlap: float | None = None


@dataclass(frozen=True)
class GpResult:
    """Geometric phase: principal value, unreduced value, method, diagnostics."""

    gamma: float
    gamma_unwrapped: float
    method: str
    diagnostics: GpDiagnostics


def _track_arrays(points: np.ndarray, r_tol: float) -> dict:
    """Compute polar-track series from raw (n, 3) Bloch samples."""
    pts = np.asarray(points, dtype=float)
    a = pts[:, 2].copy()
    rxy = np.hypot(pts[:, 0], pts[:, 1])
    r = rxy / 2.0
    eps = np.hypot(a, rxy)
    singular = r < r_tol

    raw = np.arctan2(pts[:, 1], pts[:, 0])
    valid = ~singular
    if not valid.any():
        filled = np.zeros_like(raw)
    else:
        # Flat continuation: copy the previous valid azimuth forward; a
        # singular prefix borrows the first valid azimuth.
        idx = np.where(valid, np.arange(raw.size), -1)
        idx = np.maximum.accumulate(idx)
        first_valid = int(np.flatnonzero(valid)[0])
        idx[idx < 0] = first_valid
        filled = raw[idx]

    d_raw = np.diff(filled)
    d = d_raw - TWO_PI * np.floor((d_raw + math.pi) / TWO_PI)
    if d.size and np.max(np.abs(d)) >= _JUMP_LIMIT:
        worst = int(np.argmax(np.abs(d)))
        raise ResolutionError(
            "time grid too coarse to unwrap the azimuth: step"
            f" {worst} -> {worst + 1} swings by {d[worst]:+.6f} rad;"
            " refine the grid (smaller dt or larger sampling factor)"
        )
    jumps = int(np.count_nonzero(np.abs(d_raw - d) > math.pi))
    chi = np.empty_like(filled)
    chi[0] = filled[0]
    np.cumsum(d, out=chi[1:])
    chi[1:] += filled[0]

    ratio = np.divide(a, eps, out=np.zeros_like(a), where=eps > 0.0)
    sin2_half = np.clip((1.0 + ratio) / 2.0, 0.0, 1.0)
    theta_t = 2.0 * np.arcsin(np.sqrt(sin2_half))
    return {
        "A": a,
        "R": r,
        "chi": chi,
        "theta_t": theta_t,
        "eps_plus": eps,
        "singular": singular,
        "unwrap_jumps": jumps,
    }


def polar_track(traj: BlochTrajectory, r_tol: float = DEFAULT_R_TOL) -> PolarTrack:
    """Reduce a Bloch trajectory to its polar-track series."""
    if r_tol <= 0.0:
        raise ConfigError("r_tol must be positive")
    series = _track_arrays(traj.points, r_tol)
    return PolarTrack(grid=traj.grid, **series)


def _trapezoid_on_chi(chi: np.ndarray, integrand: np.ndarray) -> float:
    """sum_i dchi_i * (f_i + f_{i+1}) / 2 for f sampled on the same nodes."""
    d = np.diff(chi)
    return float(np.dot(d, (integrand[:-1] + integrand[1:]) / 2.0))


def _pure_start_halves(a0: float) -> tuple[float, float]:
    c0 = math.sqrt(min(max((1.0 + a0) / 2.0, 0.0), 1.0))
    s0 = math.sqrt(min(max((1.0 - a0) / 2.0, 0.0), 1.0))
    return c0, s0


def gp_closed_form(
    track: PolarTrack,
    angles: InitialStateAngles | None = None,
    z_tol: float = 1e-14,
    require_pure: bool = True,
) -> GpResult:
    """Geometric phase of the dominant branch from the closed-form expression.

    `angles`, when given, is cross-checked against the track's initial node.
    `require_pure=False` admits sub-unit starting vectors (used for the
    literal-normalization mode); the same formulas are applied unchanged.
    """
    a0 = float(track.A[0])
    eps0 = float(track.eps_plus[0])
    if require_pure and abs(eps0 - 1.0) > 1e-9:
        raise PreconditionError(
            f"initial state not pure: |v(0)| = {eps0:.12f}; the closed form"
            " assumes a single dominant branch"
        )
    if angles is not None and abs(a0 - math.cos(angles.theta)) > 1e-9:
        raise PreconditionError(
            "track does not start at the stated initial state:"
            f" <sigma_z(0)> = {a0:.12f} vs cos(theta0) = {math.cos(angles.theta):.12f}"
        )
    if eps0 < 1e-15:
        raise IndeterminatePhaseError(
            "initial polarization vanishes; dominant branch undefined at t = 0"
        )
    # Branch direction, not raw <sigma_z>: keeps the arg exactly invariant
    # under positive rescalings of the polarization.
    c0, s0 = _pure_start_halves(a0 / eps0)
    half_end = track.theta_t[-1] / 2.0
    dchi = float(track.chi[-1] - track.chi[0])
    cos2_half = np.cos(track.theta_t / 2.0) ** 2
    connection = _trapezoid_on_chi(track.chi, cos2_half)
    bracket = c0 * math.sin(half_end) + np.exp(1.0j * dchi) * s0 * math.cos(half_end)
    if abs(bracket) < z_tol:
        raise IndeterminatePhaseError(
            f"indeterminate phase: |bracket| = {abs(bracket):.3e} < {z_tol:.3e}"
        )
    head = math.atan2(bracket.imag, bracket.real)
    unwrapped = head - connection
    return GpResult(
        gamma=principal_value(unwrapped),
        gamma_unwrapped=unwrapped,
        method="closed_form",
        diagnostics=GpDiagnostics(
            n_steps=track.n_steps,
            singular_nodes=int(track.singular.sum()),
            unwrap_jumps=track.unwrap_jumps,
            lambda_plus_end=(1.0 + float(track.eps_plus[-1])) / 2.0,
        ),
    )


def gp_south_pole(track: PolarTrack) -> GpResult:
    """Pole special case gamma = (1/2) integral chi_dot (1 - cos theta_t) dt.

    Requires the trajectory to start at the Bloch south pole (theta0 = pi,
    i.e. <sigma_z(0)> = -1); otherwise a PreconditionError is raised.  The
    integrand (1 - cos theta_t)/2 equals sin^2(theta_t/2) and the quadrature
    matches gp_closed_form's trapezoid on chi increments; the two methods
    agree exactly (mod 2*pi) at the pole.
    """
    a0 = float(track.A[0])
    if abs(a0 + 1.0) > 1e-12:
        raise PreconditionError(
            "south-pole form requires theta0 = pi (initial <sigma_z> = -1),"
            f" got <sigma_z(0)> = {a0:.12f}"
        )
    sin2_half = np.sin(track.theta_t / 2.0) ** 2
    unwrapped = _trapezoid_on_chi(track.chi, sin2_half)
    return GpResult(
        gamma=principal_value(unwrapped),
        gamma_unwrapped=unwrapped,
        method="south_pole",
        diagnostics=GpDiagnostics(
            n_steps=track.n_steps,
            singular_nodes=int(track.singular.sum()),
            unwrap_jumps=track.unwrap_jumps,
            lambda_plus_end=(1.0 + float(track.eps_plus[-1])) / 2.0,
        ),
    )


def _branch_spinors(points: np.ndarray, r_tol: float = DEFAULT_R_TOL) -> np.ndarray:
    """Eigenvectors of the dominant branch, shape (n, 2), rows (up, down).

    The + eigenvector of (1 + v.sigma)/2 points along v:
    (cos(beta/2), e^{i chi} sin(beta/2)) with cos(beta) = v_z / |v|.
    Nodes on the z axis take phase 1 (a gauge choice; the holonomy product
    is gauge invariant).
    """
    pts = np.asarray(points, dtype=float)
    a = pts[:, 2]
    rxy = np.hypot(pts[:, 0], pts[:, 1])
    eps = np.hypot(a, rxy)
    if np.min(eps) < 1e-15:
        raise PreconditionError(
            "fully mixed node encountered; dominant branch undefined"
        )
    ratio = a / eps
    cos_half = np.sqrt(np.clip((1.0 + ratio) / 2.0, 0.0, 1.0))
    sin_half = np.sqrt(np.clip((1.0 - ratio) / 2.0, 0.0, 1.0))
    phase = np.ones(pts.shape[0], dtype=complex)
    ok = rxy > r_tol
    phase[ok] = (pts[ok, 0] + 1.0j * pts[ok, 1]) / rxy[ok]
    return np.column_stack([cos_half.astype(complex), sin_half * phase])


def pancharatnam_phase(
    spinors: np.ndarray, overlap_tol: float = 1e-10
) -> tuple[float, float, float]:
    """Holonomy phase of a chain of spinors (gauge invariant).

    Returns (gamma, gamma_unwrapped, min_step_overlap):
    gamma = arg[<s_0|s_end> * prod_i (<s_i|s_{i+1}> / |<s_i|s_{i+1}>|)^{-1}],
    accumulated step by step so the unreduced value is meaningful.
    """
    s = np.asarray(spinors, dtype=complex)
    if s.ndim != 2 or s.shape[1] != 2 or s.shape[0] < 2:
        raise ConfigError("spinor chain must have shape (n >= 2, 2)")
    overlaps = np.einsum("ij,ij->i", s[:-1].conj(), s[1:])
    moduli = np.abs(overlaps)
    min_overlap = float(moduli.min())
    if min_overlap < overlap_tol:
        worst = int(np.argmin(moduli))
        raise ResolutionError(
            f"consecutive branch eigenvectors nearly orthogonal at step {worst}"
            f" (overlap {min_overlap:.3e}); refine the time grid"
        )
    closure = complex(np.dot(s[0].conj(), s[-1]))
    if abs(closure) < 1e-14:
        raise IndeterminatePhaseError(
            "endpoint eigenvectors orthogonal; holonomy phase indeterminate"
        )
    step_args = np.arctan2(overlaps.imag, overlaps.real)
    unwrapped = math.atan2(closure.imag, closure.real) - float(step_args.sum())
    return principal_value(unwrapped), unwrapped, min_overlap


def gp_discrete_holonomy(
    traj: BlochTrajectory,
    overlap_tol: float = 1e-10,
    r_tol: float = DEFAULT_R_TOL,
) -> GpResult:
    """Geometric phase from the discrete eigenvector-overlap product.

    Independent of the closed form: eigendecomposes each node analytically
    and multiplies normalized neighbor overlaps.  The positive factor
    sqrt(lambda_plus(0) lambda_plus(tau)) cannot move the arg and is only
    reported as a diagnostic.
    """
    eps0 = float(np.linalg.norm(traj.points[0]))
    if abs(eps0 - 1.0) > 1e-9:
        raise PreconditionError(
            f"initial state not pure: |v(0)| = {eps0:.12f}"
        )
    spinors = _branch_spinors(traj.points, r_tol)
    gamma, unwrapped, min_overlap = pancharatnam_phase(spinors, overlap_tol)
    eps_end = float(np.linalg.norm(traj.points[-1]))
    rxy = np.hypot(traj.points[:, 0], traj.points[:, 1])
    return GpResult(
        gamma=gamma,
        gamma_unwrapped=unwrapped,
        method="discrete_holonomy",
        diagnostics=GpDiagnostics(
            n_steps=traj.points.shape[0],
            singular_nodes=int(np.count_nonzero(rxy / 2.0 < r_tol)),
            unwrap_jumps=0,
            lambda_plus_end=(1.0 + eps_end) / 2.0,
            min_step_overlap=min_overlap,
        ),
    )


def gp_unitary_reference(theta0: float) -> float:
    """Principal value of -pi (1 - cos theta0), the decoupled-limit phase
    after one full precession period tau = 2 pi / omega."""
    if not (0.0 <= theta0 <= math.pi):
        raise ConfigError("theta0 must lie in [0, pi]")
    return principal_value(-math.pi * (1.0 - math.cos(theta0)))
