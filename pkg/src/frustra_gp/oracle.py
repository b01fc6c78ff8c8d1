"""Exact dense evolution on the full qubit + bath + bath Hilbert space.

Ground truth for the sector-sum dynamics: build the full Hamiltonian on
dimension D = 2 * 2^N * 2^N in the ordering qubit (x) bath1 (x) bath2,
diagonalize it once with a dense Hermitian eigensolver, evolve

    rho(0) = rho_S(0) (x) 1/2^N (x) 1/2^N,

and partial-trace both baths.  Memory scales as D^2, so builds are refused
above a configurable bath-size cap (default N = 4, i.e. D = 512; N = 6 with
D = 8192 is reachable only by explicitly raising the cap).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dynamics import BlochTrajectory, TimeGrid
from .errors import ConfigError, DimensionCapError, OracleError
from .model import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    InitialStateAngles,
    QubitDensity,
    SystemConfig,
    initial_density,
    validate_config,
)

# Build refusal beyond this is a hard non-goal, not a tunable.
_ABSOLUTE_MAX_BATH = 6


@dataclass(frozen=True)
class OracleLimits:
    """Cap on the per-bath spin count accepted by the dense builder."""

    max_bath_size: int = 4

    def __post_init__(self) -> None:
        if not isinstance(self.max_bath_size, int) or self.max_bath_size < 1:
            raise ConfigError("max_bath_size must be an integer >= 1")
        if self.max_bath_size > _ABSOLUTE_MAX_BATH:
            raise ConfigError(
                f"max_bath_size may not exceed {_ABSOLUTE_MAX_BATH}"
            )

    def check(self, bath_size: int) -> None:
        if bath_size > self.max_bath_size:
            dim = 2 * 4**bath_size
            raise DimensionCapError(
                f"bath_size {bath_size} exceeds cap {self.max_bath_size}"
                f" (full dimension would be {dim}); raise max_bath_size"
                " explicitly to override"
            )


@dataclass(frozen=True)
class HermitianOperator:
    """Dense Hermitian matrix on the qubit (x) bath1 (x) bath2 ordering."""

    matrix: np.ndarray
    bath_size: int

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        dim = 2 * 4**self.bath_size
        if m.shape != (dim, dim):
            raise ConfigError(f"operator must have shape ({dim}, {dim})")
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise ConfigError("operator not Hermitian within 1e-10")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _collective(single: np.ndarray, n_spins: int) -> np.ndarray:
    """sum_k 1 (x) ... (x) single_k (x) ... (x) 1 over n_spins sites."""
    dim = 2**n_spins
    total = np.zeros((dim, dim), dtype=complex)
    for k in range(n_spins):
        op = np.eye(2**k, dtype=complex)
        op = np.kron(op, single)
        op = np.kron(op, np.eye(2 ** (n_spins - k - 1), dtype=complex))
        total += op
    return total


def build_hamiltonian(
    config: SystemConfig, limits: OracleLimits | None = None
) -> HermitianOperator:
    """Assemble the full Hamiltonian as a dense Hermitian matrix."""
    validate_config(config)
    limits = limits or OracleLimits()
    limits.check(config.bath_size)
    n = config.bath_size
    bath_dim = 2**n
    eye_bath = np.eye(bath_dim, dtype=complex)
    coll_x = _collective(SIGMA_X / 2.0, n)
    coll_y = _collective(SIGMA_Y / 2.0, n)
    h = (config.omega / 2.0) * np.kron(SIGMA_Z, np.kron(eye_bath, eye_bath))
    h += (config.alpha1 / 2.0) * np.kron(SIGMA_X, np.kron(coll_x, eye_bath))
    h += (config.alpha2 / 2.0) * np.kron(SIGMA_Y, np.kron(eye_bath, coll_y))
    return HermitianOperator(matrix=h, bath_size=n)


@lru_cache(maxsize=8)
def _diagonalized(config: SystemConfig, max_bath_size: int):
    """One shared eigendecomposition per config (energies, vectors)."""
    ham = build_hamiltonian(config, OracleLimits(max_bath_size=max_bath_size))
    try:
        energies, vectors = np.linalg.eigh(ham.matrix)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - nump rarely fails
        raise OracleError(f"dense eigensolver failed: {exc}") from exc
    energies.setflags(write=False)
    vectors.setflags(write=False)
    return energies, vectors


def _reduced_at(
    energies: np.ndarray,
    vectors: np.ndarray,
    rho0_eig: np.ndarray,
    bath_dim: int,
    t: float,
) -> np.ndarray:
    """Partial trace of V e^{-iEt} rho0_eig e^{+iEt} V^dag over both baths."""
    phase = np.exp(-1.0j * energies * t)
    evolved_eig = (phase[:, None] * rho0_eig) * phase.conj()[None, :]
    rho_t = vectors @ evolved_eig @ vectors.conj().T
    full = rho_t.reshape(2, bath_dim, bath_dim, 2, bath_dim, bath_dim)
    return np.einsum("aijbij->ab", full)


def _prepared(config: SystemConfig, angles: InitialStateAngles, limits: OracleLimits):
    energies, vectors = _diagonalized(config, limits.max_bath_size)
    bath_dim = 2**config.bath_size
    eye_mixed = np.eye(bath_dim, dtype=complex) / bath_dim
    rho0 = np.kron(initial_density(angles).matrix, np.kron(eye_mixed, eye_mixed))
    rho0_eig = vectors.conj().T @ rho0 @ vectors
    return energies, vectors, rho0_eig, bath_dim


def evolve_reduced(
    config: SystemConfig,
    angles: InitialStateAngles,
    t: float,
    limits: OracleLimits | None = None,
) -> QubitDensity:
    """Exact reduced qubit density matrix at time t >= 0."""
    if not (isinstance(t, (int, float)) and math.isfinite(t)) or t < 0.0:
        raise ConfigError("t must be finite and >= 0")
    limits = limits or OracleLimits()
    energies, vectors, rho0_eig, bath_dim = _prepared(config, angles, limits)
    reduced = _reduced_at(energies, vectors, rho0_eig, bath_dim, float(t))
    # Symmetrize away eigensolver round-off before validation.
    reduced = (reduced + reduced.conj().T) / 2.0
    return QubitDensity(reduced)


def oracle_trajectory(
    config: SystemConfig,
    angles: InitialStateAngles,
    grid: TimeGrid,
    limits: OracleLimits | None = None,
) -> BlochTrajectory:
    """Exact reduced Bloch trajectory, reusing one eigendecomposition."""
    limits = limits or OracleLimits()
    energies, vectors, rho0_eig, bath_dim = _prepared(config, angles, limits)
    times = grid.times()
    pts = np.empty((times.size, 3))
    for i, t in enumerate(times):
        reduced = _reduced_at(energies, vectors, rho0_eig, bath_dim, float(t))
        pts[i, 0] = np.trace(reduced @ SIGMA_X).real
        pts[i, 1] = np.trace(reduced @ SIGMA_Y).real
        pts[i, 2] = np.trace(reduced @ SIGMA_Z).real
    return BlochTrajectory(grid=grid, points=pts, config=config, initial=angles)


__all__ = [
    "HermitianOperator",
    "OracleLimits",
    "build_hamiltonian",
    "evolve_reduced",
    "oracle_trajectory",
]
