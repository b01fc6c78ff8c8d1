"""Unit tests for the sector-sum reduced dynamics.

Oracles used here, independent of the implementation under test:
- single-sector rotations are cross-checked against a matrix exponential
  built by eigendecomposition of the Hermitian generator i*K (K the cross-
  product matrix), computed inside the test;
- the vectorized trajectory is cross-checked against a scalar loop that
  sums sector_rotation results with math.fsum weighting;
- the verbatim polarization transcription is cross-checked against the
  rotation-sum identity it must equal.
"""

import math

import numpy as np
import pytest

from frustra_gp import (
    BlochTrajectory,
    BlochVector,
    ConfigError,
    InitialStateAngles,
    SystemConfig,
    TimeGrid,
    bloch_at,
    bloch_trajectory,
    gamma_freq,
    initial_bloch,
    literal_points,
    literal_polarizations,
    rotation_matrices,
    sector_rotation,
    sector_weights,
    trajectory_batch,
)


def _random_config(rng, n_max=6):
    return SystemConfig(
        omega=float(rng.uniform(0.2, 2.5)),
        alpha1=float(rng.uniform(0.0, 2.0)),
        alpha2=float(rng.uniform(0.0, 2.0)),
        bath_size=int(rng.integers(1, n_max + 1)),
    )


def _random_angles(rng):
    return InitialStateAngles(
        theta=float(rng.uniform(0.0, math.pi)),
        phi=float(rng.uniform(0.0, 2.0 * math.pi)),
    )


def test_time_grid_validation():
    grid = TimeGrid(0.0, 2.0, 5)
    times = grid.times()
    assert times.shape == (5,)
    assert times[0] == 0.0 and times[-1] == 2.0
    assert grid.dt == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(ConfigError):
        TimeGrid(0.0, 0.0, 5)
    with pytest.raises(ConfigError):
        TimeGrid(0.0, 1.0, 1)
    with pytest.raises(ConfigError):
        TimeGrid(0.0, math.inf, 5)


def test_gamma_freq_frozen():
    cfg = SystemConfig(omega=2.0, alpha1=1.0, alpha2=0.5, bath_size=4)
    # sqrt(4 + 1*4 + 0.25*1) at (m1, m2) = (2, 1)
    assert gamma_freq(cfg, 2.0, 1.0) == pytest.approx(math.sqrt(8.25), abs=1e-15)
    assert gamma_freq(cfg, 0.0, 0.0) == pytest.approx(2.0, abs=1e-15)


def test_sector_rotation_quarter_turn_frozen():
    # pure Larmor sector: +y rotates to -x after a quarter period
    cfg = SystemConfig(omega=1.0, alpha1=0.0, alpha2=0.0, bath_size=1)
    v = sector_rotation(BlochVector(0.0, 1.0, 0.0), cfg, 0.0, 0.0, math.pi / 2)
    assert np.allclose(v.as_array(), [-1.0, 0.0, 0.0], atol=1e-15)


def test_sector_rotation_full_period_returns_start():
    rng = np.random.default_rng(7)
    for _ in range(5):
        cfg = _random_config(rng)
        m1 = float(rng.integers(-2, 3)) / 2.0
        m2 = float(rng.integers(-2, 3)) / 2.0
        gamma = gamma_freq(cfg, m1, m2)
        v0 = initial_bloch(_random_angles(rng))
        v = sector_rotation(v0, cfg, m1, m2, 2.0 * math.pi / gamma)
        assert np.max(np.abs(v.as_array() - v0.as_array())) < 1e-12


def test_sector_rotation_matches_eigendecomposition_oracle():
    rng = np.random.default_rng(13)
    for _ in range(10):
        cfg = _random_config(rng)
        m1 = float(rng.integers(-4, 5)) / 2.0
        m2 = float(rng.integers(-4, 5)) / 2.0
        t = float(rng.uniform(0.0, 8.0))
        b = np.array([cfg.alpha1 * m1, cfg.alpha2 * m2, cfg.omega])
        gamma = np.linalg.norm(b)
        n = b / gamma
        # R = expm(t * Gamma * K) via eigh of the Hermitian i*K
        k = np.array(
            [[0.0, -n[2], n[1]], [n[2], 0.0, -n[0]], [-n[1], n[0], 0.0]]
        )
        evals, evecs = np.linalg.eigh(1j * k)
        rot = (evecs * np.exp(-1j * gamma * t * evals)) @ evecs.conj().T
        v0 = initial_bloch(_random_angles(rng))
        expected = np.real(rot @ v0.as_array())
        got = sector_rotation(v0, cfg, m1, m2, t).as_array()
        assert np.max(np.abs(got - expected)) < 1e-12


def test_trajectory_starts_at_initial_bloch():
    rng = np.random.default_rng(3)
    for _ in range(5):
        cfg = _random_config(rng)
        ang = _random_angles(rng)
        traj = bloch_trajectory(cfg, ang, TimeGrid(0.0, 3.0, 7))
        assert np.max(np.abs(traj.points[0] - initial_bloch(ang).as_array())) < 1e-14


def test_bloch_at_matches_scalar_sector_sum():
    rng = np.random.default_rng(29)
    for _ in range(6):
        cfg = _random_config(rng, n_max=4)
        ang = _random_angles(rng)
        t = float(rng.uniform(0.0, 10.0))
        ladder = sector_weights(cfg.bath_size)
        v0 = initial_bloch(ang)
        acc = [[], [], []]
        for s1 in ladder:
            for s2 in ladder:
                rotated = sector_rotation(v0, cfg, s1.m, s2.m, t).as_array()
                weight = s1.w * s2.w
                for axis in range(3):
                    acc[axis].append(weight * rotated[axis])
        expected = np.array([math.fsum(parts) for parts in acc])
        got = bloch_at(cfg, ang, t).as_array()
        assert np.max(np.abs(got - expected)) < 1e-13


def test_bloch_at_rejects_negative_time():
    cfg = SystemConfig(omega=1.0, alpha1=0.0, alpha2=0.0, bath_size=1)
    with pytest.raises(ConfigError):
        bloch_at(cfg, InitialStateAngles(theta=1.0), -0.5)


def test_norm_contraction():
    rng = np.random.default_rng(47)
    for _ in range(10):
        cfg = _random_config(rng)
        ang = _random_angles(rng)
        traj = bloch_trajectory(cfg, ang, TimeGrid(0.0, 12.0, 101))
        norms = np.linalg.norm(traj.points, axis=1)
        assert norms.max() <= 1.0 + 1e-12


def test_unitary_limit_preserves_norm():
    cfg = SystemConfig(omega=1.7, alpha1=0.0, alpha2=0.0, bath_size=3)
    traj = bloch_trajectory(cfg, InitialStateAngles(theta=0.8, phi=1.0), TimeGrid(0.0, 9.0, 301))
    norms = np.linalg.norm(traj.points, axis=1)
    assert np.max(np.abs(norms - 1.0)) < 1e-13


def test_rotation_matrices_contractive_and_identity_at_zero():
    rng = np.random.default_rng(11)
    cfg = _random_config(rng)
    times = np.linspace(0.0, 8.0, 25)
    mats = rotation_matrices(cfg, times)
    assert np.max(np.abs(mats[0] - np.eye(3))) < 1e-14
    spectral = np.linalg.svd(mats, compute_uv=False)[:, 0]
    assert spectral.max() <= 1.0 + 1e-12


def test_trajectory_batch_matches_single():
    rng = np.random.default_rng(59)
    cfg = _random_config(rng, n_max=4)
    times = np.linspace(0.0, 6.0, 40)
    angles = [_random_angles(rng) for _ in range(5)]
    v0s = np.array([initial_bloch(a).as_array() for a in angles])
    batch = trajectory_batch(cfg, v0s, times)
    for idx, ang in enumerate(angles):
        grid = TimeGrid(0.0, 6.0, 40)
        single = bloch_trajectory(cfg, ang, grid).points
        assert np.max(np.abs(batch[idx] - single)) < 1e-13


def test_single_x_bath_map_commutes_with_half_turn_about_z():
    # sectors at +/-m pair up, so the reduced map commutes with
    # diag(-1, -1, 1) whenever only one bath couples
    cfg = SystemConfig(omega=2.0, alpha1=0.9, alpha2=0.0, bath_size=3)
    s = np.diag([-1.0, -1.0, 1.0])
    times = np.linspace(0.0, 11.0, 17)
    for m in rotation_matrices(cfg, times):
        assert np.max(np.abs(s @ m @ s - m)) < 1e-14


def test_literal_points_match_rotation_identity():
    # the printed component sums regroup exactly into -1/2 of the sector
    # rotation sum applied to the x-reflected start vector
    rng = np.random.default_rng(83)
    for _ in range(8):
        cfg = _random_config(rng)
        ang = _random_angles(rng)
        times = np.linspace(0.0, 9.0, 33)
        lit = literal_points(cfg, ang, times)
        st, ct = math.sin(ang.theta), math.cos(ang.theta)
        u0 = np.array([st * math.sin(ang.phi), st * math.cos(ang.phi), ct])
        expected = -0.5 * np.einsum("nij,j->ni", rotation_matrices(cfg, times), u0)
        assert np.max(np.abs(lit - expected)) < 1e-12


def test_literal_initial_norm_is_half():
    cfg = SystemConfig(omega=2.0, alpha1=0.5, alpha2=0.5, bath_size=3)
    rng = np.random.default_rng(97)
    for _ in range(5):
        ang = _random_angles(rng)
        lit = literal_polarizations(cfg, ang, 0.0).as_array()
        assert np.linalg.norm(lit) == pytest.approx(0.5, abs=1e-15)


def test_trajectory_validation():
    cfg = SystemConfig(omega=1.0, alpha1=0.0, alpha2=0.0, bath_size=1)
    grid = TimeGrid(0.0, 1.0, 3)
    with pytest.raises(ConfigError):
        BlochTrajectory(grid=grid, points=np.zeros((4, 3)), config=cfg)  # wrong length
    bad_norm = np.array([[0.0, 1.0, 0.0], [0.0, 1.4, 0.0], [0.0, 1.0, 0.0]])
    with pytest.raises(ConfigError):
        BlochTrajectory(grid=grid, points=bad_norm, config=cfg)
    mixed_start = np.array([[0.0, 0.5, 0.0], [0.0, 0.5, 0.0], [0.0, 0.5, 0.0]])
    with pytest.raises(ConfigError):
        BlochTrajectory(grid=grid, points=mixed_start, config=cfg)
