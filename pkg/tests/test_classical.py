import numpy as np
import pytest

import flowquant as fq


@pytest.fixture(scope="module")
def limit_packet(params):
    grid = fq.Grid1D(-30.0, 60.0 / 2048, 2048)
    return fq.gaussian_packet(grid, params, 0.0, 1.0, 0.5)


@pytest.fixture(scope="module")
def limit_ensemble(params):
    # matches the limit packet's moments: sigma_x = 1, sigma_p = 0.5
    return fq.gaussian_ensemble(params, 0.0, 1.0, 1.0, 0.5, 1_000_000, seed=7)


P_EDGES = np.linspace(-2.0, 4.0, 97)


def test_ensemble_validation(params):
    with pytest.raises(ValueError):
        fq.PhaseSpaceEnsemble(np.zeros(4), np.zeros(4), np.full(4, 0.3), params)
    with pytest.raises(ValueError):
        fq.PhaseSpaceEnsemble(np.zeros(4), np.zeros(3), np.full(4, 0.25), params)


def test_evolve_identity(limit_ensemble):
    same = fq.evolve_ensemble(limit_ensemble, 0.0)
    assert np.array_equal(same.x, limit_ensemble.x)
    assert np.array_equal(same.p, limit_ensemble.p)


def test_evolve_single_sample(params):
    e = fq.PhaseSpaceEnsemble(np.array([1.0]), np.array([2.0]), np.array([1.0]),
                              params)
    moved = fq.evolve_ensemble(e, 3.0)
    assert moved.x[0] == 7.0
    assert moved.p[0] == 2.0


def test_evolve_group_action(limit_ensemble):
    a = fq.evolve_ensemble(fq.evolve_ensemble(limit_ensemble, 2.0), 3.0)
    b = fq.evolve_ensemble(limit_ensemble, 5.0)
    assert np.abs(a.x - b.x).max() <= 1e-12 * (1.0 + np.abs(b.x).max())


def test_momentum_marginal_invariant(limit_ensemble):
    x_edges = np.linspace(-500.0, 500.0, 41)
    before = fq.marginals(limit_ensemble, x_edges, P_EDGES)
    after = fq.marginals(fq.evolve_ensemble(limit_ensemble, 37.0), x_edges, P_EDGES)
    assert np.abs(before.mu.masses - after.mu.masses).max() <= 1e-12


def test_marginals_product_gaussian(params):
    n = 200_000
    e = fq.gaussian_ensemble(params, 1.0, 2.0, -0.5, 0.7, n, seed=42)
    x_edges = np.linspace(-15.0, 17.0, 129)
    p_edges = np.linspace(-6.0, 5.0, 129)
    m = fq.marginals(e, x_edges, p_edges)
    assert abs(m.rho.masses.sum() - 1.0) <= 1e-12
    assert abs(m.mu.masses.sum() - 1.0) <= 1e-12
    mean_x = float(np.sum(m.rho.centers * m.rho.masses))
    mean_p = float(np.sum(m.mu.centers * m.mu.masses))
    assert abs(mean_x - 1.0) <= 3.0 * 2.0 / np.sqrt(n)
    assert abs(mean_p + 0.5) <= 3.0 * 0.7 / np.sqrt(n)


def test_marginals_point_ensemble(params):
    e = fq.PhaseSpaceEnsemble(np.full(8, 0.5), np.full(8, 1.5),
                              np.full(8, 0.125), params)
    m = fq.marginals(e, np.linspace(0.0, 1.0, 11), np.linspace(1.0, 2.0, 11))
    assert np.count_nonzero(m.rho.masses) == 1
    assert np.count_nonzero(m.mu.masses) == 1


def test_marginals_range_check(params):
    e = fq.gaussian_ensemble(params, 0.0, 1.0, 0.0, 1.0, 1000, seed=1)
    with pytest.raises(fq.BinRangeTooSmall):
        fq.marginals(e, np.linspace(-1.0, 1.0, 11), np.linspace(-50.0, 50.0, 11))


# -------------------------------------------------- classical limit formula

def test_momentum_from_position_limit_reference(limit_ensemble):
    mu = np.histogram(limit_ensemble.p, bins=P_EDGES, weights=limit_ensemble.w)[0]
    h = fq.momentum_from_position_limit(limit_ensemble, 0.0, 200.0, P_EDGES)
    assert float(np.sum(np.abs(h.masses - mu))) <= 0.02


def test_momentum_from_position_limit_monotone(limit_ensemble):
    mu = np.histogram(limit_ensemble.p, bins=P_EDGES, weights=limit_ensemble.w)[0]
    errors = []
    for t in (20.0, 50.0, 100.0, 200.0):
        h = fq.momentum_from_position_limit(limit_ensemble, 0.0, t, P_EDGES)
        errors.append(float(np.sum(np.abs(h.masses - mu))))
    assert all(errors[i + 1] <= errors[i] for i in range(len(errors) - 1))


def test_momentum_from_position_limit_point(params):
    e = fq.PhaseSpaceEnsemble(np.zeros(16), np.full(16, 1.0),
                              np.full(16, 1.0 / 16.0), params)
    h = fq.momentum_from_position_limit(e, 0.0, 50.0, P_EDGES)
    assert np.count_nonzero(h.masses) == 1
    k = int(np.argmax(h.masses))
    assert h.edges[k] <= 1.0 <= h.edges[k + 1]


def test_quantum_momentum_limit_reference(limit_packet):
    # Parseval check needs bins covering essentially all momentum mass
    wide = fq.exact_momentum_histogram(limit_packet, np.linspace(-5.0, 7.0, 193))
    assert abs(wide.masses.sum() - 1.0) <= 1e-10
    exact = fq.exact_momentum_histogram(limit_packet, P_EDGES)
    h = fq.quantum_momentum_limit(limit_packet, 0.0, 200.0, P_EDGES)
    assert fq.l1_distance(h, exact) <= 0.02


def test_quantum_momentum_limit_converges(limit_packet):
    exact = fq.exact_momentum_histogram(limit_packet, P_EDGES)
    e200 = fq.l1_distance(
        fq.quantum_momentum_limit(limit_packet, 0.0, 200.0, P_EDGES), exact)
    e400 = fq.l1_distance(
        fq.quantum_momentum_limit(limit_packet, 0.0, 400.0, P_EDGES), exact)
    assert e400 < e200


def test_quantum_momentum_limit_box_overflow(limit_packet):
    small_box = fq.Grid1D(-60.0, 60.0 / 1024, 2048)
    with pytest.raises(fq.BoxOverflow):
        fq.quantum_momentum_limit(limit_packet, 0.0, 200.0, P_EDGES,
                                  box=small_box)


# ----------------------------------------------------- arrival-time oracle

def test_oracle_point_ensemble(params):
    e = fq.PhaseSpaceEnsemble(np.full(4, -50.0), np.full(4, 2.0),
                              np.full(4, 0.25), params)
    stats = fq.classical_arrival_oracle(e)
    assert stats.mean == 25.0
    assert stats.variance == 0.0


def test_oracle_reference_mean(params):
    e = fq.gaussian_ensemble(params, -50.0, 2.5, 2.0, 0.2, 1_000_000,
                             seed=20240601)
    stats = fq.classical_arrival_oracle(e)
    assert abs(stats.mean - 25.0) <= 0.02 * 25.0


def test_oracle_momentum_floor(params):
    e = fq.PhaseSpaceEnsemble(np.array([1.0, 2.0]), np.array([1e-9, 1.0]),
                              np.array([0.5, 0.5]), params)
    with pytest.raises(fq.MomentumFloorViolated):
        fq.classical_arrival_oracle(e)


def test_oracle_joint_flip(params):
    """The oriented arrival time is odd under (x, p) -> (-x, -p): the plain
    arrival time -m x / p is the even one."""
    e = fq.gaussian_ensemble(params, -50.0, 2.5, 2.0, 0.2, 100_000, seed=9)
    flipped = fq.PhaseSpaceEnsemble(-e.x, -e.p, e.w, params)
    a = fq.classical_arrival_oracle(e)
    b = fq.classical_arrival_oracle(flipped)
    assert abs(a.mean + b.mean) <= 1e-12 * abs(a.mean)
    plain_a = fq.classical_arrival_time(e.x, e.p, params.mass)
    plain_b = fq.classical_arrival_time(-e.x, -e.p, params.mass)
    assert np.array_equal(plain_a, plain_b)


def test_oracle_histogram(params):
    e = fq.gaussian_ensemble(params, -50.0, 2.5, 2.0, 0.2, 10_000, seed=3)
    stats = fq.classical_arrival_oracle(e, bins=np.linspace(0.0, 60.0, 61))
    assert stats.histogram is not None
    assert stats.histogram.masses.sum() <= 1.0 + 1e-12


def test_ensemble_from_packet_matches_moments(limit_packet, params):
    e = fq.ensemble_from_packet(limit_packet, 400_000, seed=11)
    assert abs(np.mean(e.x)) <= 3.0 / np.sqrt(400_000) * 1.0
    assert abs(np.mean(e.p) - 1.0) <= 3.0 * 0.5 / np.sqrt(400_000)
    assert abs(np.std(e.x) - 1.0) <= 0.01
    assert abs(np.std(e.p) - 0.5) <= 0.01
