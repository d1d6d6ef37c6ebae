import math

import numpy as np
import pytest

from ultrashort.fd_solver import (
    ConvergenceError, Grid, GridAlignmentError, GridConfig, Tridiagonal, build_hamiltonian,
    default_tolerance, eigenvector, lowest_eigenvalues, solve_bound_states, sturm_count,
)
from ultrashort.oracles import square_well_states, transfer_matrix_states
from ultrashort.potentials import Potential, square_well
from ultrashort.units import ELECTRON

C = ELECTRON.hbar2_over_2m
DX = 5.0
DEPTH_V0_1 = C / DX**2  # v0 = 1


def v0_one_oracle():
    return square_well_states(DEPTH_V0_1, DX)[0]


def fd_v0_one(cells, pad_over_k):
    s = v0_one_oracle()
    return solve_bound_states(square_well(DEPTH_V0_1, DX),
                              config=GridConfig(n=None, pad=pad_over_k / s.k, points_per_dx=cells))


# -- tridiagonal primitives ------------------------------------------------------

def test_two_by_two_closed_form():
    a, b = 3.0, 0.7
    tri = Tridiagonal(np.array([a, a]), np.array([-b]))
    np.testing.assert_allclose(lowest_eigenvalues(tri, 2, 1e-14), [a - b, a + b], atol=1e-13)


def test_lowest_eigenvalues_matches_dense():
    rng = np.random.default_rng(3)
    d, e = rng.normal(size=40), rng.normal(size=39)
    dense = np.linalg.eigvalsh(np.diag(d) + np.diag(e, 1) + np.diag(e, -1))
    tri = Tridiagonal(d, e)
    np.testing.assert_allclose(lowest_eigenvalues(tri, 40, 1e-13), dense, atol=1e-12)
    for sigma in (-1.0, 0.0, 0.5):
        assert sturm_count(tri, sigma) == int(np.sum(dense < sigma))


def test_lowest_eigenvalues_rejects_bad_arguments():
    tri = Tridiagonal(np.array([1.0, 2.0]), np.array([0.1]))
    for count, tol in [(0, 1e-12), (3, 1e-12), (1, 0.0)]:
        with pytest.raises(ValueError):
            lowest_eigenvalues(tri, count, tol)


def test_eigenvector_converged_and_signed():
    rng = np.random.default_rng(5)
    d, e = rng.normal(size=30), rng.normal(size=29)
    tri = Tridiagonal(d, e)
    dense_vals, dense_vecs = np.linalg.eigh(np.diag(d) + np.diag(e, 1) + np.diag(e, -1))
    E = lowest_eigenvalues(tri, 1, 1e-14)[0]
    v = eigenvector(tri, E)
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-14)
    assert v[np.argmax(np.abs(v))] > 0
    assert abs(np.dot(v, dense_vecs[:, 0])) == pytest.approx(1.0, abs=1e-10)
    np.testing.assert_array_equal(v, eigenvector(tri, E))


def test_eigenvector_nonconvergence_reports_residual():
    # two nearly degenerate eigenvalues: the shift sits between them and iteration stalls
    tri = Tridiagonal(np.array([1.0, 1.0 + 1e-3]), np.array([0.0]))
    with pytest.raises(ConvergenceError) as info:
        eigenvector(tri, 1.0005, max_iter=3, tol=1e-15)
    assert info.value.residual > 0


# -- Hamiltonian ------------------------------------------------------------------

def test_zero_potential_operator():
    g = Grid(-5.0, 10.0, 301)
    tri = build_hamiltonian(Potential([(5.0, 0.0)]), g)
    np.testing.assert_allclose(tri.diag, 2 * C / g.h**2, rtol=1e-15)
    np.testing.assert_allclose(tri.off, -C / g.h**2, rtol=1e-15)
    assert sturm_count(tri, 0.0) == 0
    assert lowest_eigenvalues(tri, 1)[0] > 0


def test_hamiltonian_samples_segments():
    p = Potential([(1.0, -0.3), (1.0, -0.1)])
    g = Grid.aligned(p.dx, 4, 1.0)
    tri = build_hamiltonian(p, g)
    U = tri.diag - 2 * C / g.h**2
    x = g.points[1:-1]
    expected = np.where((x > 0) & (x < 1), -0.3, np.where((x > 1) & (x < 2), -0.1, 0.0))
    expected[np.isclose(x, 0)] = -0.15
    expected[np.isclose(x, 1)] = -0.2
    expected[np.isclose(x, 2)] = -0.05
    np.testing.assert_allclose(U, expected, atol=1e-14)


def test_misaligned_grid_rejected():
    p = square_well(0.1, 1.0)
    with pytest.raises(GridAlignmentError):
        build_hamiltonian(p, Grid(-1.05, 2.0, 31))
    with pytest.raises(GridAlignmentError):
        build_hamiltonian(p, Grid(0.0, 2.0, 21))
    with pytest.raises(GridAlignmentError):
        solve_bound_states(p, config=GridConfig(n=30, pad=1.05))


def test_grid_invariants():
    with pytest.raises(ValueError):
        Grid(-1.0, 2.0, 2)
    with pytest.raises(ValueError):
        Grid(1.0, 1.0, 10)
    g = Grid.aligned(5.0, 100, 3.0)
    assert g.index_of(0.0) >= 1 and g.index_of(5.0) < g.n - 1
    assert g.h == pytest.approx(0.05, rel=1e-14)


# -- bound states ----------------------------------------------------------------

def test_zero_potential_no_states():
    assert solve_bound_states(Potential([(5.0, 0.0)])) == []


def test_v0_one_against_oracle():
    s = v0_one_oracle()
    states = fd_v0_one(200, 8.0)
    assert len(states) == 1
    assert states[0].energy == pytest.approx(s.energy, rel=1e-4)
    assert states[0].p_inside == pytest.approx(s.p_inside, abs=1e-4)


def test_second_order_convergence():
    exact = v0_one_oracle().energy
    errors = [abs(fd_v0_one(cells, 10.0)[0].energy / exact - 1) for cells in (50, 100, 200, 400)]
    ratios = [a / b for a, b in zip(errors, errors[1:])]
    assert all(3.5 <= r <= 4.5 for r in ratios), ratios


def test_domain_insensitivity():
    s = v0_one_oracle()
    p = square_well(DEPTH_V0_1, DX)
    base = solve_bound_states(p, config=GridConfig(pad=8 / s.k * 1.25))[0].energy
    wide = solve_bound_states(p, config=GridConfig(pad=16 / s.k * 1.25))[0].energy
    assert abs(wide / base - 1) <= 1e-8


def test_default_config_padding_adapts_to_shallow_state():
    s = v0_one_oracle()
    st = solve_bound_states(square_well(DEPTH_V0_1, DX))[0]
    assert -st.x[0] >= 10 / s.k
    assert st.energy == pytest.approx(s.energy, rel=1e-4)


def test_sturm_consistency_and_ordering():
    p = Potential([(1.0, -0.4), (0.5, 0.2), (2.0, -0.1), (0.7, -0.6)])
    states = solve_bound_states(p)
    tm = transfer_matrix_states(p)
    assert len(states) == len(tm)
    assert all(a.energy < b.energy for a, b in zip(states, states[1:]))
    for a, b in zip(states, tm):
        assert a.energy == pytest.approx(b.energy, rel=1e-3)


def test_eigenvector_properties_multistate():
    depth = 40 * C / DX**2
    states = solve_bound_states(square_well(depth, DX))
    assert len(states) == len(square_well_states(depth, DX))
    h = states[0].x[1] - states[0].x[0]
    for s in states:
        assert np.trapezoid(s.samples**2, dx=h) == pytest.approx(1.0, abs=1e-8)
    for a in states:
        for b in states:
            if a.index < b.index:
                assert abs(np.trapezoid(a.samples * b.samples, dx=h)) <= 1e-8


def test_ground_state_parity_and_no_nodes():
    st = solve_bound_states(square_well(30 * C / DX**2, DX))[0]
    x, psi = st.x, st.samples
    centre = DX / 2
    mirrored = np.interp(2 * centre - x, x, psi)
    inside = np.abs(x - centre) < -x[0]
    assert np.max(np.abs(psi[inside] - mirrored[inside])) <= 1e-6
    core = psi[np.abs(psi) > 1e-12]
    assert np.all(core > 0)


def test_operator_residual():
    p = square_well(30 * C / DX**2, DX)
    cfg = GridConfig()
    states = solve_bound_states(p, config=cfg)
    x = states[0].x
    tri = build_hamiltonian(p, Grid(x[0], x[-1], len(x)))
    tol = default_tolerance(tri)
    for s in states:
        v = s.samples[1:-1]
        Hv = tri.diag * v
        Hv[:-1] += tri.off * v[1:]
        Hv[1:] += tri.off * v[:-1]
        assert np.linalg.norm(Hv - s.energy * v) / np.linalg.norm(v) <= 10 * tol


def test_k_fit_within_one_percent():
    for depth in [DEPTH_V0_1, 30 * C / DX**2]:
        for s in solve_bound_states(square_well(depth, DX)):
            assert -s.x[0] > 8 / s.k
            assert s.k_fit == pytest.approx(s.k, rel=0.01)


def test_psi0_and_z():
    s = fd_v0_one(200, 10.0)[0]
    oracle = v0_one_oracle()
    assert s.z == pytest.approx(oracle.z, rel=1e-4)
    assert s.psi0**2 == pytest.approx(oracle.wavefunction(0.0) ** 2, rel=1e-3)
