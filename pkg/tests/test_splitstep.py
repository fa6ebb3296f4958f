import numpy as np
import pytest

from kolmogorov_swr.checks import check_conservation, check_linearity, check_max_principle, discrete_mass
from kolmogorov_swr.grid import GridConfig, build_grid
from kolmogorov_swr.splitstep import (
    BoundarySpec,
    CFLError,
    SubdomainSolver,
    dump_field,
    load_field_dump,
    parabolic_half_step,
    transport_step,
)

from test_linalg import simpson_fem_matrices


def dense_backward_euler(u, tau, hv, bc, trace):
    """Dense (M / tau + S) u* = M u / tau with the interface condition spliced in."""
    n = len(u)
    M, S = simpson_fem_matrices(n, hv)
    A = M / tau + S
    rhs = M @ u / tau
    k = 0 if bc.side == "low" else n - 1
    if bc.inner == "dirichlet":
        A[k] = 0.0
        A[k, k] = 1.0
        rhs[k] = trace
    elif bc.inner == "robin":
        A[k, k] += bc.coefficient
        rhs[k] += trace
    return np.linalg.solve(A, rhs)


@pytest.mark.parametrize("side", ["low", "high"])
def test_dirichlet_step_matches_dense_oracle(side):
    rng = np.random.default_rng(11)
    u = rng.normal(size=5)
    bc = BoundarySpec.dirichlet(side)
    got = parabolic_half_step(u[:, None], bc, np.array([0.0]), 0.005, 0.01)[:, 0]
    np.testing.assert_allclose(got, dense_backward_euler(u, 0.005, 0.01, bc, 0.0), atol=1e-10, rtol=0)
    # nonzero trace as well
    got = parabolic_half_step(u[:, None], bc, np.array([0.3]), 0.005, 0.01)[:, 0]
    np.testing.assert_allclose(got, dense_backward_euler(u, 0.005, 0.01, bc, 0.3), atol=1e-10, rtol=0)


@pytest.mark.parametrize("side", ["low", "high"])
def test_robin_step_matches_dense_oracle(side):
    rng = np.random.default_rng(12)
    u = rng.normal(size=9)
    bc = BoundarySpec.robin(side, 4.23)
    got = parabolic_half_step(u[:, None], bc, np.array([-0.7]), 0.01, 0.02)[:, 0]
    np.testing.assert_allclose(got, dense_backward_euler(u, 0.01, 0.02, bc, -0.7), atol=1e-10, rtol=0)


def test_neumann_step_matches_dense_oracle():
    rng = np.random.default_rng(13)
    u = rng.normal(size=(12, 3))
    got = parabolic_half_step(u, BoundarySpec.neumann(), None, 0.005, 0.01)
    for j in range(3):
        expected = dense_backward_euler(u[:, j], 0.005, 0.01, BoundarySpec.neumann(), 0.0)
        np.testing.assert_allclose(got[:, j], expected, atol=1e-10, rtol=0)


def test_robin_zero_coefficient_is_neumann():
    u = np.random.default_rng(1).normal(size=(20, 4))
    zero = np.zeros(4)
    robin = parabolic_half_step(u, BoundarySpec.robin("high", 0.0), zero, 0.005, 0.01)
    neumann = parabolic_half_step(u, BoundarySpec.neumann(), None, 0.005, 0.01)
    np.testing.assert_allclose(robin, neumann, atol=1e-14)


def test_constant_column_unchanged():
    u = np.full((30, 2), 2.5)
    out = parabolic_half_step(u, BoundarySpec.neumann(), None, 0.005, 0.01)
    np.testing.assert_allclose(out, u, rtol=1e-13)


def test_missing_trace_rejected():
    with pytest.raises(ValueError):
        parabolic_half_step(np.ones((4, 1)), BoundarySpec.dirichlet("low"), None, 0.1, 0.1)


def test_transport_zero_speed_row_unchanged():
    u = np.random.default_rng(2).normal(size=(3, 10))
    out = transport_step(u, 0.005, np.array([-0.5, 0.0, 0.5]), 0.01)
    np.testing.assert_array_equal(out[1], u[1])


def test_transport_unit_weight_is_periodic_shift():
    u = np.random.default_rng(3).normal(size=(2, 8))
    out = transport_step(u, 0.01, np.array([1.0, -1.0]), 0.01)
    np.testing.assert_allclose(out[0], np.roll(u[0], 1), rtol=0, atol=1e-15)
    np.testing.assert_allclose(out[1], np.roll(u[1], -1), rtol=0, atol=1e-15)


def test_transport_conserves_row_sums():
    rng = np.random.default_rng(4)
    v = np.linspace(-1, 1, 41)
    u = rng.uniform(-1, 1, size=(41, 100))
    out = transport_step(u, 0.005, v, 0.01)
    np.testing.assert_allclose(out.sum(axis=1), u.sum(axis=1), rtol=0, atol=1e-13)


def test_transport_cfl_violation_names_velocity():
    with pytest.raises(CFLError, match="v = -1"):
        transport_step(np.zeros((2, 4)), 0.02, np.array([-1.0, 0.0]), 0.01)


def test_zero_data_gives_zero_field(small_grid):
    g = small_grid
    solver = SubdomainSolver(g, g.omega1, BoundarySpec.robin("high", 2.0))
    field = solver.advance(None, np.zeros((g.n_t + 1, g.n_x)))
    assert not field.values.any()


def test_initial_level_is_initial_data(small_grid):
    g = small_grid
    u0 = np.random.default_rng(5).normal(size=(g.n_v_nodes, g.n_x))
    field = SubdomainSolver(g).advance(u0)
    np.testing.assert_array_equal(field.values[0], u0.T)
    assert field.values.shape == (g.n_t + 1, g.n_x, g.n_v_nodes)


def test_mass_conservation_200_steps():
    r = check_conservation(GridConfig(T=2.0))
    assert r.value <= 1e-10, r.line()


def test_mass_conservation_small(small_grid):
    g = small_grid
    u0 = np.random.default_rng(6).uniform(size=(g.n_v_nodes, g.n_x))
    mass = discrete_mass(SubdomainSolver(g).advance(u0).values, g.hv)
    np.testing.assert_allclose(mass, mass[0], rtol=0, atol=1e-11)


def test_max_principle():
    assert check_max_principle().passed


def test_linearity():
    assert check_linearity().value <= 1e-11


def test_column_permutation_invariance(small_grid):
    """The v-solve treats x-columns independently; only transport couples them."""
    g = small_grid
    rng = np.random.default_rng(7)
    u = rng.normal(size=(g.n_v_nodes, g.n_x))
    perm = rng.permutation(g.n_x)
    a = parabolic_half_step(u, BoundarySpec.neumann(), None, 0.01, g.hv)
    b = parabolic_half_step(u[:, perm], BoundarySpec.neumann(), None, 0.01, g.hv)
    np.testing.assert_array_equal(a[:, perm], b)


def test_cfl_checked_at_construction():
    g = build_grid(GridConfig(T=0.2, dt=0.04, hx=0.02, hv=0.02))
    SubdomainSolver(g)  # tau = dt / 2 gives weight exactly 1
    with pytest.raises(CFLError):
        SubdomainSolver(g, substep_full_dt=True)


@pytest.mark.parametrize("suffix", [".csv", ".bin"])
def test_dump_round_trip(tmp_path, small_grid, suffix):
    g = small_grid
    u0 = np.random.default_rng(8).normal(size=(g.n_v_nodes, g.n_x))
    field = SubdomainSolver(g, subdomain=0).advance(u0)
    path = tmp_path / f"field{suffix}"
    dump_field(field, path, steps=[0, 3, g.n_t])
    data, sub = load_field_dump(path)
    assert sub == 0
    np.testing.assert_array_equal(data, field.values[[0, 3, g.n_t]])
