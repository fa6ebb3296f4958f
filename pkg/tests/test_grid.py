import numpy as np
import pytest

from kolmogorov_swr.grid import GridConfig, build_grid


def test_base_mesh_counts():
    g = build_grid(GridConfig(T=2, overlap_elems=3))
    assert (g.n_t, g.n_x, g.n_v_total) == (200, 100, 200)
    assert g.interface_beta - g.interface_alpha == pytest.approx(0.03, abs=1e-15)
    assert g.interface_alpha == 0.0
    assert g.idx_alpha + 3 == g.idx_beta


def test_non_overlapping_single_interface():
    g = build_grid(GridConfig(overlap_elems=0))
    assert g.idx_alpha == g.idx_beta
    assert g.interface_alpha == g.interface_beta == 0.0


def test_refinement_level_two_steps():
    g = build_grid(GridConfig(refine_level=2))
    assert (g.dt, g.hx, g.hv) == (0.0025, 0.0025, 0.0025)
    assert (g.n_t, g.n_x, g.n_v_total) == (800, 400, 800)


def test_node_layout():
    g = build_grid(GridConfig(T=1, dt=0.1, hx=0.25, hv=0.5, overlap_elems=1))
    np.testing.assert_allclose(g.x_nodes, [0, 0.25, 0.5, 0.75])
    np.testing.assert_allclose(g.v_nodes, [-1, -0.5, 0, 0.5, 1])
    np.testing.assert_allclose(g.t_nodes, np.arange(11) * 0.1)


@pytest.mark.parametrize("j", [0, 1, 2])
def test_refined_grids_nest(j):
    coarse = build_grid(GridConfig(refine_level=j))
    fine = build_grid(GridConfig(refine_level=j + 1))
    for a, b in ((coarse.t_nodes, fine.t_nodes), (coarse.x_nodes, fine.x_nodes),
                 (coarse.v_nodes, fine.v_nodes)):
        np.testing.assert_allclose(a, b[::2], atol=1e-13)


@pytest.mark.parametrize("overlap", [0, 1, 3, 7])
def test_subdomains_cover_velocity_axis(overlap):
    g = build_grid(GridConfig(overlap_elems=overlap))
    (a0, a1), (b0, b1) = g.omega1, g.omega2
    assert a0 == 0 and b1 == g.n_v_total
    assert b0 <= a1  # union is everything
    assert a1 - b0 == overlap


def test_v_nodes_symmetric():
    g = build_grid(GridConfig(refine_level=1))
    np.testing.assert_array_equal(g.v_nodes, -g.v_nodes[::-1])


@pytest.mark.parametrize(
    "cfg",
    [
        GridConfig(hx=0.03),  # 1/hx not an integer
        GridConfig(hv=0.3),  # 2/hv not an integer
        GridConfig(T=2.005),  # T/dt not an integer
        GridConfig(hv=0.1, overlap_elems=10),  # band reaches v = 1
        GridConfig(hv=0.4),  # v = 0 is not a node
    ],
)
def test_invalid_configs_rejected(cfg):
    with pytest.raises(ValueError):
        build_grid(cfg)


def test_negative_values_rejected():
    with pytest.raises(ValueError):
        GridConfig(dt=-0.01)
    with pytest.raises(ValueError):
        GridConfig(overlap_elems=-1)
