"""Discrete inner products, pencil assembly, Newton-basis L2 Gramians."""

import numpy as np
import pytest

from mercereig import (
    BrownianBridgeKernel,
    MaternKernel,
    SingularConfigurationError,
    assemble_pencil,
    discrete_inner,
    disk_grid,
    empty_basis,
    greedy_select,
    newton_extend,
    newton_l2_gramian,
    random_interval_points,
)


def bridge_closed_form(x, y):
    return np.minimum(x, y) - x * y


class TestDiscreteInner:
    def test_constant_on_disk(self):
        quad = disk_grid(400)
        ones = np.ones(quad.size)
        assert discrete_inner(ones, ones, quad) == pytest.approx(np.pi, rel=1e-15)

    def test_constant_on_interval(self):
        quad = random_interval_points(250, seed=0)
        ones = np.ones(quad.size)
        assert discrete_inner(ones, ones, quad) == pytest.approx(1.0, rel=1e-15)

    def test_sine_orthogonality(self):
        quad = random_interval_points(10_000, seed=2)
        x = quad.points[:, 0]
        val = discrete_inner(np.sin(np.pi * x), np.sin(2 * np.pi * x), quad)
        assert abs(val) < 0.02

    def test_length_mismatch(self):
        quad = random_interval_points(10, seed=0)
        with pytest.raises(ValueError):
            discrete_inner(np.ones(10), np.ones(9), quad)


class TestAssemblePencil:
    def test_single_point_exact(self, bb_rough):
        quad = random_interval_points(50, seed=0)
        pair = assemble_pencil(bb_rough, [[0.5]], quad, mode="exact")
        assert pair.A[0, 0] == pytest.approx(0.25, abs=3e-5)
        t = np.linspace(0.0, 1.0, 200_001)
        oracle = np.trapezoid(bridge_closed_form(0.5, t) ** 2, t)
        assert pair.B[0, 0] == pytest.approx(oracle, rel=1e-8)
        assert pair.provenance == "exact_expansion"

    def test_single_point_discrete_definition(self, bb_rough):
        quad = random_interval_points(300, seed=1)
        x = 0.37
        pair = assemble_pencil(bb_rough, [[x]], quad, mode="discrete")
        brute = quad.weight * sum(bb_rough(q, x) ** 2 for q in quad.points[:, 0])
        assert pair.B[0, 0] == pytest.approx(brute, rel=1e-12)

    def test_discrete_b_is_weighted_cross_product(self):
        kernel = MaternKernel(1)
        quad = disk_grid(60)
        selected = quad.points[[3, 17, 40]]
        pair = assemble_pencil(kernel, selected, quad, mode="discrete")
        C = kernel.pairwise(selected, quad.points)
        brute = quad.weight * np.array(
            [[np.sum(C[i] * C[k]) for k in range(3)] for i in range(3)]
        )
        assert np.allclose(pair.B, brute, rtol=1e-13)

    def test_exact_vs_discrete_entrywise(self, bb_rough):
        quad = random_interval_points(500, seed=4)
        selected = quad.points[[50, 250, 450]]
        exact = assemble_pencil(bb_rough, selected, quad, mode="exact").B
        disc = assemble_pencil(bb_rough, selected, quad, mode="discrete").B
        assert np.max(np.abs(exact - disc)) <= 5e-3

    def test_exact_b_against_fine_trapezoid(self, bb_rough):
        selected = np.array([[0.2], [0.55], [0.9]])
        pair = assemble_pencil(bb_rough, selected, None, mode="exact")
        t = np.linspace(0.0, 1.0, 1_000_001)
        for i in range(3):
            for k in range(3):
                prod = bridge_closed_form(selected[i, 0], t) * bridge_closed_form(t, selected[k, 0])
                assert pair.B[i, k] == pytest.approx(np.trapezoid(prod, t), abs=1e-8)

    def test_matrices_exactly_symmetric(self):
        kernel = MaternKernel(2, scale=3.0)
        quad = disk_grid(150)
        pair = assemble_pencil(kernel, quad.points[::30], quad, mode="discrete")
        assert np.array_equal(pair.A, pair.A.T)
        assert np.array_equal(pair.B, pair.B.T)

    def test_duplicate_point_raises_with_minor_index(self, bb_rough):
        quad = random_interval_points(50, seed=0)
        with pytest.raises(SingularConfigurationError) as err:
            assemble_pencil(bb_rough, [[0.3], [0.7], [0.3]], quad, mode="discrete")
        assert err.value.minor_index == 3

    def test_exact_mode_needs_expansion_kernel(self):
        with pytest.raises(ValueError):
            assemble_pencil(MaternKernel(1), [[0.0, 0.0]], disk_grid(10), mode="exact")


class TestNewtonGramian:
    def test_single_function_norm(self, bb_rough):
        quad = random_interval_points(200, seed=3)
        basis = newton_extend(empty_basis(bb_rough, quad), 100)
        pair = assemble_pencil(bb_rough, basis.points, quad, mode="exact")
        G = newton_l2_gramian(basis, quad, mode="exact")
        assert G[0, 0] == pytest.approx(pair.B[0, 0] / pair.A[0, 0], rel=1e-12)

    def test_trace_equals_quadrature_of_projected_diagonal(self, bb_rough):
        quad = random_interval_points(150, seed=5)
        basis = greedy_select(bb_rough, quad, 12, criterion="linf")
        G = newton_l2_gramian(basis, quad, mode="discrete")
        diag = bb_rough.diagonal(quad.points)
        assert np.trace(G) == pytest.approx(
            quad.weight * np.sum(diag - basis.residual), rel=1e-10
        )

    def test_exact_vs_discrete_frobenius_under_refinement(self, bb_rough):
        candidates = random_interval_points(500, seed=6)
        basis = greedy_select(bb_rough, candidates, 20, criterion="linf")
        exact = newton_l2_gramian(basis, candidates, mode="exact")

        def rel_err(m):
            quad = random_interval_points(m, seed=7)
            disc = newton_l2_gramian(basis, quad, mode="discrete")
            return np.linalg.norm(disc - exact) / np.linalg.norm(exact)

        coarse, fine = rel_err(10_000), rel_err(40_000)
        # Monte Carlo quadrature error ~ m^(-1/2): measured 1.6e-2 at 1e4.
        assert coarse <= 2.5e-2
        assert fine <= 1e-2
        assert fine < coarse

    def test_exact_gramian_positive_semidefinite(self, bb_greedy_100):
        _, gram = bb_greedy_100
        w = np.linalg.eigvalsh(gram)
        assert w.min() >= -1e-14 * w.max()


def test_matrix_csv_export_roundtrips(tmp_path):
    from mercereig.gramians import export_matrix_csv

    M = np.array([[1.5, np.pi, -0.25], [np.pi, 2.25, 1e-17]])
    path = export_matrix_csv(M, tmp_path / "gramian.csv")
    back = np.array(
        [[float(v) for v in line.split(",")] for line in path.read_text().splitlines()]
    )
    assert np.array_equal(back, M)
