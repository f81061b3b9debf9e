"""Discrete operator assembly: exact discrete-spectrum oracle on the closed
box, complex symmetry, the theta -> 1 limit and placement preconditions."""

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

import openbilliard as ob
from openbilliard.errors import LayerPlacement
from openbilliard.geometry import Region


def _discrete_box_spectrum(lx, ly, h, m_max, n_max):
    """Exact eigenvalues of the 5-point Laplacian on an lx x ly rectangle:
    (4/h^2)(sin^2(m pi h / 2 lx) + sin^2(n pi h / 2 ly))."""
    out = []
    for m in range(1, m_max + 1):
        for n in range(1, n_max + 1):
            out.append(
                (4 / h**2)
                * (np.sin(m * np.pi * h / (2 * lx)) ** 2
                   + np.sin(n * np.pi * h / (2 * ly)) ** 2)
            )
    return np.array(sorted(out))


class TestClosedBoxOracle:
    def test_spectrum_matches_exact_discrete_eigenvalues(self, geometry):
        grid = ob.build_grid(geometry, 0.05, include_guide=False)
        op = ob.assemble_unscaled(grid, 0.0)
        vals = eigsh(op.matrix, k=8, sigma=39.0, return_eigenvectors=False)
        exact = _discrete_box_spectrum(
            geometry.box_length, grid.box_height_snapped, grid.h, 10, 14
        )
        for v in vals:
            assert np.min(np.abs(exact - v)) < 1e-8 * abs(v)

    def test_matrix_is_real_symmetric(self, coarse_grid):
        op = ob.assemble_unscaled(coarse_grid, 44.0)
        assert op.matrix.dtype == np.float64
        assert abs(op.matrix - op.matrix.T).max() < 1e-12


class TestBarrierTerm:
    def test_barrier_only_moves_diagonal(self, coarse_grid):
        a0 = ob.assemble_unscaled(coarse_grid, 0.0).matrix
        a7 = ob.assemble_unscaled(coarse_grid, 7.0).matrix
        diag = np.asarray((a7 - a0).diagonal())
        mask = coarse_grid.tags == Region.GUIDE_BARRIER
        assert np.allclose(diag[mask], 7.0 * coarse_grid.geometry.barrier_height)
        assert np.allclose(diag[~mask], 0.0)
        off = (a7 - a0) - sp.diags(diag)
        assert abs(off).max() == 0.0

    def test_negative_lambda_rejected(self, coarse_grid):
        with pytest.raises(ValueError):
            ob.assemble_unscaled(coarse_grid, -1.0)


class TestScaledOperator:
    def test_complex_symmetric(self, coarse_grid, smap):
        op = ob.assemble_scaled(coarse_grid, 44.0, smap)
        assert op.matrix.dtype == np.complex128
        assert abs(op.matrix - op.matrix.T).max() < 1e-12

    def test_theta_one_reduces_to_unscaled(self, coarse_grid):
        ident = ob.make_scaling_map(1.0, -2.0, 1.0)
        a = ob.assemble_scaled(coarse_grid, 5.0, ident).matrix
        b = ob.assemble_unscaled(coarse_grid, 5.0).matrix.astype(complex)
        assert abs(a - b).max() == 0.0

    def test_scaling_localized_to_layer(self, coarse_grid, smap):
        a = ob.assemble_scaled(coarse_grid, 0.0, smap).matrix
        b = ob.assemble_unscaled(coarse_grid, 0.0).matrix
        d = abs(a - b.astype(complex)).tocoo()
        touched = np.unique(np.concatenate([d.row[d.data > 1e-14],
                                            d.col[d.data > 1e-14]]))
        # every touched node sits at or left of the anchor x0 = -2
        assert np.all(coarse_grid.xs[touched] <= -2.0 + coarse_grid.h / 2)

    @pytest.mark.parametrize(
        "x0,d",
        [
            (-1.9, 1.0),     # anchor inconsistent with the geometry
            (-2.0, 11.1),    # layer reaching the truncation column
        ],
    )
    def test_layer_placement_rejected(self, coarse_grid, x0, d):
        bad = ob.make_scaling_map(np.exp(0.3j), x0, d)
        with pytest.raises(LayerPlacement):
            ob.assemble_scaled(coarse_grid, 44.0, bad)

    def test_closed_box_rejected(self, geometry, smap):
        closed = ob.build_grid(geometry, 0.05, include_guide=False)
        with pytest.raises(LayerPlacement):
            ob.assemble_scaled(closed, 44.0, smap)


class TestOperatorMetadata:
    def test_geometry_hash_stable_and_sensitive(self, geometry, coarse_grid, smap):
        h1 = ob.assemble_unscaled(coarse_grid, 0.0).geometry_hash
        h2 = ob.assemble_scaled(coarse_grid, 44.0, smap).geometry_hash
        assert h1 == h2                                   # lambda-independent
        other = ob.build_grid(geometry, 0.02)
        assert ob.assemble_unscaled(other, 0.0).geometry_hash != h1

    def test_matrix_market_round_trip(self, coarse_grid, smap, tmp_path):
        from scipy.io import mmread

        op = ob.assemble_scaled(coarse_grid, 3.0, smap)
        path = tmp_path / "op.mtx"
        op.dump_matrix_market(path)
        back = mmread(path).tocsr()
        assert abs(back - op.matrix).max() < 1e-14
