"""Scattering solves: unitarity, the hard-wall reflection oracle,
truncation invariance, phase unwrapping and the delay derivative."""

import dataclasses

import numpy as np
import pytest

import openbilliard as ob
from openbilliard.errors import BranchAmbiguity
from openbilliard.scattering import ScatteringPoint, mode_basis


class TestModeBasis:
    def test_discrete_orthogonality_is_exact(self):
        mb = mode_basis(0.6, 0.05, 8)
        m = mb.y.size
        gram = mb.u.T @ mb.u * (2.0 / (m + 1))
        assert np.allclose(gram, np.eye(8), atol=1e-12)

    def test_lattice_dispersion_limits(self):
        mb = mode_basis(0.6, 0.05, 8)
        # lattice wavenumber approaches the continuum one as h -> 0
        fine = mode_basis(0.6, 0.01, 8)
        e = 38.6
        k_cont = np.sqrt(e - (np.pi / 0.6) ** 2)
        assert abs(fine.k_open(e) - k_cont) < abs(mb.k_open(e) - k_cont)
        assert mb.kappa_closed(e).shape == (7,)
        assert np.all(np.diff(mb.kappa_closed(e)) > 0)
        with pytest.raises(ValueError):
            mb.k_open(1.0)                      # below the first threshold
        with pytest.raises(ValueError):
            mb.kappa_closed(150.0)              # second mode already open
        with pytest.raises(ValueError):
            mode_basis(0.6, 0.05, 50)


class TestSolve:
    def test_unitary_to_roundoff(self, coarse_grid):
        for lam, e in ((44.0, 38.1), (44.0, 39.5), (0.0, 38.7)):
            p = ob.solve_scattering(coarse_grid, lam, e)
            assert p.unitarity_residual < 1e-10
            assert p.k == pytest.approx(np.sqrt(e - (np.pi / 0.6) ** 2))

    def test_energy_window_enforced(self, coarse_grid):
        with pytest.raises(ValueError):
            ob.solve_scattering(coarse_grid, 44.0, 20.0)
        with pytest.raises(ValueError):
            ob.solve_scattering(coarse_grid, 44.0, 120.0)

    def test_truncation_invariance(self, geometry):
        """R is referenced to x = 0, so moving the truncation plane by a
        guide wavelength's worth must not change it (evanescent closure)."""
        near = dataclasses.replace(geometry, truncation_x=-12.0)
        r13 = ob.solve_scattering(ob.build_grid(geometry, 0.05), 44.0, 38.6).R
        r12 = ob.solve_scattering(ob.build_grid(near, 0.05), 44.0, 38.6).R
        assert abs(r13 - r12) < 1e-8

    def test_hard_wall_oracle(self, coarse_grid):
        """lambda -> infinity turns the barrier front x = -0.3 into a
        Dirichlet wall: R = e^{-0.6 i k} up to the finite penetration depth
        2 atan(k / sqrt(lambda V0)) ~ 0.07 rad."""
        mb = mode_basis(0.6, coarse_grid.h, 8)
        for e in (31.0, 35.0, 38.6):
            p = ob.solve_scattering(coarse_grid, 1e4, e)
            k = mb.k_open(e)
            mismatch = np.angle(p.R * np.exp(0.6j * k))
            assert abs(mismatch) < 0.1
            assert p.unitarity_residual < 1e-10

    def test_operator_reuse_matches_fresh_assembly(self, coarse_grid):
        op = ob.assemble_unscaled(coarse_grid, 44.0)
        a = ob.solve_scattering(coarse_grid, 44.0, 38.9, operator=op)
        b = ob.solve_scattering(coarse_grid, 44.0, 38.9)
        assert a.R == b.R


def _synthetic_points(es, phase):
    return [
        ScatteringPoint(E=float(e), k=1.0, R=np.exp(1j * phase(e)),
                        unitarity_residual=0.0)
        for e in es
    ]


class TestUnwrap:
    def test_recovers_smooth_phase(self):
        phase = lambda e: -3.0 * e + 0.2 * np.sin(e)
        es = np.linspace(38.0, 40.0, 60)
        pts = ob.unwrap_phase(_synthetic_points(es, phase))
        th = np.array([p.theta_unwrapped for p in pts])
        exact = phase(es)
        assert np.allclose(np.diff(th), np.diff(exact), atol=1e-9)

    def test_bisection_catches_narrow_resonance(self):
        er, gamma = 39.0, 0.2
        phase = lambda e: 2.0 * np.arctan2(0.5 * gamma, er - e)
        es = np.linspace(38.5, 39.5, 6)          # resonance falls between nodes
        refine = lambda e: _synthetic_points([e], phase)[0]
        pts = ob.unwrap_phase(_synthetic_points(es, phase), refine=refine)
        th = [p.theta_unwrapped for p in pts]
        assert len(pts) > 6                      # bisection inserted points
        assert th[-1] - th[0] == pytest.approx(phase(39.5) - phase(38.5), abs=1e-9)

    def test_true_discontinuity_raises(self):
        phase = lambda e: 0.0 if e < 39.0 else np.pi * 0.9
        es = [38.9, 39.1]
        refine = lambda e: _synthetic_points([e], phase)[0]
        with pytest.raises(BranchAmbiguity):
            ob.unwrap_phase(_synthetic_points(es, phase), refine=refine)

    def test_without_refine_keeps_principal_steps(self):
        phase = lambda e: 0.0 if e < 39.0 else 2.0
        pts = ob.unwrap_phase(_synthetic_points([38.9, 39.1], phase))
        assert pts[1].theta_unwrapped == pytest.approx(2.0)


class TestTimeDelay:
    def test_exact_on_quadratic_nonuniform_mesh(self):
        rng = np.random.default_rng(7)
        es = np.sort(38.0 + 2.0 * rng.random(25))
        a, b = 0.7, -4.0
        pts = _synthetic_points(es, lambda e: 0.0)
        for p in pts:
            p.theta_unwrapped = a * p.E**2 + b * p.E
        pts = ob.time_delay(pts)
        tau = np.array([p.tau_w for p in pts])
        assert np.allclose(tau, 2 * a * es + b, atol=1e-8)

    def test_requires_unwrapped_points(self):
        pts = _synthetic_points([38.0, 38.5, 39.0], lambda e: 0.0)
        with pytest.raises(ValueError):
            ob.time_delay(pts)
        with pytest.raises(ValueError):
            ob.time_delay(pts[:2])
