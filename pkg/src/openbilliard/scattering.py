"""Real-energy scattering: reflection coefficient, phase, Wigner-Smith delay.

The open problem is closed at the truncation plane x = truncation_x by a
mode-matching condition: on the two columns nearest the plane the solution
is expanded into the open mode e^{ikx} - R e^{-ikx} plus decaying closed
modes c_n e^{kappa_n x}.  The longitudinal wavenumbers obey the *lattice*
dispersion relation cos(k h) = 1 + h^2 (mu_n - E) / 2 with mu_n the
discrete transversal eigenvalue, so the closure is consistent with the
interior stencil to the same order and |R| stays on the unit circle up to
the discretization budget.

Amplitudes are written in absolute x, so R is automatically referenced to
the plane x = 0 (the billiard mouth) and independent of truncation_x.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import BranchAmbiguity, SingularSystem, UnitarityBreach
from .geometry import Grid
from .operators import DiscreteOperator, assemble_unscaled

#: hard limit on | |R| - 1 | before a solve is rejected outright
UNITARITY_HARD_LIMIT = 1e-2
#: minimum energy interval for adaptive branch refinement
MIN_BISECTION_DE = 1e-8


@dataclass
class ScatteringPoint:
    """Per-energy scattering record for the single open mode."""

    E: float
    k: float
    R: complex
    unitarity_residual: float
    theta_unwrapped: float | None = None
    tau_w: float | None = None


@dataclass
class ModeBasis:
    """Discrete transversal modes of the guide cross-section.

    Sampled on the interior guide rows; with W = (M+1) h the discrete sine
    vectors are exactly orthogonal under the plain grid inner product.
    """

    W: float
    h: float
    n_max: int
    y: np.ndarray          # interior cross-section ordinates, relative to y_a
    u: np.ndarray          # (M, n_max), u[:, n-1] = sin(n pi y / W)
    mu: np.ndarray         # discrete transversal eigenvalues (2/h^2)(1 - cos(n pi h / W))

    def continuum_threshold(self, n: int) -> float:
        return (n * np.pi / self.W) ** 2

    def k_open(self, E: float) -> float:
        """Lattice longitudinal wavenumber of the open first mode."""
        c = 1.0 - 0.5 * self.h**2 * (E - self.mu[0])
        if not -1.0 < c < 1.0:
            raise ValueError(f"E={E} outside the propagating band of mode 1")
        return float(np.arccos(c) / self.h)

    def kappa_closed(self, E: float) -> np.ndarray:
        """Lattice decay rates of the closed modes n = 2..n_max."""
        c = 1.0 + 0.5 * self.h**2 * (self.mu[1:] - E)
        if np.any(c < 1.0):
            raise ValueError("a mode above n=1 is open; outside the supported window")
        return np.arccosh(c) / self.h


def mode_basis(W: float, h: float, n_max: int) -> ModeBasis:
    m = round(W / h) - 1
    if not 1 <= n_max <= m:
        raise ValueError(f"n_max must be in [1, {m}]")
    y = h * np.arange(1, m + 1)
    n = np.arange(1, n_max + 1)
    u = np.sin(np.outer(y, n) * np.pi / W)
    mu = (2.0 / h**2) * (1.0 - np.cos(n * np.pi * h / W))
    return ModeBasis(W=W, h=h, n_max=n_max, y=y, u=u, mu=mu)


def solve_scattering(
    grid: Grid,
    lam: float,
    E: float,
    n_modes: int = 8,
    operator: DiscreteOperator | None = None,
) -> ScatteringPoint:
    """Solve the open problem at real energy E and extract R(E).

    The interior unknowns, R and the closed-mode amplitudes are solved as
    one sparse linear system.  `operator` may carry a pre-assembled
    unscaled matrix for this (grid, lam) to save re-assembly in sweeps.
    """
    g = grid.geometry
    t1, t2 = g.threshold(1), g.threshold(2)
    if not t1 < E < t2:
        raise ValueError(f"E={E} outside the one-open-mode window ({t1:.4f}, {t2:.4f})")
    if operator is None:
        operator = assemble_unscaled(grid, lam)
    h = grid.h
    modes = mode_basis(g.guide_width, h, n_modes)
    m_rows = modes.y.size

    k1 = modes.k_open(E)
    kappa = modes.kappa_closed(E)
    x_t = g.truncation_x
    x_b = x_t + h
    bc = grid.boundary_column
    if bc.size != m_rows:
        raise SingularSystem("boundary column does not span the guide cross-section")

    n = grid.n
    inv_h2 = 1.0 / h**2
    u = modes.u                           # (M, n_modes)
    u_hat = u * np.sqrt(2.0 / (m_rows + 1))
    s = np.sqrt((m_rows + 1) / 2.0)

    # ghost column x = x_t expressed through (R, c_n); c_n are referenced to
    # the boundary column x_b so every evanescent factor is e^{-kappa h} <= 1
    b_cols = np.empty((m_rows, n_modes), dtype=complex)
    b_cols[:, 0] = inv_h2 * np.exp(-1j * k1 * x_t) * u[:, 0]
    b_cols[:, 1:] = -inv_h2 * np.exp(-kappa * h)[None, :] * u[:, 1:]
    rhs = np.zeros(n + n_modes, dtype=complex)
    rhs[bc] = inv_h2 * np.exp(1j * k1 * x_t) * u[:, 0]

    # closure: project the boundary column onto each retained mode
    c_block = sp.coo_matrix(
        (
            u_hat.T.ravel(),
            (np.repeat(np.arange(n_modes), m_rows), np.tile(bc, n_modes)),
        ),
        shape=(n_modes, n),
    )
    d_block = np.zeros((n_modes, n_modes), dtype=complex)
    d_block[0, 0] = s * np.exp(-1j * k1 * x_b)
    for i in range(1, n_modes):
        d_block[i, i] = -s
    rhs[n] = s * np.exp(1j * k1 * x_b)

    b_block = sp.coo_matrix(
        (
            b_cols.ravel(),
            (np.repeat(bc, n_modes), np.tile(np.arange(n_modes), m_rows)),
        ),
        shape=(n, n_modes),
    )
    a_shift = (operator.matrix - E * sp.identity(n, format="csr")).astype(complex)
    system = sp.bmat(
        [[a_shift, b_block], [c_block, sp.coo_matrix(d_block)]], format="csc"
    )
    try:
        lu = splu(system)
    except RuntimeError as exc:
        raise SingularSystem(f"factorization failed at E={E}: {exc}") from exc
    sol = lu.solve(rhs)
    resid = np.linalg.norm(system @ sol - rhs) / np.linalg.norm(rhs)
    if not np.isfinite(resid) or resid > 1e-6:
        raise SingularSystem(f"ill-conditioned scattering system at E={E} (resid={resid:.2e})")

    r_coef = complex(sol[n])
    residual = abs(abs(r_coef) - 1.0)
    if residual > UNITARITY_HARD_LIMIT:
        raise UnitarityBreach(f"| |R|-1 | = {residual:.2e} at E={E}, lambda={lam}")
    k_cont = float(np.sqrt(E - t1))
    return ScatteringPoint(E=E, k=k_cont, R=r_coef, unitarity_residual=residual)


def unwrap_phase(points, refine=None, max_step=np.pi / 2):
    """Assign a continuous phase branch Theta(E) to a sorted list of points.

    Each step takes the principal-branch increment; whenever a raw step
    exceeds max_step and a `refine(E) -> ScatteringPoint` callback is
    available, the interval is bisected (new solves inserted) until all
    steps are small, so narrow resonances cannot slip a full branch.
    Returns the (possibly longer) sorted list with theta_unwrapped set.
    """
    pts = sorted(points, key=lambda p: p.E)
    if not pts:
        return pts
    i = 0
    while i < len(pts) - 1:
        a, b = pts[i], pts[i + 1]
        step = np.angle(b.R / a.R)
        if abs(step) <= max_step or refine is None:
            i += 1
            continue
        if b.E - a.E <= MIN_BISECTION_DE:
            raise BranchAmbiguity(
                f"phase step {step:.3f} unresolved at dE={b.E - a.E:.2e} near E={a.E}"
            )
        pts.insert(i + 1, refine(0.5 * (a.E + b.E)))
    theta = float(np.angle(pts[0].R))
    pts[0].theta_unwrapped = theta
    for a, b in zip(pts, pts[1:]):
        theta += float(np.angle(b.R / a.R))
        b.theta_unwrapped = theta
    return pts


def time_delay(points):
    """tau_w = dTheta/dE by second-order finite differences on the E mesh.

    The mesh may be non-uniform after adaptive bisection; the three-point
    formulas used are exact on quadratics (one-sided at the endpoints).
    """
    pts = sorted(points, key=lambda p: p.E)
    if len(pts) < 3:
        raise ValueError("need at least 3 unwrapped points")
    e = np.array([p.E for p in pts])
    th = np.array([p.theta_unwrapped for p in pts])
    if np.any([t is None for t in th]):
        raise ValueError("points must be unwrapped first")
    tau = np.empty_like(e)
    for i in range(len(e)):
        if i == 0:
            j0, j1, j2 = 0, 1, 2
        elif i == len(e) - 1:
            j0, j1, j2 = i - 2, i - 1, i
        else:
            j0, j1, j2 = i - 1, i, i + 1
        x0, x1, x2 = e[[j0, j1, j2]]
        y0, y1, y2 = th[[j0, j1, j2]]
        x = e[i]
        tau[i] = (
            y0 * (2 * x - x1 - x2) / ((x0 - x1) * (x0 - x2))
            + y1 * (2 * x - x0 - x2) / ((x1 - x0) * (x1 - x2))
            + y2 * (2 * x - x0 - x1) / ((x2 - x0) * (x2 - x1))
        )
    for p, t in zip(pts, tau):
        p.tau_w = float(t)
    return pts
