"""Gamow (resonance) wavefunctions and their decomposition into box modes.

Inside the billiard the scaling map is the identity, so the physical
resonance wavefunction equals the scaled eigenvector there; in the guide
the back-transformation divides by sqrt(g').  Because the scaled operator
is complex symmetric its eigenvectors are orthogonal under the bilinear
c-product (no conjugation), which is therefore also used for
normalization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NullRestriction
from .geometry import Grid, Region
from .poles import ResonancePole
from .scaling import ScalingMap

#: smallest |coefficient| retained in a mixing table
MIXING_CUTOFF = 1e-3


@dataclass
class GamowState:
    """Resonance wavefunction restricted to the billiard interior."""

    pole: ResonancePole
    grid: Grid
    values: np.ndarray = field(repr=False)   # on grid.billiard_nodes(), c-normalized
    normalization: complex
    mixing: list[tuple[int, int, complex]] = field(default_factory=list)

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.billiard_nodes()


def c_product(a: np.ndarray, b: np.ndarray, h: float) -> complex:
    """Bilinear inner product sum(a * b) h^2 — no complex conjugation."""
    return complex(np.sum(a * b) * h * h)


def extract_gamow(pole: ResonancePole, grid: Grid) -> GamowState:
    """Restrict a pole's eigenvector to the billiard and c-normalize it.

    The overall sign of the c-normalized vector is fixed by requiring a
    positive real part at the node of largest magnitude, so repeated
    extraction is deterministic.
    """
    if pole.eigvec is None:
        raise ValueError("pole carries no eigenvector")
    vec = np.asarray(pole.eigvec)
    nodes = grid.billiard_nodes()
    inside = vec[nodes]
    share = np.linalg.norm(inside) / np.linalg.norm(vec)
    if share < 1e-6:
        raise NullRestriction(
            f"billiard share {share:.2e}: eigenvector lives in the guide "
            "(continuum state misclassified?)"
        )
    norm2 = c_product(inside, inside, grid.h)
    if abs(norm2) < 1e-12:
        raise NullRestriction("self c-product vanishes; state is not normalizable")
    values = inside / np.sqrt(norm2)
    peak = int(np.argmax(np.abs(values)))
    if values[peak].real < 0:
        values = -values
    return GamowState(pole=pole, grid=grid, values=values, normalization=norm2)


def back_transform_guide(pole: ResonancePole, grid: Grid, smap: ScalingMap) -> np.ndarray:
    """Physical wavefunction on guide nodes: divide by sqrt(g') there."""
    if pole.eigvec is None:
        raise ValueError("pole carries no eigenvector")
    guide = np.flatnonzero(grid.tags != Region.BILLIARD)
    return pole.eigvec[guide] / np.sqrt(smap.gp(grid.xs[guide]))


def box_mode(grid: Grid, m: int, n: int) -> np.ndarray:
    """Closed-rectangle eigenmode phi_mn on the billiard nodes, unit discrete norm."""
    g = grid.geometry
    lx, ly = g.box_length, grid.box_height_snapped
    nodes = grid.billiard_nodes()
    x, y = grid.xs[nodes], grid.ys[nodes]
    phi = np.sin(m * np.pi * x / lx) * np.sin(n * np.pi * y / ly)
    return phi * (2.0 / np.sqrt(lx * ly))


def box_mode_energy(grid: Grid, m: int, n: int) -> float:
    g = grid.geometry
    return (m * np.pi / g.box_length) ** 2 + (n * np.pi / grid.box_height_snapped) ** 2


def mixing_coefficients(state: GamowState, m_max: int = 8, n_max: int = 10):
    """Coefficients of the state in the closed-box eigenbasis.

    c(m, n) = sum Psi phi_mn h^2 over the billiard interior; entries with
    |c| > MIXING_CUTOFF are returned sorted by descending magnitude and
    also stored on the state.
    """
    h = state.grid.h
    out = []
    for m in range(1, m_max + 1):
        for n in range(1, n_max + 1):
            c = c_product(state.values, box_mode(state.grid, m, n), h)
            if abs(c) > MIXING_CUTOFF:
                out.append((m, n, c))
    out.sort(key=lambda rec: (-abs(rec[2]), rec[0], rec[1]))
    state.mixing = out
    return out


def export_field(state: GamowState, path) -> None:
    """Write the field as a text grid: header, then y-major rows of
    x, y, Re Psi, Im Psi, |Psi| with 17 significant digits."""
    if state.values.size == 0:
        raise ValueError("empty state")
    grid = state.grid
    g = grid.geometry
    nodes = state.nodes
    order = np.lexsort((grid.ii[nodes], grid.jj[nodes]))   # y-major
    pole = state.pole
    fmt = "%.17g"
    lines = [
        "# Lx Ly h lambda ReE ImE",
        "# " + " ".join(
            fmt % v
            for v in (g.box_length, grid.box_height_snapped, grid.h, pole.lam,
                      pole.energy.real, pole.energy.imag)
        ),
    ]
    for idx in order:
        v = state.values[idx]
        node = nodes[idx]
        lines.append(" ".join(
            fmt % w
            for w in (grid.xs[node], grid.ys[node], v.real, v.imag, abs(v))
        ))
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    import os

    os.replace(tmp, path)


def read_field(path):
    """Parse a file written by export_field: (header dict, data array)."""
    with open(path) as fh:
        fh.readline()
        hdr = [float(v) for v in fh.readline().lstrip("# ").split()]
        data = np.loadtxt(fh)
    keys = ("Lx", "Ly", "h", "lambda", "ReE", "ImE")
    return dict(zip(keys, hdr)), np.atleast_2d(data)
