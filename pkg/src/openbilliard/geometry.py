"""Physical domain and uniform grid for the billiard + waveguide system.

The domain is a rectangular billiard [0, Lx] x [0, Ly] with a waveguide
attached along x < 0 at the edge x = 0.  The guide occupies
[truncation_x, 0] x [y_a, y_a + W]; a rectangular potential barrier of
height V0 sits in the guide on barrier_x.  All walls carry Dirichlet
conditions and must fall exactly on grid lines, which is what the
spacing-snapping logic below guarantees.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import IntEnum

import numpy as np

from .errors import DegenerateGeometry, SnapFailure

#: relative tolerance for "length is an integer multiple of h"
_DIV_RTOL = 1e-6
#: maximum relative change allowed when snapping the grid spacing
_SNAP_WINDOW = 0.05


class Region(IntEnum):
    BILLIARD = 0
    GUIDE_PLAIN = 1
    GUIDE_BARRIER = 2
    GUIDE_SCALED = 3


@dataclass(frozen=True)
class BilliardGeometry:
    """Rectangular billiard coupled to a single truncated waveguide."""

    box_length: float = 2.0
    box_height: float = 3.14
    guide_width: float = 0.6
    guide_offset: float = 0.0
    barrier_x: tuple[float, float] = (-0.3, 0.0)
    barrier_height: float = 1.0
    truncation_x: float = -13.0
    scaling_anchor: float = -2.0

    def __post_init__(self):
        lx, ly, w = self.box_length, self.box_height, self.guide_width
        bmin, bmax = self.barrier_x
        if min(lx, ly, w, self.barrier_height) <= 0:
            raise DegenerateGeometry("Lx, Ly, W, V0 must all be positive")
        if not (self.truncation_x < self.scaling_anchor < bmin <= bmax <= 0):
            raise DegenerateGeometry(
                "need truncation_x < x0 < barrier_min <= barrier_max <= 0"
            )
        if not (0 <= self.guide_offset and self.guide_offset + w <= ly):
            raise DegenerateGeometry("waveguide opening must lie within the billiard edge")

    @property
    def mode_threshold(self) -> float:
        """Energy (pi/W)^2 at which the first transversal mode opens."""
        return (np.pi / self.guide_width) ** 2

    def threshold(self, n: int) -> float:
        return (n * np.pi / self.guide_width) ** 2


def _near_int(x: float) -> bool:
    n = round(x)
    return n > 0 and abs(x - n) <= _DIV_RTOL * max(1.0, n)


def snap_spacing(
    geometry: BilliardGeometry, h: float, include_guide: bool = True
) -> tuple[float, int]:
    """Pick an admissible spacing h' within 5% of h.

    Every wall and barrier edge has to land on a grid line.  The box height
    Ly is the one length allowed to miss: if no h' fits all lengths, the top
    wall is snapped to the nearest grid line instead (the paper's Ly = 3.14
    is not commensurable with every otherwise-natural spacing).

    Returns (h', ny) with ny the number of grid intervals across the box
    height actually used.
    """
    if h <= 0:
        raise SnapFailure("spacing must be positive")
    g = geometry
    strict = [g.box_length]
    if include_guide:
        strict += [g.guide_width, abs(g.truncation_x)]
        for v in (abs(g.barrier_x[0]), abs(g.barrier_x[1]), g.guide_offset):
            if v > 0:
                strict.append(v)
    candidates: list[float] = []
    for length in strict + [g.box_height]:
        n_lo = max(1, int(np.floor(length / (h * (1 + _SNAP_WINDOW)))))
        n_hi = int(np.ceil(length / (h * (1 - _SNAP_WINDOW))))
        for n in range(n_lo, n_hi + 1):
            hp = length / n
            if abs(hp - h) <= _SNAP_WINDOW * h:
                candidates.append(hp)
    candidates.sort(key=lambda hp: (abs(hp - h), -hp))

    fallback = None
    for hp in candidates:
        if not all(_near_int(length / hp) for length in strict):
            continue
        if _near_int(g.box_height / hp):
            return hp, round(g.box_height / hp)
        if fallback is None:
            fallback = hp
    if fallback is not None:
        ny = round(g.box_height / fallback)
        if ny < 2:
            raise SnapFailure("snapped grid has no interior rows")
        return fallback, ny
    raise SnapFailure(f"no admissible spacing within 5% of h={h}")


@dataclass
class Grid:
    """Uniform Cartesian grid over the interior of the domain.

    Node (i, j) sits at (i*h, j*h); i is negative inside the guide.  Only
    interior points (Dirichlet walls excluded) carry a linear index; the
    index array maps (i - i_min, j) -> linear index, -1 outside.
    """

    geometry: BilliardGeometry
    h: float
    nx: int              # grid intervals across the billiard length
    ny: int              # grid intervals across the (possibly snapped) height
    n_gx: int            # grid intervals along the guide (|truncation_x| / h)
    n_gy: int            # grid intervals across the guide width
    j_a: int             # row index of the guide's lower wall
    include_guide: bool
    index: np.ndarray = field(repr=False)
    ii: np.ndarray = field(repr=False)
    jj: np.ndarray = field(repr=False)
    xs: np.ndarray = field(repr=False)
    ys: np.ndarray = field(repr=False)
    tags: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.xs.size

    @property
    def i_min(self) -> int:
        return -(self.n_gx - 1) if self.include_guide else 1

    @property
    def box_height_snapped(self) -> float:
        return self.ny * self.h

    @property
    def boundary_column(self) -> np.ndarray:
        """Linear indices of the nodes at x = truncation_x + h, sorted by y."""
        sel = np.flatnonzero(self.ii == self.i_min)
        return sel[np.argsort(self.jj[sel])]

    def guide_rows(self) -> np.ndarray:
        """Interior j-rows of the waveguide."""
        return np.arange(self.j_a + 1, self.j_a + self.n_gy)

    def node_at(self, i: int, j: int) -> int:
        """Linear index of grid node (i, j), or -1 if not an interior node."""
        io = i - self.i_min
        if io < 0 or io >= self.index.shape[0] or j < 0 or j >= self.index.shape[1]:
            return -1
        return int(self.index[io, j])

    def billiard_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.tags == Region.BILLIARD)


def build_grid(geometry: BilliardGeometry, h: float, include_guide: bool = True) -> Grid:
    """Discretize the domain with spacing (snapped from) h.

    With include_guide=False only the closed rectangular box is meshed,
    which is the lambda -> infinity reference system.
    """
    hp, ny = snap_spacing(geometry, h, include_guide)
    g = geometry
    nx = round(g.box_length / hp)
    n_gy = round(g.guide_width / hp)
    n_gx = round(abs(g.truncation_x) / hp)
    j_a = round(g.guide_offset / hp)
    if include_guide and n_gy - 1 < 4:
        raise DegenerateGeometry(
            f"only {n_gy - 1} interior nodes across the guide width (need >= 4)"
        )

    i_min = -(n_gx - 1) if include_guide else 1
    n_i = (nx - 1) - i_min + 1
    index = np.full((n_i, ny + 1), -1, dtype=np.int64)

    ii_list, jj_list, tag_list = [], [], []
    bmin, bmax = g.barrier_x
    lin = 0
    for i in range(i_min, nx):
        x = i * hp
        if i >= 1:
            js = range(1, ny)
            tag = Region.BILLIARD
        else:
            if not include_guide:
                continue
            # guide columns, including the interface column i == 0
            js = range(j_a + 1, j_a + n_gy)
            if bmin - hp * _DIV_RTOL <= x <= bmax + hp * _DIV_RTOL:
                tag = Region.GUIDE_BARRIER
            elif x < g.scaling_anchor:
                tag = Region.GUIDE_SCALED
            else:
                tag = Region.GUIDE_PLAIN
        for j in js:
            index[i - i_min, j] = lin
            ii_list.append(i)
            jj_list.append(j)
            tag_list.append(tag)
            lin += 1

    ii = np.array(ii_list, dtype=np.int64)
    jj = np.array(jj_list, dtype=np.int64)
    return Grid(
        geometry=replace(g),
        h=hp,
        nx=nx,
        ny=ny,
        n_gx=n_gx,
        n_gy=n_gy,
        j_a=j_a,
        include_guide=include_guide,
        index=index,
        ii=ii,
        jj=jj,
        xs=ii * hp,
        ys=jj * hp,
        tags=np.array(tag_list, dtype=np.uint8),
    )


def barrier_indicator(grid: Grid, node: int) -> int:
    """1 iff the node is a guide node inside the barrier strip."""
    if node < 0 or node >= grid.n:
        raise IndexError(f"node {node} not in grid")
    return int(grid.tags[node] == Region.GUIDE_BARRIER)
