"""Resonance poles of the scaled operator: targeted eigensolves,
pole/continuum classification and continuation in the coupling strength.

Complex scaling rotates each branch of the continuous spectrum by -2 alpha
about its threshold (n pi / W)^2 and leaves the resonance poles fixed.  A
candidate eigenvalue is accepted as a pole only if it keeps a safe distance
from every rotated branch *and* stays put when alpha is changed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigs, splu

from .errors import FactorizationSingular, PairingAmbiguity
from .geometry import Grid
from .operators import DiscreteOperator, assemble_scaled
from .scaling import ScalingMap, make_scaling_map

#: residual bound for an accepted eigenpair
RESIDUAL_TOL = 1e-8
#: nearest-neighbor radius for continuation, in complex energy
TRACKING_RADIUS = 0.5
#: maximum pole displacement per accepted continuation step
MAX_POLE_STEP = 0.25


class Classification(Enum):
    POLE = "POLE"
    CONTINUUM = "CONTINUUM"
    UNRESOLVED = "UNRESOLVED"


@dataclass
class ResonancePole:
    """Complex eigenvalue E_r - i Gamma / 2 of the scaled operator."""

    energy: complex
    lam: float
    theta_used: complex
    residual: float
    classification: Classification = Classification.UNRESOLVED
    eigvec: np.ndarray | None = field(default=None, repr=False)

    @property
    def gamma(self) -> float:
        return -2.0 * self.energy.imag


@dataclass
class PoleTrajectory:
    """One pole tracked over a monotone lambda ladder."""

    branch_id: int
    lams: list[float] = field(default_factory=list)
    poles: list[ResonancePole] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    def append(self, lam: float, pole: ResonancePole):
        self.lams.append(lam)
        self.poles.append(pole)

    @property
    def gammas(self) -> np.ndarray:
        return np.array([p.gamma for p in self.poles])

    @property
    def energies(self) -> np.ndarray:
        return np.array([p.energy for p in self.poles])


def _start_vector(n: int, seed: int) -> np.ndarray:
    v = np.random.default_rng(seed).standard_normal(n)
    return v / np.linalg.norm(v)


def eigs_near(
    op: DiscreteOperator,
    shift: complex,
    count: int,
    seed: int = 0,
    keep_vectors: bool = True,
):
    """Eigenpairs of op closest to `shift` via shift-invert Arnoldi.

    The shifted matrix is factorized once (sparse LU) and reused across the
    Krylov iterations inside ARPACK.  A deterministic seeded start vector
    makes the result reproducible.  Returns a list of
    (eigenvalue, eigenvector | None, residual) sorted by |ev - shift|;
    pairs whose residual exceeds RESIDUAL_TOL are dropped by the callers'
    classification stage, not here.
    """
    a = op.matrix.tocsc().astype(complex)
    n = a.shape[0]
    count = min(count, n - 2)
    v0 = _start_vector(n, seed)
    last_exc = None
    for attempt in range(2):
        sig = shift if attempt == 0 else shift + 1e-6 * (1 + 1j)
        try:
            lu = splu(a - sig * sp.identity(n, format="csc"))
            opinv = sp.linalg.LinearOperator((n, n), matvec=lu.solve, dtype=complex)
            vals, vecs = eigs(
                a, k=count, sigma=sig, which="LM", v0=v0, tol=1e-12, OPinv=opinv
            )
            break
        except RuntimeError as exc:
            last_exc = FactorizationSingular(f"shift {sig}: {exc}")
        except ArpackNoConvergence as exc:
            vals, vecs = exc.eigenvalues, exc.eigenvectors
            if vals.size == 0:
                last_exc = exc
                continue
            break
    else:
        raise last_exc if isinstance(last_exc, FactorizationSingular) else (
            FactorizationSingular(str(last_exc))
        )

    order = np.argsort(np.abs(vals - shift))
    out = []
    for idx in order:
        v = vecs[:, idx]
        nv = np.linalg.norm(v)
        res = float(np.linalg.norm(a @ v - vals[idx] * v) / nv)
        out.append((complex(vals[idx]), v / nv if keep_vectors else None, res))
    return out


def _line_projection(z: complex, threshold: float, alpha: float):
    """(t, distance) of z relative to the half-line threshold + t e^{-2i alpha}."""
    w = (z - threshold) * np.exp(2j * alpha)
    t = w.real
    if t < 0:
        return t, abs(z - threshold)
    return t, abs(w.imag)


def _continuum_spacing(t: float, guide_length: float) -> float:
    """Expected eigenvalue spacing along a rotated branch at parameter t."""
    dk = np.pi / guide_length
    return 2.0 * np.sqrt(max(t, dk**2)) * dk + dk**2


@dataclass
class Candidate:
    energy: complex
    residual: float
    eigvec: np.ndarray | None = None


def classify(
    primary: list[Candidate],
    check: list[Candidate],
    smap_primary: ScalingMap,
    smap_check: ScalingMap,
    W: float,
    guide_length: float,
    lam: float = 0.0,
) -> list[ResonancePole]:
    """Classify the `primary` candidates (computed at alpha_1) as
    POLE / CONTINUUM / UNRESOLVED using the rotated-line geometry and the
    matching set `check` computed at a different rotation angle.
    """
    a1, a2 = smap_primary.alpha, smap_check.alpha
    if np.isclose(a1, a2):
        raise ValueError("classification needs two distinct rotation angles")
    n_lines = max(1, int(np.ceil(np.sqrt(max(
        (c.energy.real for c in primary), default=1.0)) * W / np.pi)) + 1)
    thresholds = [(n * np.pi / W) ** 2 for n in range(1, n_lines + 1)]

    # measured spacing along each rotated branch, falling back to the
    # free-guide estimate when too few continuum points are available
    line_ts: dict[int, list[float]] = {i: [] for i in range(len(thresholds))}
    proj = []
    for c in primary:
        best = min(
            ((i, *_line_projection(c.energy, thr, a1)) for i, thr in enumerate(thresholds)),
            key=lambda rec: rec[2],
        )
        proj.append(best)
        i, t, dist = best
        if dist < _continuum_spacing(t, guide_length):
            line_ts[i].append(t)

    def local_spacing(i_line: int, t: float) -> float:
        est = _continuum_spacing(t, guide_length)
        ts = sorted(line_ts[i_line])
        if len(ts) >= 3:
            gaps = np.diff(ts)
            pos = np.searchsorted(ts, t)
            lo = max(pos - 2, 0)
            near = gaps[lo : pos + 2]
            if near.size:
                return float(min(np.median(near), 2 * est))
        return est

    check_e = np.array([c.energy for c in check]) if check else np.empty(0, complex)
    claimed: dict[int, int] = {}
    out = []
    for idx, c in enumerate(primary):
        i_line, t, dist = proj[idx]
        spacing = local_spacing(i_line, t)
        pole = ResonancePole(
            energy=c.energy,
            lam=lam,
            theta_used=smap_primary.theta,
            residual=c.residual,
            eigvec=c.eigvec,
        )
        if c.residual > RESIDUAL_TOL:
            pole.classification = Classification.UNRESOLVED
        elif dist <= 3.0 * spacing:
            pole.classification = Classification.CONTINUUM
        else:
            gamma = max(-2.0 * c.energy.imag, 0.0)
            tol = max(1e-2, 0.05 * gamma)
            if check_e.size == 0:
                pole.classification = Classification.UNRESOLVED
            else:
                j = int(np.argmin(np.abs(check_e - c.energy)))
                move = abs(check_e[j] - c.energy)
                if move >= tol:
                    pole.classification = Classification.UNRESOLVED
                elif j in claimed:
                    out[claimed[j]].classification = Classification.UNRESOLVED
                    pole.classification = Classification.UNRESOLVED
                else:
                    claimed[j] = idx
                    pole.classification = Classification.POLE
        out.append(pole)
    return out


def find_poles(
    grid: Grid,
    lam: float,
    alpha: float,
    alpha_check: float,
    window: tuple[float, float],
    d: float = 1.0,
    shifts=None,
    count: int = 12,
    seed: int = 0,
    im_depth: float = 1.0,
    keep_vectors: bool = False,
) -> list[ResonancePole]:
    """Scan an energy window at one coupling strength and classify everything.

    Runs shift-invert eigensolves at a coarse ladder of shifts (plus any
    user-supplied ones) for both rotation angles and returns de-duplicated
    classified candidates at the primary angle.
    """
    g = grid.geometry
    lo, hi = window
    base = [complex(s) - 0.25j * im_depth for s in np.arange(lo + 0.5, hi, 1.0)]
    if shifts:
        base += [complex(s) for s in shifts]

    def scan(a):
        smap = make_scaling_map(np.exp(1j * a), g.scaling_anchor, d)
        op = assemble_scaled(grid, lam, smap)
        cands: list[Candidate] = []
        for s in base:
            for ev, vec, res in eigs_near(op, s, count, seed=seed, keep_vectors=keep_vectors):
                if any(abs(ev - c.energy) < 1e-7 * max(1.0, abs(ev)) for c in cands):
                    continue
                cands.append(Candidate(ev, res, vec))
        return smap, cands

    smap1, cand1 = scan(alpha)
    smap2, cand2 = scan(alpha_check)
    poles = classify(cand1, cand2, smap1, smap2, g.guide_width,
                     abs(g.truncation_x), lam=lam)
    poles.sort(key=lambda p: (p.energy.real, p.energy.imag))
    return [p for p in poles if lo <= p.energy.real <= hi or
            p.classification is Classification.POLE]


def trace_poles(
    grid: Grid,
    smap: ScalingMap,
    lambda_from: float,
    lambda_to: float,
    seeds: list[complex],
    seed: int = 0,
    initial_step: float = 1.0,
    step_floor: float = 0.01,
    eig_count: int = 6,
) -> list[PoleTrajectory]:
    """Continue each seed pole from lambda_from to lambda_to.

    A shared adaptive lambda ladder drives all trajectories: the step is
    halved whenever any pole moves more than MAX_POLE_STEP in one step
    (quartered on a collision) and cautiously re-grown after a stretch of
    small moves, with a hard floor of `step_floor`.
    """
    trajs = []
    for b, s in enumerate(seeds):
        t = PoleTrajectory(branch_id=b)
        t.append(lambda_from, ResonancePole(
            energy=complex(s), lam=lambda_from, theta_used=smap.theta, residual=0.0,
            classification=Classification.POLE))
        trajs.append(t)
    if lambda_from == lambda_to:
        return trajs

    direction = 1.0 if lambda_to > lambda_from else -1.0
    lam = lambda_from
    step = initial_step
    calm = 0
    active = set(range(len(trajs)))
    while active and (lambda_to - lam) * direction > 1e-12:
        lam_next = lam + direction * min(step, abs(lambda_to - lam))
        op = assemble_scaled(grid, lam_next, smap)
        moves = {}
        for b in sorted(active):
            prev = trajs[b].poles[-1].energy
            pairs = eigs_near(op, prev, eig_count, seed=seed)
            ev, vec, res = min(pairs, key=lambda p: abs(p[0] - prev))
            moves[b] = (ev, vec, res, abs(ev - prev))

        too_far = any(m[3] > MAX_POLE_STEP for m in moves.values())
        lost = [b for b in moves if moves[b][3] > TRACKING_RADIUS]
        picks = {}
        collision = False
        for b, (ev, vec, res, dist) in moves.items():
            key = min(picks, key=lambda kb: abs(picks[kb] - ev), default=None)
            if key is not None and abs(picks[key] - ev) < 1e-6 * max(1.0, abs(ev)):
                collision = True
            picks[b] = ev

        if (too_far or collision or lost) and step > step_floor:
            step = max(step / (4.0 if collision else 2.0), step_floor)
            calm = 0
            continue

        for b in sorted(active):
            ev, vec, res, dist = moves[b]
            if dist > TRACKING_RADIUS:
                trajs[b].flags.append(f"LostTrack at lambda={lam_next:g}")
                continue
            if collision:
                trajs[b].flags.append(f"Collision at lambda={lam_next:g}")
            trajs[b].append(lam_next, ResonancePole(
                energy=ev, lam=lam_next, theta_used=smap.theta, residual=res,
                classification=Classification.POLE))
        active -= {b for b in lost}
        lam = lam_next
        calm = calm + 1 if not (too_far or collision) else 0
        if calm >= 3 and step < initial_step:
            step = min(step * 2.0, initial_step)
            calm = 0
    return trajs
