"""The dimension spectrum alpha -> dim E_alpha(mu) and formalism-violation intervals."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ..errors import HypothesisFailed
from ..measure import WeightSystem
from .closed_form import ClosedFormTau, b_structure, tau_nu_closed, tau_tilde
from .legendre import legendre
from .lq import lq_spectrum
from .transitions import PhaseTransition, find_phase_transitions

SAMPLES = 512
ALPHA_TOL = 1e-13


class NuQB(enum.Enum):
    QB_LOWER = "QBLower"
    QB_UPPER = "QBUpper"
    NOT_QB = "NotQB"


def check_nu_qb(ws: WeightSystem) -> NuQB:
    """Compare p_i with its mirror p_{base-1-i} across B; empty B counts as lower."""
    l = ws.base
    b = b_structure(ws).B
    p = ws.weights
    if all(p[i] < p[l - 1 - i] for i in b):
        return NuQB.QB_LOWER
    if all(p[i] > p[l - 1 - i] for i in b):
        return NuQB.QB_UPPER
    return NuQB.NOT_QB


def _support(tau: ClosedFormTau):
    if tau.is_empty:
        return None
    lo, hi = tau.alpha_range()
    return (lo, hi)


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    branch: str


@dataclass(frozen=True)
class IsolatedPoint:
    alpha: float
    value: float
    branch: str


@dataclass(frozen=True)
class DimensionSpectrum:
    base: int
    nu: ClosedFormTau
    tilde: ClosedFormTau
    intervals: tuple[tuple[float, float], ...]
    points: tuple[IsolatedPoint, ...]
    pieces: tuple[Piece, ...]

    def _branches(self, alpha: float):
        return legendre(self.nu, alpha), legendre(self.tilde, alpha)

    def in_domain(self, alpha: float) -> bool:
        tol = ALPHA_TOL * max(1.0, abs(alpha))
        return any(lo - tol <= alpha <= hi + tol for lo, hi in self.intervals) or any(
            abs(alpha - p.alpha) <= tol for p in self.points
        )

    def __call__(self, alpha: float) -> float:
        """dim E_alpha(mu); -inf off the domain (empty level set)."""
        if not self.in_domain(alpha):
            return -math.inf
        return max(self._branches(alpha))

    def branch(self, alpha: float) -> str:
        a, b = self._branches(alpha)
        return "nu" if a >= b else "tilde"

    def sample(self, per_piece: int = 201):
        """Rows (alpha, f, branch) covering every piece and isolated point."""
        rows = []
        for pc in self.pieces:
            for a in np.linspace(pc.lo, pc.hi, per_piece) if pc.hi > pc.lo else [pc.lo]:
                rows.append((float(a), self(float(a)), pc.branch))
        for p in self.points:
            rows.append((p.alpha, p.value, p.branch))
        rows.sort(key=lambda r: r[0])
        return rows


def _merge(sets):
    """Merge closed intervals (points are zero-length intervals)."""
    out: list[list[float]] = []
    for lo, hi in sorted(sets):
        if out and lo <= out[-1][1] + ALPHA_TOL * max(1.0, abs(lo)):
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [tuple(x) for x in out]


def _crossings(f, lo: float, hi: float) -> list[float]:
    grid = np.linspace(lo, hi, SAMPLES + 1)[1:-1]
    vals = np.array([f(a) for a in grid])
    roots = []
    for k in range(len(grid) - 1):
        if np.isfinite(vals[k]) and np.isfinite(vals[k + 1]) and vals[k] * vals[k + 1] < 0:
            a, b, fa = grid[k], grid[k + 1], vals[k]
            while b - a > ALPHA_TOL * max(1.0, abs(a)):
                m = 0.5 * (a + b)
                if m in (a, b):
                    break
                fm = f(m)
                if (fm > 0) == (fa > 0):
                    a, fa = m, fm
                else:
                    b = m
            roots.append(0.5 * (a + b))
    return roots


def dimension_spectrum(ws: WeightSystem) -> DimensionSpectrum:
    bs = b_structure(ws)
    if bs.overlaps:
        raise HypothesisFailed("BOverlap", f"B = {sorted(bs.B)} meets B* = {sorted(bs.BStar)}")
    if check_nu_qb(ws) is NuQB.NOT_QB:
        raise HypothesisFailed("NuNotQB", "p_i - p_{base-1-i} changes sign across B")
    nu = tau_nu_closed(ws)
    if nu is None:
        raise HypothesisFailed("NoClosedForm", "the endpoints of D_nu need a closed-form tau_nu")
    tilde = tau_tilde(ws)

    supports = [s for s in (_support(nu), _support(tilde)) if s is not None]
    merged = _merge(supports)
    intervals = tuple((lo, hi) for lo, hi in merged if hi > lo)
    point_locs = [lo for lo, hi in merged if hi == lo]

    def diff(a):
        x, y = legendre(nu, a), legendre(tilde, a)
        if math.isinf(x) or math.isinf(y):
            return math.nan
        return x - y

    pieces = []
    for lo, hi in intervals:
        cuts = {lo, hi}
        for s in supports:
            for edge in s:
                if lo < edge < hi:
                    cuts.add(edge)
        cuts.update(_crossings(diff, lo, hi))
        cuts = sorted(cuts)
        for a, b in zip(cuts, cuts[1:]):
            mid = 0.5 * (a + b)
            label = "nu" if legendre(nu, mid) >= legendre(tilde, mid) else "tilde"
            if pieces and pieces[-1].branch == label and pieces[-1].hi == a:
                pieces[-1] = Piece(pieces[-1].lo, b, label)
            else:
                pieces.append(Piece(a, b, label))

    points = []
    for a in point_locs:
        x, y = legendre(nu, a), legendre(tilde, a)
        points.append(IsolatedPoint(a, max(x, y), "nu" if x >= y else "tilde"))
    return DimensionSpectrum(ws.base, nu, tilde, intervals, tuple(points), tuple(pieces))


@dataclass(frozen=True)
class ViolationInterval:
    transition: PhaseTransition
    alpha_lo: float
    alpha_hi: float
    max_gap: float
    alpha_at_max: float
    gap_at_midpoint: float


def violation_intervals(ws: WeightSystem, samples: int = 201) -> list[ViolationInterval]:
    """Intervals (-tau'_+(q*), -tau'_-(q*)) where dim E_alpha < tau_mu*(alpha).

    An empty level set is counted as dimension 0, which can only shrink the
    reported gap.
    """
    spec = lq_spectrum(ws)
    trans = find_phase_transitions(ws, spec=spec)
    if not trans:
        return []
    dim = dimension_spectrum(ws)

    def gap(a):
        return legendre(spec, a) - max(dim(a), 0.0)

    out = []
    for t in trans:
        lo, hi = t.alpha_lo, t.alpha_hi
        alphas = np.linspace(lo, hi, samples + 2)[1:-1]
        gaps = np.array([gap(a) for a in alphas])
        k = int(np.argmax(gaps))
        out.append(ViolationInterval(t, lo, hi, float(gaps[k]), float(alphas[k]), gap(0.5 * (lo + hi))))
    return out
