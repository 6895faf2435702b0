"""Points where tau_mu = max(tau_nu, tau_tilde) switches branch."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from ..errors import GridTooCoarse
from ..measure import WeightSystem
from .lq import LqSpectrum, lq_spectrum

Q_MIN = -200.0
Q_MAX = 0.0
SAMPLES = 2000
Q_TOL = 1e-12
TRANSVERSAL_TOL = 1e-9
TANGENT_TOL = 1e-10
SUBGRID = 16
# innermost |q| of the optional geometric sub-grid
LOG_FLOOR = 1e-6


@dataclass(frozen=True)
class PhaseTransition:
    q_star: float
    left_slope: float
    right_slope: float
    left_branch: str
    right_branch: str

    @property
    def alpha_lo(self) -> float:
        return -self.right_slope

    @property
    def alpha_hi(self) -> float:
        return -self.left_slope

    @property
    def violation_interval(self) -> tuple[float, float]:
        return self.alpha_lo, self.alpha_hi


@dataclass(frozen=True)
class TransitionScan:
    transitions: tuple[PhaseTransition, ...]
    tangencies: tuple[float, ...] = ()
    numeric: bool = False
    q_min: float = Q_MIN
    q_max: float = Q_MAX
    samples: int = SAMPLES
    # the asymptotic sign of g below q_min disagrees with the sign at q_min
    unresolved_tail: bool = False


def _bisect(g, lo: float, hi: float, glo: float, tol: float) -> float:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        gm = g(mid)
        if gm == 0:
            return mid
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _tail_sign(spec: LqSpectrum) -> float:
    """Sign of tau_nu - tau_tilde as q -> -inf (closed forms only)."""
    nlo, _ = spec.nu.slope_limits()
    tlo, _ = spec.tilde.slope_limits()
    if not math.isclose(nlo, tlo, rel_tol=1e-13):
        return 1.0 if nlo < tlo else -1.0
    # equal smallest atoms: compare the multiplicities of that atom
    diff = spec.nu.edge_values()[1] - spec.tilde.edge_values()[1]
    return float(np.sign(diff))


def scan_transitions(
    ws: WeightSystem,
    q_min: float = Q_MIN,
    q_max: float = Q_MAX,
    samples: int = SAMPLES,
    tol: float = Q_TOL,
    force: bool = False,
    spec: LqSpectrum | None = None,
    log_samples: int = 0,
) -> TransitionScan:
    """Sign-scan g = tau_nu - tau_tilde on a uniform grid and refine each root.

    ``log_samples`` > 0 merges in that many points spaced geometrically in
    |q| between |q_min| and LOG_FLOOR, which resolves crossings spread over
    many decades near q = 0.
    """
    if spec is None:
        spec = lq_spectrum(ws, force)
    numeric = not spec.closed
    if spec.tilde.is_empty:
        return TransitionScan((), (), numeric, q_min, q_max, samples)

    def g(q):
        return np.asarray(spec.nu(q)) - np.asarray(spec.tilde(q))

    grid = np.linspace(q_min, q_max, samples)
    if log_samples > 0 and q_min < 0:
        hi = min(-LOG_FLOOR, q_max) if q_max <= 0 else -LOG_FLOOR
        geo = -np.geomspace(-q_min, -hi, log_samples)
        grid = np.unique(np.concatenate([grid, geo[(geo >= q_min) & (geo <= q_max)]]))
    samples = len(grid)
    gv = g(grid)
    sg = np.sign(gv)
    found: list[PhaseTransition] = []
    tangent: list[float] = []

    k = 0
    while k < samples - 1:
        a, b = grid[k], grid[k + 1]
        if sg[k] == 0:
            # root on a grid node: a crossing if the neighbours disagree
            left = sg[k - 1] if k > 0 else sg[k + 1]
            if left != 0 and left != sg[k + 1] and k > 0:
                found.append(_make(spec, float(a), left))
            elif k > 0:
                tangent.append(float(a))
            k += 1
            continue
        if sg[k] * sg[k + 1] < 0:
            sub = g(np.linspace(a, b, SUBGRID + 1))
            changes = np.count_nonzero(np.diff(np.sign(sub)) != 0)
            if changes > 1:
                raise GridTooCoarse(f"several sign changes of g in [{a}, {b}]")
            q = _bisect(lambda t: float(g(t)), float(a), float(b), float(gv[k]), tol)
            slope_gap = abs(float(spec.nu.deriv(q)) - float(spec.tilde.deriv(q)))
            if slope_gap > TRANSVERSAL_TOL:
                found.append(_make(spec, q, sg[k]))
            else:
                tangent.append(q)
        k += 1

    # near-touching without a sign change
    absg = np.abs(gv)
    for k in range(1, samples - 1):
        if sg[k - 1] == sg[k] == sg[k + 1] != 0 and absg[k] <= absg[k - 1] and absg[k] <= absg[k + 1]:
            res = minimize_scalar(
                lambda t: abs(float(g(t))),
                bounds=(grid[k - 1], grid[k + 1]),
                method="bounded",
                options={"xatol": tol},
            )
            if res.fun < TANGENT_TOL:
                tangent.append(float(res.x))

    tail = False
    if not numeric:
        tail = _tail_sign(spec) * sg[0] < 0
    return TransitionScan(tuple(found), tuple(sorted(tangent)), numeric, q_min, q_max, samples, tail)


def _make(spec: LqSpectrum, q: float, left_sign: float) -> PhaseTransition:
    left = "nu" if left_sign > 0 else "tilde"
    right = "tilde" if left == "nu" else "nu"
    br = {"nu": spec.nu, "tilde": spec.tilde}
    return PhaseTransition(
        q, float(br[left].deriv(q)), float(br[right].deriv(q)), left, right
    )


def find_phase_transitions(ws: WeightSystem, **kw) -> list[PhaseTransition]:
    return list(scan_transitions(ws, **kw).transitions)
