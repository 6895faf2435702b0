"""Legendre conjugates tau*(alpha) = inf_q (alpha q + tau(q))."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from ..errors import NoClosedForm
from .closed_form import ClosedFormTau
from .lq import LqSpectrum, TauCurve

REL_TOL = 1e-13
EDGE_TOL = 1e-12
Q_LIMIT = 1e12


def _bracket(h):
    """[lo, hi] with h(lo) < 0 < h(hi) for a nondecreasing h, or None."""
    lo, hi = -1.0, 1.0
    while h(lo) >= 0:
        lo *= 2
        if lo < -Q_LIMIT:
            return None
    while h(hi) <= 0:
        hi *= 2
        if hi > Q_LIMIT:
            return None
    return lo, hi


def _stationary(tau: ClosedFormTau, alpha: float) -> float | None:
    """The q solving tau'(q) = -alpha (safeguarded Newton), or None if it escapes."""

    def h(q):
        return float(tau.deriv(q)) + alpha

    br = _bracket(h)
    if br is None:
        return None
    lo, hi = br
    q = 0.5 * (lo + hi)
    for _ in range(200):
        f = h(q)
        if f < 0:
            lo = q
        else:
            hi = q
        d2 = float(tau.deriv2(q))
        new = q - f / d2 if d2 > 0 else 0.5 * (lo + hi)
        if not lo < new < hi:
            new = 0.5 * (lo + hi)
        done = abs(new - q) <= REL_TOL * max(1.0, abs(q))
        q = new
        if done or hi - lo <= REL_TOL * max(1.0, abs(q)):
            break
    return q


def _closed(tau: ClosedFormTau, alpha: float) -> float:
    if tau.is_empty:
        return -math.inf
    a_lo, a_hi = tau.alpha_range()
    e_lo, e_hi = tau.edge_values()
    tol = EDGE_TOL * max(1.0, abs(alpha))
    if abs(alpha - a_lo) <= tol:
        return e_lo
    if abs(alpha - a_hi) <= tol:
        return e_hi
    if tau.is_linear or alpha < a_lo or alpha > a_hi:
        return -math.inf
    q = _stationary(tau, alpha)
    if q is None:
        # alpha sits within rounding of an edge; the edge limit is the answer
        return e_lo if alpha - a_lo < a_hi - alpha else e_hi
    return alpha * q + float(tau(q))


def _curve(tau: TauCurve, alpha: float) -> float:
    tau.check_convexity()
    s_lo, s_hi = tau.slope_range()
    tol = EDGE_TOL * max(1.0, abs(alpha))
    if alpha < -s_hi - tol or alpha > -s_lo + tol:
        return -math.inf
    return float(np.min(alpha * tau.q + tau.values))


def _edge_of_max(spec: LqSpectrum, side: int) -> float:
    """lim (alpha q + tau_mu(q)) at the slope limit on ``side`` (0: q -> -inf)."""
    target = spec.slope_limits()[side]
    best = -math.inf
    for br in (spec.nu, spec.tilde):
        if br.is_empty:
            continue
        if math.isclose(br.slope_limits()[side], target, rel_tol=1e-13, abs_tol=1e-15):
            best = max(best, br.edge_values()[1 - side])
    return best


@lru_cache(maxsize=64)
def _kinks(spec: LqSpectrum) -> tuple[float, ...]:
    from .transitions import scan_transitions

    return tuple(t.q_star for t in scan_transitions(spec.ws, spec=spec).transitions)


def _max(spec: LqSpectrum, alpha: float) -> float:
    """Conjugate of max(tau_nu, tau_tilde).

    alpha q + tau_mu(q) is convex, so its minimizer is either a kink of
    tau_mu or a stationary point of the branch active there. Every candidate
    gives an upper bound, and the true minimizer is among them.
    """
    if not spec.closed:
        raise NoClosedForm("conjugate of tau_mu needs a closed-form tau_nu")
    s_lo, s_hi = spec.slope_limits()
    a_lo, a_hi = -s_hi, -s_lo
    tol = EDGE_TOL * max(1.0, abs(alpha))
    if abs(alpha - a_lo) <= tol:
        return _edge_of_max(spec, 1)
    if abs(alpha - a_hi) <= tol:
        return _edge_of_max(spec, 0)
    if alpha < a_lo or alpha > a_hi:
        return -math.inf
    cands = list(_kinks(spec))
    for br in (spec.nu, spec.tilde):
        if br.is_empty or br.is_linear:
            continue
        b_lo, b_hi = br.alpha_range()
        if b_lo < alpha < b_hi:
            q = _stationary(br, alpha)
            if q is not None:
                cands.append(q)
    if not cands:
        return _edge_of_max(spec, 1 if alpha - a_lo < a_hi - alpha else 0)
    return min(alpha * q + float(spec(q)) for q in cands)


def legendre(tau, alpha: float) -> float:
    """tau*(alpha); -inf outside the range of slopes."""
    alpha = float(alpha)
    if isinstance(tau, ClosedFormTau):
        return _closed(tau, alpha)
    if isinstance(tau, TauCurve):
        return _curve(tau, alpha)
    if isinstance(tau, LqSpectrum):
        return _max(tau, alpha)
    raise TypeError(f"cannot conjugate {type(tau).__name__}")


def legendre_curve(tau, alphas) -> np.ndarray:
    return np.array([legendre(tau, a) for a in np.asarray(alphas, dtype=float)])
