"""tau_nu(q) for non-multinomial nu as the log of a transfer-operator spectral radius.

Write r_I = (1, 1) M_I. Then 2 nu(I) = |r_I|_1 and r_{I eps} = r_I M_eps, so
with x the first coordinate of r_I / |r_I|_1,

    sum_{|I| = n} nu(I)^q  ~  <L_q^n 1, delta_{1/2}>,
    (L_q f)(x) = sum_eps s_eps(x)^q f(g_eps(x)),

where s_eps(x) = |(x, 1-x) M_eps|_1 and g_eps(x) is the normalized first
coordinate of (x, 1-x) M_eps. tau_nu(q) = log_base rho(L_q). The operator is
discretized by barycentric interpolation at Chebyshev points of the smallest
interval containing 1/2 and invariant under every g_eps; the maps are
Moebius, so the discretization converges spectrally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from ..measure import WeightSystem

HULL_TOL = 1e-15
MIN_NODES = 16
MAX_NODES = 256


def _maps(ws: WeightSystem, x: np.ndarray):
    """(g_eps(x), s_eps(x)) for every digit, each of shape (base, len(x))."""
    xs = np.stack([x, 1 - x], -1)
    v = np.stack([xs @ m for m in ws.matrices])
    s = v.sum(-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        g = np.where(s > 0, v[..., 0] / np.where(s > 0, s, 1), 0.5)
    return g, s


def invariant_hull(ws: WeightSystem, max_iter: int = 100_000) -> tuple[float, float]:
    lo = hi = 0.5
    for _ in range(max_iter):
        g, _ = _maps(ws, np.array([lo, hi]))
        nlo, nhi = min(lo, g.min()), max(hi, g.max())
        if nlo > lo - HULL_TOL and nhi < hi + HULL_TOL:
            return nlo, nhi
        lo, hi = nlo, nhi
    return lo, hi


def _cheb(n: int, a: float, b: float):
    k = np.arange(n)
    x = np.cos(np.pi * k / (n - 1))[::-1]
    w = (-1.0) ** k
    w[0] *= 0.5
    w[-1] *= 0.5
    return a + (b - a) * (x + 1) / 2, w


def _interp(nodes, w, y):
    d = y[:, None] - nodes[None, :]
    exact = d == 0
    d[exact] = 1
    c = w[None, :] / d
    mat = c / c.sum(1, keepdims=True)
    hit = exact.any(1)
    mat[hit] = exact[hit].astype(float)
    return mat


@dataclass(frozen=True)
class _Eig:
    log_rho: float
    dlog_rho: float


class NuPressure:
    """Numerical tau_nu for an arbitrary weight system."""

    def __init__(self, ws: WeightSystem, tol: float = 1e-13):
        self.ws = ws
        self.tol = tol
        self.hull = invariant_hull(ws)
        self._solve = lru_cache(maxsize=4096)(self._solve_uncached)

    @property
    def degenerate(self) -> bool:
        return self.hull[1] - self.hull[0] < 1e-12

    def _pieces(self, n):
        x, w = _cheb(n, *self.hull)
        g, s = _maps(self.ws, x)
        mats = [_interp(x, w, g[e]) for e in range(self.ws.base)]
        return s, mats

    def _eig(self, q: float, n: int, want_deriv: bool) -> _Eig:
        s, mats = self._pieces(n)
        with np.errstate(divide="ignore"):
            ls = np.where(s > 0, np.log(np.where(s > 0, s, 1)), -np.inf)
        shift = np.max(q * ls[np.isfinite(ls)])
        k = np.where(np.isfinite(ls), np.exp(q * ls - shift), 0.0)
        op = sum(k[e][:, None] * mats[e] for e in range(self.ws.base))
        if not want_deriv:
            ev = np.linalg.eigvals(op)
            return _Eig(math.log(ev[np.argmax(ev.real)].real) + shift, math.nan)
        ev, left, right = scipy.linalg.eig(op, left=True, right=True)
        i = np.argmax(ev.real)
        lam = ev[i].real
        dls = np.where(np.isfinite(ls), ls, 0.0)
        dop = sum((k[e] * dls[e])[:, None] * mats[e] for e in range(self.ws.base))
        psi, phi = left[:, i], right[:, i]
        dlam = (psi.conj() @ dop @ phi) / (psi.conj() @ phi)
        return _Eig(math.log(lam) + shift, float(dlam.real) / lam)

    def _solve_uncached(self, q: float) -> _Eig:
        if self.degenerate:
            _, s = _maps(self.ws, np.array([self.hull[0]]))
            s = s[:, 0][s[:, 0] > 0]
            ls = np.log(s)
            z = np.exp(q * ls - np.max(q * ls))
            return _Eig(
                math.log(z.sum()) + float(np.max(q * ls)), float((z * ls).sum() / z.sum())
            )
        n = MIN_NODES
        prev = self._eig(q, n, False).log_rho
        while n < MAX_NODES:
            n *= 2
            cur = self._eig(q, n, False).log_rho
            if abs(cur - prev) <= self.tol * max(1.0, abs(cur)):
                break
            prev = cur
        return self._eig(q, n, True)

    def __call__(self, q):
        lb = math.log(self.ws.base)
        arr = np.asarray(q, dtype=float)
        out = np.array([self._solve(float(v)).log_rho / lb for v in arr.ravel()])
        return out.reshape(arr.shape)[()]

    def deriv(self, q):
        lb = math.log(self.ws.base)
        arr = np.asarray(q, dtype=float)
        out = np.array([self._solve(float(v)).dlog_rho / lb for v in arr.ravel()])
        return out.reshape(arr.shape)[()]
