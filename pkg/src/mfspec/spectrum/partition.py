"""Finite-depth partition sums sum_{I in F_n, m(I) > 0} m(I)^q and tau_n(q).

Leaves are enumerated generation-wide with numpy: the depth-n tree is split
into base**split prefixes; every prefix matrix multiplies the shared block of
suffix vectors, and the per-prefix log-sums are combined in a fixed order so
the result does not depend on the number of worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .. import config
from ..errors import DepthTooLarge
from ..measure import WeightSystem, level_matrices, level_vectors

TARGETS = ("mu", "nu")


def _plan(base: int, n: int, split: int) -> int:
    leaf_depth = max(0, int(math.floor(math.log(config.CHUNK_ROWS, base))))
    return min(n, max(split, n - leaf_depth))


def partition_log_sum(
    ws: WeightSystem,
    n: int,
    q,
    target: str = "mu",
    *,
    n_max: int = config.DEFAULT_N_MAX,
    split: int = config.DEFAULT_SPLIT,
    workers: int = 1,
):
    """log sum_{I in F_n, m(I) > 0} m(I)^q for m = mu or nu.

    ``q`` may be a scalar or an array; the result has the same shape.
    """
    if target not in TARGETS:
        raise ValueError(f"target must be one of {TARGETS}")
    if n < 1 or n > n_max:
        raise DepthTooLarge(f"depth {n} outside [1, {n_max}]")
    leaves = ws.base**n
    if leaves > config.budget():
        raise DepthTooLarge(f"{leaves} leaves exceed the budget {config.budget()}")
    qs = np.atleast_1d(np.asarray(q, dtype=float))

    s = _plan(ws.base, n, split)
    suffix = level_vectors(ws, n - s)
    prefixes = level_matrices(ws, s)

    def chunk(k: int) -> np.ndarray:
        v = suffix @ prefixes[k].T
        mass = v[:, 0] if target == "mu" else 0.5 * (v[:, 0] + v[:, 1])
        logs = np.log(mass[mass > 0])
        if logs.size == 0:
            return np.full(qs.shape, -np.inf)
        return np.array([logsumexp(qq * logs) for qq in qs])

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(chunk, range(len(prefixes))))
    else:
        parts = [chunk(k) for k in range(len(prefixes))]
    out = logsumexp(np.array(parts), axis=0)
    return float(out[0]) if np.ndim(q) == 0 else out.reshape(np.shape(q))


def tau_n(ws: WeightSystem, n: int, q, target: str = "mu", **kw):
    """tau_n(q) = log(sum m(I)^q) / (n log base)."""
    return partition_log_sum(ws, n, q, target, **kw) / (n * math.log(ws.base))


def log_partition_sequence(ws: WeightSystem, n_max: int, q: float, target: str = "mu"):
    """log u_n for n = 0..n_max (u_0 = 1), enumerating each generation once."""
    if ws.base**n_max > config.budget():
        raise DepthTooLarge(f"{ws.base ** n_max} leaves exceed the budget")
    out = [0.0]
    v = np.ones((1, 2))
    for _ in range(n_max):
        v = np.concatenate([v @ m.T for m in ws.matrices])
        mass = v[:, 0] if target == "mu" else 0.5 * (v[:, 0] + v[:, 1])
        out.append(float(logsumexp(q * np.log(mass[mass > 0]))))
    return np.array(out)


def nu_qb_constant(ws: WeightSystem, depth: int = 6) -> float:
    """Smallest C with C^-1 nu(I)nu(J) <= nu(IJ) <= C nu(I)nu(J), |I|,|J| <= depth.

    With r = (1,1) M_I and c = M_J (1,1)^T normalized to unit l1 norm,
    nu(IJ) / (nu(I) nu(J)) = 2 (x y + (1-x)(1-y)) where x = r_0, y = c_0. The
    form is bilinear, so the extremes over all pairs sit at the corners of
    the (x, y) box and only the ranges of x and y are needed.
    """
    xs, ys = [0.5], [0.5]
    for n in range(1, depth + 1):
        mats = level_matrices(ws, n)
        r = mats.sum(axis=1)
        c = mats.sum(axis=2)
        xs.extend([(r[:, 0] / r.sum(1)).min(), (r[:, 0] / r.sum(1)).max()])
        ys.extend([(c[:, 0] / c.sum(1)).min(), (c[:, 0] / c.sum(1)).max()])
    corners = [2 * (x * y + (1 - x) * (1 - y)) for x in (min(xs), max(xs)) for y in (min(ys), max(ys))]
    return max(max(corners), 1.0 / min(corners))


@dataclass(frozen=True)
class NuEstimate:
    estimate: float
    lower: float
    upper: float
    depth: int
    qb_constant: float
    reliable: bool

    @property
    def width(self) -> float:
        return self.upper - self.lower


def tau_nu_numeric(
    ws: WeightSystem, q: float, n_max: int = 10, qb_constant: float | None = None, qb_depth: int = 6
) -> NuEstimate:
    """tau_n(q) for nu at depth n_max with Fekete brackets.

    nu(IJ) <= 2 nu(I) nu(J) always holds; nu(IJ) >= nu(I) nu(J) / C holds
    when nu is quasi-Bernoulli. Together they make log u_n sub- and
    superadditive up to constants, which gives
    tau_n - K_lo / (n ln base) <= tau <= tau_n + K_hi / (n ln base)
    with (K_lo, K_hi) = (q ln C, q ln 2) for q >= 0 and
    (|q| ln 2, |q| ln C) for q < 0. The bracket is only trustworthy when
    the empirical C is a true constant, i.e. when nu is quasi-Bernoulli.
    """
    from .dimension import NuQB, check_nu_qb

    reliable = check_nu_qb(ws) is not NuQB.NOT_QB
    if qb_constant is None:
        qb_constant = nu_qb_constant(ws, qb_depth)
    if q == 1.0:
        return NuEstimate(0.0, 0.0, 0.0, n_max, qb_constant, reliable)
    if q == 0.0:
        return NuEstimate(1.0, 1.0, 1.0, n_max, qb_constant, reliable)
    est = tau_n(ws, n_max, q, "nu", n_max=max(n_max, config.DEFAULT_N_MAX))
    scale = n_max * math.log(ws.base)
    lc, l2 = math.log(qb_constant), math.log(2.0)
    if q >= 0:
        k_lo, k_hi = q * lc, q * l2
    else:
        k_lo, k_hi = -q * l2, -q * lc
    return NuEstimate(est, est - k_lo / scale, est + k_hi / scale, n_max, qb_constant, reliable)
