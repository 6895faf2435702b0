"""Finite-depth certification of the structural inequalities behind tau_mu.

* weak quasi-Bernoulli: C^-1 mu(I) mu(J) <= mu(I cap sigma^-(n+1) J) <= C mu(I) mu(sigma^-2 J)
* quasi-Bernoulli failure along J = 1^n
* the factor-2 dichotomy mu(I) m(J) <= 2 mu(IJ) with m = mu or mu o T
* submultiplicativity u_{n+p} <= 2^-q u_n u_p of the partition sums at q < 0
* a truncated Frostman measure at q < 0
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from . import config
from .errors import BudgetExceeded, DepthTooLarge, NonfiniteTau, WrongShape, ZeroMass
from .measure import (
    WeightSystem,
    Word,
    all_words,
    level_matrices,
    level_vectors,
    measures,
    word_product,
)
from .spectrum.lq import lq_spectrum
from .spectrum.partition import log_partition_sequence

WQB_MAX_DEPTH = 6
SWEEP_MAX_DEPTH = 6


@dataclass(frozen=True)
class ConstantReport:
    """Extremes of a ratio over tested word (or depth) pairs.

    For the weak quasi-Bernoulli check ``best_lower`` is the smallest lower
    ratio and ``best_upper`` the largest upper ratio; for submultiplicativity
    they are the extremes of log u_{n+p} - log u_n - log u_p.
    """

    depth_pairs: tuple
    best_lower: float
    best_upper: float
    witness_lo: tuple
    witness_hi: tuple
    bound: Optional[float] = None

    @property
    def constant(self) -> float:
        """Smallest C validating both sides of the weak quasi-Bernoulli bound."""
        return max(1.0 / self.best_lower, self.best_upper)

    @property
    def slack(self) -> float:
        return self.bound - self.best_upper


# ---------------------------------------------------------------------------
# weak quasi-Bernoulli


def _rows_cols(ws: WeightSystem, depth: int):
    """Top rows e1^T M_I and columns M_I (1,1)^T of every word of one depth."""
    mats = level_matrices(ws, depth)
    return mats[:, 0, :], mats.sum(axis=2)


def check_wqb(ws: WeightSystem, max_depth: int = 5, min_depth: int = 1) -> ConstantReport:
    """Exhaustive weak quasi-Bernoulli ratios over |I| in [min_depth, max_depth], |J| <= max_depth.

    mu(I cap sigma^-(n+1) J) = e1^T M_I S M_J 1 with S = sum_eps M_eps, and
    mu(sigma^-2 J) = e1^T S^2 M_J 1.
    """
    if max_depth > WQB_MAX_DEPTH or ws.base ** (2 * max_depth) > config.budget():
        raise DepthTooLarge(f"weak quasi-Bernoulli sweep at depth {max_depth} is over budget")
    s = sum(ws.matrices)
    s2row = (s @ s)[0]
    lo_best, hi_best = math.inf, -math.inf
    lo_wit = hi_wit = None
    pairs = []
    for n in range(min_depth, max_depth + 1):
        rows, _ = _rows_cols(ws, n)
        rs = rows @ s
        mu_i = rows.sum(1)
        ok_i = mu_i > 0
        for p in range(0, max_depth + 1):
            pairs.append((n, p))
            _, cols = _rows_cols(ws, p)
            mu_j = cols[:, 0]
            ok_j = mu_j > 0
            joint = rs[ok_i] @ cols[ok_j].T
            base = np.outer(mu_i[ok_i], mu_j[ok_j])
            lower = joint / base
            upper = joint / np.outer(mu_i[ok_i], cols[ok_j] @ s2row)
            ii, jj = np.flatnonzero(ok_i), np.flatnonzero(ok_j)
            k = np.unravel_index(np.argmin(lower), lower.shape)
            if lower[k] < lo_best:
                lo_best, lo_wit = float(lower[k]), ((n, int(ii[k[0]])), (p, int(jj[k[1]])))
            k = np.unravel_index(np.argmax(upper), upper.shape)
            if upper[k] > hi_best:
                hi_best, hi_wit = float(upper[k]), ((n, int(ii[k[0]])), (p, int(jj[k[1]])))
    return ConstantReport(tuple(pairs), lo_best, hi_best, _words(ws, lo_wit), _words(ws, hi_wit))


def _words(ws, wit):
    """Turn ((depth, index), (depth, index)) into a pair of words."""
    out = []
    for depth, idx in wit:
        digits = [(idx // ws.base ** (depth - 1 - k)) % ws.base for k in range(depth)]
        out.append(Word(ws.base, tuple(digits)))
    return tuple(out)


def wqb_ratios(ws: WeightSystem, i: Word, j: Word) -> tuple[float, float]:
    """(lower, upper) weak quasi-Bernoulli ratios of one pair, by direct products."""
    s = sum(ws.matrices)
    mi = word_product(ws, i).value()
    mj = word_product(ws, j).value()
    joint = (mi @ s @ mj)[0].sum()
    mu_i, mu_j = mi[0].sum(), mj[0].sum()
    shifted = (s @ s @ mj)[0].sum()
    return joint / (mu_i * mu_j), joint / (mu_i * shifted)


# ---------------------------------------------------------------------------
# quasi-Bernoulli failure


def _check_failure_shape(ws: WeightSystem):
    p = ws.weights
    if ws.base != 2:
        raise WrongShape("needs base 2")
    if not (p[0] > p[1] and p[0] * p[1] * p[2] > 0 and p[3] == 0):
        raise WrongShape("needs p_0 > p_1, p_0 p_1 p_2 > 0 and p_3 = 0")


def qb_failure_log_ratio(ws: WeightSystem, n: int) -> float:
    """log of mu(I_0 J) / (mu(I_0) mu(J)) for J = 1^n."""
    _check_failure_shape(ws)
    if n < 0 or n > 10_000:
        raise DepthTooLarge("n must be in [0, 10000]")
    j = Word(2, (1,) * n)
    a = measures(ws, Word(2, (0,) + j.digits)).log_mu
    return a - measures(ws, Word(2, (0,))).log_mu - measures(ws, j).log_mu


def qb_failure_ratio(ws: WeightSystem, n: int) -> float:
    return math.exp(qb_failure_log_ratio(ws, n))


# ---------------------------------------------------------------------------
# factor-2 dichotomy


class Side(enum.Enum):
    MU = "SideMu"
    MU_T = "SideMuT"


def lemma1_classify(ws: WeightSystem, w: Word) -> Side:
    """Which of mu(J), mu o T(J) the word w controls.

    mu(IJ) = A mu(J) + B mu o T(J) with (A, B) the top row of M_I and
    mu(I) = A + B <= 2 max(A, B), so mu(I) mu(J) <= 2 mu(IJ) when A >= B and
    mu(I) mu o T(J) <= 2 mu(IJ) otherwise.
    """
    m = word_product(ws, w)
    a, b = m.entries[0]
    if a + b == 0:
        raise ZeroMass(f"mu({w}) = 0")
    return Side.MU if a >= b else Side.MU_T


@dataclass(frozen=True)
class SweepReport:
    max_depth: int
    pairs: int
    violations: int
    worst_ratio: float


def lemma1_sweep(ws: WeightSystem, max_depth: int = SWEEP_MAX_DEPTH, chunk: int | None = None) -> SweepReport:
    """Check the classified side's inequality for every |I|, |J| <= max_depth.

    mu(IJ) is taken from the identity A mu(J) + B mu o T(J), the inequality
    is tested in floating point without tolerance.
    """
    rows = np.concatenate([level_matrices(ws, d)[:, 0, :] for d in range(0, max_depth + 1)])
    cols = np.concatenate([level_vectors(ws, d) for d in range(0, max_depth + 1)])
    if len(rows) * len(cols) > config.budget() * 10:
        raise DepthTooLarge("lemma sweep over budget")
    mu_i = rows.sum(1)
    rows, mu_i = rows[mu_i > 0], mu_i[mu_i > 0]
    side_mu = rows[:, 0] >= rows[:, 1]
    if chunk is None:
        # keep each (rows x cols) block near 4M entries
        chunk = max(1, (1 << 22) // len(cols))
    violations, worst, pairs = 0, 0.0, 0
    for start in range(0, len(rows), chunk):
        r = rows[start : start + chunk]
        m = mu_i[start : start + chunk]
        sm = side_mu[start : start + chunk]
        joint = np.outer(r[:, 0], cols[:, 0]) + np.outer(r[:, 1], cols[:, 1])
        side = np.where(sm[:, None], cols[None, :, 0], cols[None, :, 1])
        lhs = m[:, None] * side
        rhs = 2 * joint
        violations += int(np.count_nonzero(lhs > rhs))
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(rhs > 0, lhs / rhs, 0.0)
        worst = max(worst, float(ratio.max()))
        pairs += lhs.size
    return SweepReport(max_depth, pairs, violations, worst)


# ---------------------------------------------------------------------------
# submultiplicativity of partition sums


def check_submultiplicativity(ws: WeightSystem, q: float, n_max: int = 10, target: str = "mu") -> ConstantReport:
    """Extremes of log u_{n+p} - log u_n - log u_p over n, p >= 1, n + p <= n_max.

    The bound is -q ln 2 (u_n = sum mu(I)^q over nonzero intervals).
    """
    if q >= 0:
        raise ValueError("submultiplicativity is checked for q < 0")
    if n_max > config.DEFAULT_N_MAX:
        raise DepthTooLarge(f"n_max {n_max} above {config.DEFAULT_N_MAX}")
    lu = log_partition_sequence(ws, n_max, q, target)
    pairs, excess = [], []
    for n in range(1, n_max):
        for p in range(1, n_max - n + 1):
            pairs.append((n, p))
            excess.append(lu[n + p] - lu[n] - lu[p])
    excess = np.array(excess)
    lo, hi = int(np.argmin(excess)), int(np.argmax(excess))
    return ConstantReport(
        tuple(pairs), float(excess[lo]), float(excess[hi]), pairs[lo], pairs[hi], -q * math.log(2)
    )


# ---------------------------------------------------------------------------
# truncated Frostman measure


@dataclass(frozen=True)
class FrostmanApprox:
    q: float
    s: float
    tau_hat: float
    truncation_depth: int
    output_depth: int
    table: np.ndarray = field(repr=False)
    log_z: float
    frostman_constant: float

    @property
    def z_value(self) -> float:
        return math.exp(self.log_z)

    def as_dict(self) -> dict:
        words = all_words(len(self.table) and round(len(self.table) ** (1 / self.output_depth)), self.output_depth)
        return {str(w): float(v) for w, v in zip(words, self.table)}


def frostman_approx(ws: WeightSystem, q: float, delta: float, N: int, m: int) -> FrostmanApprox:
    """nu_s on F_m for s = tau_mu(q) + delta, with Z and Z_I truncated at depth N.

    Z(s) nu_s(I) = base^-m sum_{k<=m} mu(I_k)^q base^{k(1-s)}
                   + sum_{n=1}^{N-m} base^{-(m+n)s} sum_{|J|=n} mu(IJ)^q
    where I_k is the depth-k prefix of I. The truncated table is normalized
    by its own total, Z_N(s) = sum_{n<=N} u_n base^{-ns}.
    """
    if not 1 <= m <= N:
        raise ValueError("need 1 <= m <= N")
    if ws.base**N > config.budget():
        raise BudgetExceeded(f"{ws.base ** N} leaves exceed the budget")
    tau_hat = float(lq_spectrum(ws, allow_numeric=False)(q))
    if not math.isfinite(tau_hat):
        raise NonfiniteTau(f"tau_mu({q}) = {tau_hat}")
    s = tau_hat + delta
    lb = math.log(ws.base)
    size = ws.base**m
    acc = np.full(size, -np.inf)
    v = np.ones((1, 2))
    log_mu_m = None
    for d in range(1, N + 1):
        v = np.concatenate([v @ mm.T for mm in ws.matrices])
        mu = v[:, 0]
        with np.errstate(divide="ignore"):
            lmu = np.where(mu > 0, np.log(np.where(mu > 0, mu, 1.0)), -np.inf)
        # mu = 0 intervals carry no weight, even at q < 0
        term = np.where(np.isfinite(lmu), q * lmu, -np.inf)
        if d <= m:
            term = term - m * lb + d * (1 - s) * lb
            acc = np.logaddexp(acc, np.repeat(term, ws.base ** (m - d)))
            if d == m:
                log_mu_m = lmu
        else:
            term = term - d * s * lb
            acc = np.logaddexp(acc, logsumexp(term.reshape(size, -1), axis=1))
    log_z = float(logsumexp(acc))
    table = np.exp(acc - log_z)
    ok = np.isfinite(log_mu_m)
    ratio = (acc[ok] - log_z) - q * log_mu_m[ok] + m * tau_hat * lb
    return FrostmanApprox(q, s, tau_hat, N, m, table, log_z, float(np.exp(ratio.max())))
