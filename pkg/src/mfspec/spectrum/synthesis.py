"""Search for weight systems whose tau_mu has exactly N phase transitions.

Templates. For odd N, base 2N and B = {N, ..., 2N-1}: p_j = a_j and
p_{2N-1-j} = b_j for j < N, p_{j+base} = a_j - b_j, every other weight 0.
nu is multinomial with atoms a_j (each twice) and tau_tilde has atoms b_j.
For even N, base 2N+1 and B = {N+1, ..., 2N}: the same for j < N plus a
middle digit with p_N = p_{N+base} = c/2, which adds the nu atom c; the
template requires c < min b.

Free parameters are laid out as a log-ladder: groups of atoms sit at log
positions separated by geometrically growing gaps, alternating between b's
and a's so that tau_nu - tau_tilde changes sign once per rung. Small random
spreads inside each group and random ladder ratios make up the search.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import GridTooCoarse, InputError, SearchExhausted
from ..measure import WeightSystem, validate
from .transitions import scan_transitions

MAX_N = 8
# keep every atom well inside the double range
LOG_SPAN = 600.0


@dataclass(frozen=True)
class SearchConfig:
    seed: int = 0
    max_attempts: int = 5000
    ratio: tuple[float, float] = (4.0, 10.0)
    first_gap: tuple[float, float] = (0.05, 0.4)
    spread: float = 0.05
    q_min: float = -200.0
    samples: int = 2000
    # geometric sub-grid size; None picks 0 for n <= 5 and 4000 above
    log_samples: int | None = None


@dataclass(frozen=True)
class Synthesis:
    ws: WeightSystem
    n: int
    seed: int
    attempt: int
    q_stars: tuple[float, ...]
    log_samples: int = 0


def _groups(n: int):
    if n % 2:
        g = [("b", 1)]
        for _ in range((n - 1) // 2):
            g += [("a", 1), ("b", 2)]
        g.append(("a", (n + 1) // 2))
    else:
        g = [("c", 1)]
        for k in range(n // 2):
            g.append(("b", 2))
            g.append(("a", 1) if k < n // 2 - 1 else ("a", n // 2 + 1))
    return g


def _draw(n: int, cfg: SearchConfig, rng: np.random.Generator):
    """Log-values of the a, b (and c) atoms, before normalization."""
    groups = _groups(n)
    g1 = rng.uniform(*cfg.first_gap)
    r = rng.uniform(*cfg.ratio)
    pos = 0.0
    la, lb, lc = [], [], None
    for k, (kind, size) in enumerate(groups):
        if k:
            pos += g1 * r ** (k - 1)
        vals = pos + cfg.spread * g1 * rng.uniform(-1.0, 1.0, size)
        if kind == "a":
            la.extend(vals)
        elif kind == "b":
            lb.extend(vals)
        else:
            lc = float(vals[0])
    la, lb = np.array(la), np.array(lb)
    # scaling every log-atom by k maps g(q) to g(k q), so a too-wide ladder
    # is squeezed instead of being allowed to underflow
    span = pos + 2 * cfg.spread * g1
    if span > LOG_SPAN:
        k = LOG_SPAN / span
        la, lb = la * k, lb * k
        lc = None if lc is None else lc * k
    return la, lb, lc


def template(a, b, c=None) -> WeightSystem:
    """Weight system of the N-transition template from unnormalized atoms.

    Pairs the k-th smallest b with the k-th smallest a, which is the only
    pairing that can satisfy b_j < a_j for every j when one exists.
    """
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    n = len(a)
    if len(b) != n or np.any(b >= a):
        raise ValueError("need b_(k) < a_(k) for the sorted atoms")
    total = a.sum() + (c / 2 if c is not None else 0.0)
    a, b = a / (2 * total), b / (2 * total)
    if c is None:
        l = 2 * n
        p = np.zeros(2 * l)
        p[:n] = a
        p[l - 1 - np.arange(n)] = b
        p[l + np.arange(n)] = a - b
    else:
        c = c / (2 * total)
        if c >= b.min():
            raise ValueError("the middle atom must be smaller than every b")
        l = 2 * n + 1
        p = np.zeros(2 * l)
        p[:n] = a
        p[l - 1 - np.arange(n)] = b
        p[l + np.arange(n)] = a - b
        p[n] = p[n + l] = c / 2
    # absorb the rounding of the normalization into the largest weight
    p[np.argmax(p)] += 1.0 - math.fsum(p)
    return validate(p, l)


def synthesize_transitions(n: int, config: SearchConfig | None = None) -> Synthesis:
    """Weights with exactly ``n`` transversal phase transitions in [q_min, 0]."""
    cfg = config or SearchConfig()
    if not 1 <= n <= MAX_N:
        raise ValueError(f"n must be in [1, {MAX_N}]")
    log_samples = cfg.log_samples
    if log_samples is None:
        log_samples = 0 if n <= 5 else 4000
    rng = np.random.default_rng(cfg.seed)
    for attempt in range(1, cfg.max_attempts + 1):
        la, lb, lc = _draw(n, cfg, rng)
        top = max(la.max(), lb.max())
        a, b = np.exp(la - top), np.exp(lb - top)
        c = None if lc is None else math.exp(lc - top)
        try:
            ws = template(a, b, c)
            scan = scan_transitions(
                ws, q_min=cfg.q_min, samples=cfg.samples, log_samples=log_samples
            )
        except (ValueError, InputError, GridTooCoarse):
            continue
        if scan.tangencies or scan.unresolved_tail:
            continue
        if len(scan.transitions) == n:
            return Synthesis(
                ws, n, cfg.seed, attempt, tuple(t.q_star for t in scan.transitions), log_samples
            )
    raise SearchExhausted(f"no {n}-transition system in {cfg.max_attempts} attempts (seed {cfg.seed})")
