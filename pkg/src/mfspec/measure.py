"""Self-similar measures with overlaps on [0, 1] and their transfer matrices.

The measure is the fixed point of ``mu = sum_i p_i mu o S_i^{-1}`` for the
2*base similitudes ``S_i(x) = (x + i)/base`` (i < base) and
``S_{i+base}(x) = (i + 1 - x)/base``. Masses of base-adic intervals are
obtained from 2x2 transfer matrices::

    (mu(eps I), mu(T eps I)) = M_eps (mu(I), mu(T I)),
    M_eps = [[p_eps,            p_{eps+base}],
             [p_{2 base-1-eps}, p_{base-1-eps}]]

so that mu(I) is the first row sum of ``M_I = M_{e1} ... M_{en}`` and
nu(I) = (mu(I) + mu(T I))/2 is half the total sum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BadLength,
    BaseMismatch,
    DigitOutOfRange,
    EmptyColumn,
    NegativeWeight,
    SumNotOne,
)

SUM_TOL = 1e-12


@dataclass(frozen=True)
class WeightSystem:
    """Base ``base`` and the 2*base probability weights p_0..p_{2 base-1}.

    Construct through :func:`validate` (or directly; ``__post_init__`` runs
    the same checks).
    """

    base: int
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        _check(self.weights, self.base)

    @cached_property
    def matrices(self) -> tuple[np.ndarray, ...]:
        return tuple(_raw_matrix(self.weights, self.base, e) for e in range(self.base))

    @cached_property
    def p(self) -> np.ndarray:
        arr = np.array(self.weights)
        arr.setflags(write=False)
        return arr

    def as_dict(self) -> dict:
        return {"base": self.base, "weights": list(self.weights)}


def _check(weights: Sequence[float], base: int) -> None:
    if not isinstance(base, (int, np.integer)) or base < 2:
        raise BadLength(f"base must be an integer >= 2, got {base!r}")
    if len(weights) != 2 * base:
        raise BadLength(f"expected {2 * base} weights for base {base}, got {len(weights)}")
    for i, w in enumerate(weights):
        if not math.isfinite(w) or w < 0:
            raise NegativeWeight(f"p_{i} = {w!r} is negative or not finite")
    for i in range(base):
        if weights[i] + weights[i + base] == 0:
            raise EmptyColumn(f"p_{i} + p_{i + base} = 0: support is not [0, 1]")
    total = math.fsum(weights)
    if abs(total - 1.0) > SUM_TOL:
        raise SumNotOne(f"weights sum to {total!r}, not 1")


def validate(weights: Iterable, base: int) -> WeightSystem:
    """Parse ``weights`` (numbers or decimal strings) and check the invariants.

    Raises BadLength, NegativeWeight, EmptyColumn or SumNotOne, in that order.
    """
    try:
        parsed = tuple(float(w) for w in weights)
    except (TypeError, ValueError) as exc:
        raise BadLength(f"weights are not a sequence of reals: {exc}") from None
    return WeightSystem(int(base), parsed)


def _raw_matrix(p: Sequence[float], base: int, e: int) -> np.ndarray:
    return np.array(
        [[p[e], p[e + base]], [p[2 * base - 1 - e], p[base - 1 - e]]], dtype=float
    )


@dataclass(frozen=True)
class Word:
    """A base-adic interval I_{e1...en}; the empty word is [0, 1)."""

    base: int
    digits: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))
        for d in self.digits:
            if not 0 <= d < self.base:
                raise DigitOutOfRange(f"digit {d} not in [0, {self.base})")

    @property
    def depth(self) -> int:
        return len(self.digits)

    def __len__(self):
        return len(self.digits)

    def __str__(self):
        return "".join(str(d) for d in self.digits) if self.base <= 10 else ",".join(
            map(str, self.digits)
        )

    @classmethod
    def parse(cls, text: str, base: int) -> "Word":
        text = text.strip()
        if "," in text:
            return cls(base, tuple(int(t) for t in text.split(",") if t))
        return cls(base, tuple(int(c) for c in text))


def reflect(w: Word) -> Word:
    """Image of the word under T(x) = 1 - x: each digit e becomes base-1-e."""
    return Word(w.base, tuple(w.base - 1 - d for d in w.digits))


def concat(a: Word, b: Word) -> Word:
    if a.base != b.base:
        raise BaseMismatch(f"cannot concatenate base-{a.base} and base-{b.base} words")
    return Word(a.base, a.digits + b.digits)


@dataclass(frozen=True)
class ScaledMatrix:
    """Nonnegative 2x2 matrix stored as ``entries * 2**exp2``.

    Renormalization only ever multiplies by powers of two, so it is exact
    and zero entries stay exactly zero.
    """

    entries: np.ndarray
    exp2: int = 0
    base: int = 2

    def __post_init__(self):
        ent = np.array(self.entries, dtype=float)
        peak = ent.max()
        exp2 = int(self.exp2)
        if peak <= 0:
            raise ValueError("ScaledMatrix must have a nonzero entry")
        if peak > 1.0 or peak < 1.0 / self.base:
            _, e = math.frexp(peak)
            ent = np.ldexp(ent, -e)
            exp2 += e
        ent.setflags(write=False)
        object.__setattr__(self, "entries", ent)
        object.__setattr__(self, "exp2", exp2)

    @property
    def log_scale(self) -> float:
        return self.exp2 * math.log(2.0)

    def value(self) -> np.ndarray:
        return np.ldexp(self.entries, self.exp2)

    def __matmul__(self, other: "ScaledMatrix") -> "ScaledMatrix":
        return ScaledMatrix(self.entries @ other.entries, self.exp2 + other.exp2, self.base)

    @classmethod
    def identity(cls, base: int = 2) -> "ScaledMatrix":
        return cls(np.eye(2), 0, base)


def transfer_matrix(ws: WeightSystem, e: int) -> ScaledMatrix:
    if not 0 <= e < ws.base:
        raise DigitOutOfRange(f"digit {e} not in [0, {ws.base})")
    return ScaledMatrix(ws.matrices[e], 0, ws.base)


def word_product(ws: WeightSystem, w: Word) -> ScaledMatrix:
    """M_w = M_{e1} ... M_{en}, renormalized after every multiply."""
    if w.base != ws.base:
        raise BaseMismatch(f"word base {w.base} != weight base {ws.base}")
    ent = np.eye(2)
    exp2 = 0
    lo = 1.0 / ws.base
    mats = ws.matrices
    for d in w.digits:
        ent = ent @ mats[d]
        peak = ent.max()
        # support invariant: a product of these matrices never vanishes
        assert peak > 0, "fully zero transfer-matrix product"
        if peak > 1.0 or peak < lo:
            _, e = math.frexp(peak)
            ent = np.ldexp(ent, -e)
            exp2 += e
    return ScaledMatrix(ent, exp2, ws.base)


@dataclass(frozen=True)
class MeasureTriple:
    log_mu: float
    log_mu_t: float
    log_nu: float

    @property
    def mu(self) -> float:
        return math.exp(self.log_mu)

    @property
    def mu_t(self) -> float:
        return math.exp(self.log_mu_t)

    @property
    def nu(self) -> float:
        return math.exp(self.log_nu)


def _log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def measures_of(m: ScaledMatrix) -> MeasureTriple:
    rows = m.entries.sum(axis=1)
    s = m.log_scale
    return MeasureTriple(
        _log(rows[0]) + s, _log(rows[1]) + s, _log(0.5 * (rows[0] + rows[1])) + s
    )


def measures(ws: WeightSystem, w: Word) -> MeasureTriple:
    """Log-masses (mu(I), mu o T(I), nu(I)) of the interval I = w.

    The two rows of M_I are propagated with separate power-of-two scales:
    along 1^n with the weights [0.5, 0.2, 0.3, 0] the rows drift apart like
    0.4^n, which a single shared scale cannot hold past depth ~800.
    """
    if w.base != ws.base:
        raise BaseMismatch(f"word base {w.base} != weight base {ws.base}")
    # rows (a, b) and (c, d) of M_I, multiplied out by hand: since
    # M_{base-1-e} = J M_e J for the swap J, the mirrored word then produces
    # the same products summed in swapped order, i.e. bit-identical masses
    a, b, c, d = 1.0, 0.0, 0.0, 1.0
    e0 = e1 = 0
    mats = [tuple(float(x) for x in m.ravel()) for m in ws.matrices]
    for digit in w.digits:
        m00, m01, m10, m11 = mats[digit]
        a, b = a * m00 + b * m10, a * m01 + b * m11
        c, d = c * m00 + d * m10, c * m01 + d * m11
        peak = max(a, b)
        if peak > 0 and not 0.5 <= peak <= 1.0:
            _, e = math.frexp(peak)
            a, b, e0 = math.ldexp(a, -e), math.ldexp(b, -e), e0 + e
        peak = max(c, d)
        if peak > 0 and not 0.5 <= peak <= 1.0:
            _, e = math.frexp(peak)
            c, d, e1 = math.ldexp(c, -e), math.ldexp(d, -e), e1 + e
    ln2 = math.log(2.0)
    log_mu = _log(a + b) + e0 * ln2
    log_mu_t = _log(c + d) + e1 * ln2
    return MeasureTriple(log_mu, log_mu_t, float(np.logaddexp(log_mu, log_mu_t)) - ln2)


# ---------------------------------------------------------------------------
# batch evaluation over a whole generation, lexicographic word order


def level_vectors(ws: WeightSystem, n: int) -> np.ndarray:
    """Array of shape (base**n, 2) with rows (mu(I), mu(T I)) for I in F_n.

    Row k is the interval [k/base**n, (k+1)/base**n).
    """
    mu, mu_t = np.ones(1), np.ones(1)
    for _ in range(n):
        new_mu, new_t = [], []
        for m in ws.matrices:
            # elementwise rather than matmul so mirrored words agree bit for bit
            new_mu.append(m[0, 0] * mu + m[0, 1] * mu_t)
            new_t.append(m[1, 0] * mu + m[1, 1] * mu_t)
        mu, mu_t = np.concatenate(new_mu), np.concatenate(new_t)
    return np.stack([mu, mu_t], axis=1)


def level_matrices(ws: WeightSystem, n: int) -> np.ndarray:
    """Array of shape (base**n, 2, 2) holding M_I for every I in F_n."""
    out = np.eye(2)[None]
    for _ in range(n):
        out = np.concatenate([m @ out for m in ws.matrices])
    return out


def all_words(base: int, n: int) -> list[Word]:
    """Words of F_n in the same (lexicographic) order as :func:`level_vectors`."""
    idx = np.arange(base**n)
    digits = [(idx // base ** (n - 1 - k)) % base for k in range(n)]
    return [Word(base, tuple(int(d[i]) for d in digits)) for i in range(base**n)]
