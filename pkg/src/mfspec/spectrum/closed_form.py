"""Closed-form L^q-spectra of the shape ``c + log_base(sum_j m_j a_j^q)``."""
from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..errors import EmptyB
from ..measure import WeightSystem

ATOM_RTOL = 1e-13


def _lse(z: np.ndarray) -> np.ndarray:
    # column-wise log-sum-exp; scipy's version carries too much per-call overhead here
    m = z.max(axis=0)
    return m + np.log(np.exp(z - m).sum(axis=0))


@dataclass(frozen=True)
class ClosedFormTau:
    """tau(q) = offset + log_base(sum_j m_j a_j^q).

    ``atoms`` is a tuple of (a_j, m_j) with 0 < a_j <= 1, m_j > 0, kept
    sorted by a_j with equal values merged. No atoms means tau = -inf.
    """

    base: int
    offset: float = 0.0
    atoms: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        merged: list[list[float]] = []
        for a, m in sorted((float(a), float(m)) for a, m in self.atoms):
            if not 0 < a <= 1 or m <= 0:
                raise ValueError(f"bad atom ({a}, {m})")
            # atoms produced by different weight sums may differ in the last ulp
            if merged and math.isclose(a, merged[-1][0], rel_tol=ATOM_RTOL):
                merged[-1][1] += m
            else:
                merged.append([a, m])
        object.__setattr__(self, "atoms", tuple((a, m) for a, m in merged))

    @classmethod
    def from_values(cls, base: int, values: Iterable[float], offset: float = 0.0):
        counts = Counter(float(v) for v in values)
        return cls(base, offset, tuple(counts.items()))

    @property
    def is_empty(self) -> bool:
        return not self.atoms

    @property
    def is_linear(self) -> bool:
        return len(self.atoms) == 1

    @property
    def _loga(self) -> np.ndarray:
        return np.log([a for a, _ in self.atoms])

    @property
    def _logm(self) -> np.ndarray:
        return np.log([m for _, m in self.atoms])

    def __call__(self, q):
        q = np.asarray(q, dtype=float)
        if self.is_empty:
            return np.full(q.shape, -np.inf)[()]
        z = self._logm[:, None] + np.outer(self._loga, q.ravel())
        out = self.offset + _lse(z) / math.log(self.base)
        return out.reshape(q.shape)[()]

    def _softmax(self, q):
        q = np.asarray(q, dtype=float).ravel()
        z = self._logm[:, None] + np.outer(self._loga, q)
        return np.exp(z - _lse(z)), q

    def deriv(self, q):
        """tau'(q) = sum m a^q ln a / (ln base * sum m a^q)."""
        shape = np.shape(q)
        if self.is_empty:
            return np.full(shape, np.nan)[()]
        w, _ = self._softmax(q)
        out = (w * self._loga[:, None]).sum(axis=0) / math.log(self.base)
        return out.reshape(shape)[()]

    def deriv2(self, q):
        shape = np.shape(q)
        if self.is_empty:
            return np.full(shape, np.nan)[()]
        w, _ = self._softmax(q)
        la = self._loga[:, None]
        mean = (w * la).sum(axis=0)
        var = (w * (la - mean) ** 2).sum(axis=0)
        return (np.maximum(var, 0.0) / math.log(self.base)).reshape(shape)[()]

    def slope_limits(self) -> tuple[float, float]:
        """(tau'(-inf), tau'(+inf)) = (log_base min a, log_base max a)."""
        lb = math.log(self.base)
        return math.log(self.atoms[0][0]) / lb, math.log(self.atoms[-1][0]) / lb

    def alpha_range(self) -> tuple[float, float]:
        """Closed support [-tau'(+inf), -tau'(-inf)] of the Legendre conjugate."""
        lo_slope, hi_slope = self.slope_limits()
        return -hi_slope, -lo_slope

    def edge_values(self) -> tuple[float, float]:
        """Conjugate values at the two ends of :meth:`alpha_range`."""
        lb = math.log(self.base)
        return (
            self.offset + math.log(self.atoms[-1][1]) / lb,
            self.offset + math.log(self.atoms[0][1]) / lb,
        )

    def formula(self, var: str = "q") -> str:
        if self.is_empty:
            return "-inf"
        terms = []
        for a, m in self.atoms:
            mm = "" if m == 1 else f"{m:g}*"
            terms.append(f"{mm}{a:.17g}^{var}")
        head = f"{self.offset:.17g} + " if self.offset else ""
        return f"{head}log_{self.base}({' + '.join(terms)})"


class KKind(enum.Enum):
    EMPTY = "Empty"
    SINGLETON = "Singleton"
    CANTOR = "Cantor"
    FULL_INTERVAL = "FullInterval"


@dataclass(frozen=True)
class BStructure:
    B: frozenset
    BStar: frozenset
    kind: KKind

    @property
    def overlaps(self) -> bool:
        return bool(self.B & self.BStar)


def b_structure(ws: WeightSystem) -> BStructure:
    """B = {i < base : p_{i+base} = 0} (exact zero test) and its mirror B*."""
    l = ws.base
    b = frozenset(i for i in range(l) if ws.weights[i + l] == 0.0)
    bstar = frozenset(l - 1 - i for i in b)
    if not b:
        kind = KKind.EMPTY
    elif len(b) == 1:
        kind = KKind.SINGLETON
    elif len(b) == l:
        kind = KKind.FULL_INTERVAL
    else:
        kind = KKind.CANTOR
    return BStructure(b, bstar, kind)


def tau_tilde(ws: WeightSystem) -> ClosedFormTau:
    """log_base(sum_{i in B} p_i^q); the -inf spectrum when B is empty."""
    b = sorted(b_structure(ws).B)
    return ClosedFormTau.from_values(ws.base, [ws.weights[i] for i in b])


def tau_pi(ws: WeightSystem) -> ClosedFormTau:
    """Spectrum of the self-similar measure on K with normalized B-weights."""
    b = sorted(b_structure(ws).B)
    if not b:
        raise EmptyB("tau_pi needs a nonempty B")
    total = math.fsum(ws.weights[i] for i in b)
    return ClosedFormTau.from_values(ws.base, [ws.weights[i] / total for i in b])


def column_sums(ws: WeightSystem) -> list[tuple[float, float]]:
    return [(m[0, 0] + m[1, 0], m[0, 1] + m[1, 1]) for m in ws.matrices]


def tau_nu_closed(ws: WeightSystem, rtol: float = 1e-12) -> ClosedFormTau | None:
    """Closed form of tau_nu when nu is multinomial, else None.

    (1, 1) M_eps = w_eps (1, 1) for every digit makes nu(I) the product of
    the w's along the word; that happens exactly when both column sums of
    every M_eps agree.
    """
    w = []
    for c0, c1 in column_sums(ws):
        if not math.isclose(c0, c1, rel_tol=rtol, abs_tol=rtol):
            return None
        w.append(0.5 * (c0 + c1))
    return ClosedFormTau.from_values(ws.base, w)
