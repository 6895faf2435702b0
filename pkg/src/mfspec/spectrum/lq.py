"""tau_mu = max(tau_nu, tau_tilde) and sampled spectrum curves."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from ..errors import HypothesisViolated, NoClosedForm, NonConvexInput, NonfiniteTau
from ..measure import WeightSystem
from .closed_form import ClosedFormTau, tau_nu_closed, tau_tilde
from .partition import tau_n
from .pressure import NuPressure

CONVEXITY_TOL = 1e-9

NuBranch = Union[ClosedFormTau, NuPressure]


class NumericBranchWarning(UserWarning):
    """tau_nu has no closed form and is computed from the transfer operator."""


@dataclass(frozen=True)
class TauCurve:
    q: np.ndarray
    values: np.ndarray
    derivs: Optional[np.ndarray] = None
    provenance: str = "ClosedForm"
    branches: Optional[tuple] = None

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        if q.ndim != 1 or q.size < 2 or np.any(np.diff(q) <= 0):
            raise NonConvexInput("q grid must be strictly increasing with >= 2 points")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.derivs is not None:
            object.__setattr__(self, "derivs", np.asarray(self.derivs, dtype=float))

    def second_differences(self) -> np.ndarray:
        slopes = np.diff(self.values) / np.diff(self.q)
        return np.diff(slopes) * (self.q[2:] - self.q[:-2]) / 2

    def check_convexity(self, tol: float = CONVEXITY_TOL) -> None:
        if not np.all(np.isfinite(self.values)):
            raise NonConvexInput("curve has non-finite values")
        worst = self.second_differences().min(initial=0.0)
        if worst < -tol:
            raise NonConvexInput(f"second difference {worst:.3g} below -{tol:g}")

    def slope_range(self) -> tuple[float, float]:
        if self.derivs is not None:
            return float(self.derivs[0]), float(self.derivs[-1])
        s = np.diff(self.values) / np.diff(self.q)
        return float(s[0]), float(s[-1])


@dataclass(frozen=True)
class LqSpectrum:
    """The two branches of tau_mu and their pointwise max."""

    ws: WeightSystem
    nu: NuBranch
    tilde: ClosedFormTau
    forced: bool = False

    @property
    def closed(self) -> bool:
        return isinstance(self.nu, ClosedFormTau)

    @property
    def provenance(self) -> str:
        return "ClosedForm" if self.closed else "TransferOperator"

    def __call__(self, q):
        return np.maximum(self.nu(q), self.tilde(q))[()]

    def branch(self, q):
        """'nu' where tau_nu >= tau_tilde, else 'tilde'."""
        out = np.where(np.asarray(self.nu(q)) >= np.asarray(self.tilde(q)), "nu", "tilde")
        return out[()] if out.ndim == 0 else out

    def deriv(self, q):
        """Derivative of the active branch (right derivative at a tie)."""
        qa = np.asarray(q, dtype=float)
        nv, tv = np.asarray(self.nu(qa)), np.asarray(self.tilde(qa))
        nd = np.asarray(self.nu.deriv(qa))
        if self.tilde.is_empty:
            return nd[()]
        td = np.asarray(self.tilde.deriv(qa))
        use_nu = (nv > tv) | ((nv == tv) & (nd >= td))
        return np.where(use_nu, nd, td)[()]

    def slope_limits(self) -> tuple[float, float]:
        if not self.closed:
            raise NoClosedForm("slope limits need a closed-form tau_nu")
        lo, hi = self.nu.slope_limits()
        if not self.tilde.is_empty:
            tlo, thi = self.tilde.slope_limits()
            lo, hi = min(lo, tlo), max(hi, thi)
        return lo, hi


def lq_spectrum(ws: WeightSystem, force: bool = False, allow_numeric: bool = True) -> LqSpectrum:
    """Build tau_mu for ``ws``.

    The max-formula is only established when p_i > 0 for every i < base;
    otherwise HypothesisViolated is raised unless ``force`` is set.
    """
    zero = [i for i in range(ws.base) if ws.weights[i] == 0.0]
    if zero and not force:
        raise HypothesisViolated(f"p_i = 0 for i in {zero}; pass force=True to override")
    nu = tau_nu_closed(ws)
    if nu is None:
        if not allow_numeric:
            raise NoClosedForm("nu is not multinomial")
        warnings.warn("tau_nu evaluated numerically", NumericBranchWarning, stacklevel=2)
        nu = NuPressure(ws)
    return LqSpectrum(ws, nu, tau_tilde(ws), forced=bool(zero))


def tau_mu(ws: WeightSystem, q, force: bool = False):
    return lq_spectrum(ws, force)(q)


def tau_mu_curve(ws: WeightSystem, q_grid, force: bool = False, depth: int | None = None) -> TauCurve:
    """Sample tau_mu on ``q_grid``; with ``depth`` use the finite-depth tau_n instead."""
    q = np.asarray(q_grid, dtype=float)
    if depth is not None:
        vals = tau_n(ws, depth, q, "mu")
        return TauCurve(q, vals, None, f"PartitionEstimate({depth})")
    spec = lq_spectrum(ws, force)
    vals = np.asarray(spec(q), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise NonfiniteTau("tau_mu is not finite on the grid")
    return TauCurve(q, vals, np.asarray(spec.deriv(q)), spec.provenance, tuple(spec.branch(q)))
