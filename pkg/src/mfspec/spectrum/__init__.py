from .closed_form import (
    BStructure,
    ClosedFormTau,
    KKind,
    b_structure,
    column_sums,
    tau_nu_closed,
    tau_pi,
    tau_tilde,
)
from .dimension import (
    DimensionSpectrum,
    IsolatedPoint,
    NuQB,
    Piece,
    ViolationInterval,
    check_nu_qb,
    dimension_spectrum,
    violation_intervals,
)
from .legendre import legendre, legendre_curve
from .lq import LqSpectrum, NumericBranchWarning, TauCurve, lq_spectrum, tau_mu, tau_mu_curve
from .partition import NuEstimate, nu_qb_constant, partition_log_sum, tau_n, tau_nu_numeric
from .pressure import NuPressure
from .transitions import PhaseTransition, TransitionScan, find_phase_transitions, scan_transitions
