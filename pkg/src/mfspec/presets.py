"""Canonical weight systems with the structural facts they are known to satisfy."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Any

import numpy as np

from .errors import ConstraintViolated, MfspecError
from .measure import WeightSystem, validate
from .spectrum import (
    b_structure,
    dimension_spectrum,
    scan_transitions,
    tau_nu_closed,
    tau_tilde,
)
from .spectrum.synthesis import SearchConfig, synthesize_transitions

NAMES = ("sec61", "sec62", "sec63", "nTrans")


@dataclass(frozen=True)
class Preset:
    name: str
    ws: WeightSystem
    expected: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)


def _dec(x) -> Decimal:
    return Decimal(str(x))


def _flag(x) -> bool:
    if isinstance(x, str):
        if x.lower() in ("1", "true", "yes"):
            return True
        if x.lower() in ("0", "false", "no"):
            return False
        raise ConstraintViolated(f"not a boolean: {x!r}")
    return bool(x)


def _sec61(p0="0.5", p1="0.2", p2="0.3") -> Preset:
    p0, p1, p2 = _dec(p0), _dec(p1), _dec(p2)
    if not (p0 > 0 and p1 > 0 and p2 > 0):
        raise ConstraintViolated("sec61 needs p_0 p_1 p_2 > 0")
    if not p1 < p0:
        raise ConstraintViolated("sec61 needs p_1 < p_0")
    ws = validate([p0, p1, p2, 0], 2)
    exp = {"transitions": 1, "B": [1], "tilde_atoms": [float(p1)]}
    if tau_nu_closed(ws) is not None:
        exp["isolated_point"] = -math.log2(float(p1))
        exp["dim_at_isolated_point"] = 0.0
    return Preset("sec61", ws, exp, {"p0": str(p0), "p1": str(p1), "p2": str(p2)})


def _sec62(p0="0.4", p1="0.1", p2="0.04", p3="0.06", disjoint=True) -> Preset:
    p0, p1, p2, p3 = map(_dec, (p0, p1, p2, p3))
    disjoint = _flag(disjoint)
    if min(p0, p1, p2, p3) <= 0:
        raise ConstraintViolated("sec62 needs p_0, ..., p_3 > 0")
    if not (p3 < p0 and p2 < p1):
        raise ConstraintViolated("sec62 needs p_4 = p_0 - p_3 > 0 and p_5 = p_1 - p_2 > 0")
    if disjoint and not (p3 < p1 <= p0):
        raise ConstraintViolated("the disjoint-interval variant needs p_3 < p_1 <= p_0")
    ws = validate([p0, p1, p2, p3, p0 - p3, p1 - p2, 0, 0], 4)
    exp = {"transitions": 1, "B": [2, 3], "nu_atoms": sorted([float(p0), float(p1)])}
    if disjoint:
        exp["domain_pieces"] = 2
        exp["local_maxima"] = 2
    return Preset(
        "sec62", ws, exp, {"p0": str(p0), "p1": str(p1), "p2": str(p2), "p3": str(p3), "disjoint": disjoint}
    )


_SEC63_DEFAULT = ("0.35", "0.14", "0.01", "0.03", "0.025")


def _sec63(p0="0.35", p1="0.14", p2="0.01", p3="0.03", p4="0.025") -> Preset:
    p = list(map(_dec, (p0, p1, p2, p3, p4)))
    if min(p) <= 0:
        raise ConstraintViolated("sec63 needs p_0, ..., p_4 > 0")
    p5, p6, p7 = p[0] - p[4], p[1] - p[3], p[2]
    if p5 <= 0 or p6 <= 0:
        raise ConstraintViolated("sec63 needs p_5 = p_0 - p_4 > 0 and p_6 = p_1 - p_3 > 0")
    if not 2 * p[2] < min(p[3], p[4]):
        raise ConstraintViolated("sec63 needs 2 p_2 < min(p_3, p_4)")
    ws = validate(p + [p5, p6, p7, 0, 0], 5)
    exp = {
        "B": [3, 4],
        "nu_atoms": sorted([float(p[0]), float(p[1]), float(2 * p[2])]),
        "domain": [-math.log(float(p[0]), 5), -math.log(float(2 * p[2]), 5)],
    }
    if p == list(map(_dec, _SEC63_DEFAULT)):
        # the constraints alone do not force two crossings; these are checked values
        exp["transitions"] = 2
        exp["branches"] = ["nu", "tilde", "nu"]
    return Preset("sec63", ws, exp, {f"p{i}": str(v) for i, v in enumerate(p)})


def _ntrans(n=3, seed=0, max_attempts=5000) -> Preset:
    syn = synthesize_transitions(int(n), SearchConfig(seed=int(seed), max_attempts=int(max_attempts)))
    exp = {"transitions": int(n), "log_samples": syn.log_samples}
    return Preset(f"nTrans({n})", syn.ws, exp, {"n": int(n), "seed": int(seed), "attempt": syn.attempt})


_BUILDERS = {"sec61": _sec61, "sec62": _sec62, "sec63": _sec63, "nTrans": _ntrans}


def preset(name: str, **params) -> Preset:
    """Build a named preset; ``nTrans(3)`` is accepted as a shorthand for n=3."""
    if name.startswith("nTrans(") and name.endswith(")"):
        params.setdefault("n", int(name[7:-1]))
        name = "nTrans"
    if name not in _BUILDERS:
        raise KeyError(f"unknown preset {name!r}; choose from {NAMES}")
    return _BUILDERS[name](**params)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    expected: Any
    actual: Any
    passed: bool


def _local_maxima(dim) -> int:
    count = 0
    for pc in dim.pieces:
        a = np.linspace(pc.lo, pc.hi, 401)
        f = np.array([dim(x) for x in a])
        inner = (f[1:-1] >= f[:-2]) & (f[1:-1] >= f[2:]) & (f[1:-1] > min(f[0], f[-1]))
        count += int(np.count_nonzero(inner)) or int(f[0] > f[1] or f[-1] > f[-2])
    return count


def check_expectations(p: Preset) -> list[Check]:
    """Run every expectation attached to ``p`` against the spectrum module."""
    exp = p.expected
    ws = p.ws
    out = []
    if "transitions" in exp:
        scan = scan_transitions(ws, log_samples=exp.get("log_samples", 0))
        n = len(scan.transitions)
        out.append(Check("transitions", exp["transitions"], n, n == exp["transitions"]))
    if "B" in exp:
        b = sorted(b_structure(ws).B)
        out.append(Check("B", exp["B"], b, b == exp["B"]))
    if "nu_atoms" in exp:
        nu = tau_nu_closed(ws)
        got = [a for a, _ in nu.atoms] if nu else None
        ok = got is not None and np.allclose(got, exp["nu_atoms"], rtol=1e-12)
        out.append(Check("nu_atoms", exp["nu_atoms"], got, ok))
    if "tilde_atoms" in exp:
        got = [a for a, _ in tau_tilde(ws).atoms]
        out.append(Check("tilde_atoms", exp["tilde_atoms"], got, np.allclose(got, exp["tilde_atoms"])))
    keys = {"isolated_point", "domain_pieces", "local_maxima", "domain", "branches"}
    if keys & exp.keys():
        try:
            dim = dimension_spectrum(ws)
        except MfspecError as exc:
            out.append(Check("dimension_spectrum", "available", repr(exc), False))
            return out
        if "isolated_point" in exp:
            pts = [pt for pt in dim.points if math.isclose(pt.alpha, exp["isolated_point"], rel_tol=1e-12)]
            out.append(Check("isolated_point", exp["isolated_point"], [pt.alpha for pt in dim.points], bool(pts)))
            val = pts[0].value if pts else None
            out.append(Check("dim_at_isolated_point", 0.0, val, val == exp["dim_at_isolated_point"]))
        if "domain_pieces" in exp:
            n = len(dim.intervals) + len(dim.points)
            out.append(Check("domain_pieces", exp["domain_pieces"], n, n == exp["domain_pieces"]))
        if "local_maxima" in exp:
            n = _local_maxima(dim)
            out.append(Check("local_maxima", exp["local_maxima"], n, n == exp["local_maxima"]))
        if "domain" in exp:
            got = [list(iv) for iv in dim.intervals]
            ok = len(got) == 1 and np.allclose(got[0], exp["domain"], rtol=1e-12)
            out.append(Check("domain", exp["domain"], got, ok))
        if "branches" in exp:
            got = [pc.branch for pc in dim.pieces]
            out.append(Check("branches", exp["branches"], got, got == exp["branches"]))
    return out
