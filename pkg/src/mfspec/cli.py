"""mfspec command line.

Exit status: 0 success, 1 a structural hypothesis (or a numerical check)
failed, 2 bad input.
"""
from __future__ import annotations

import argparse
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import io
from .errors import (
    HypothesisError,
    HypothesisViolated,
    InputError,
    MfspecError,
    WrongShape,
)
from .measure import WeightSystem
from .presets import NAMES, preset
from .spectrum import (
    b_structure,
    check_nu_qb,
    dimension_spectrum,
    legendre,
    lq_spectrum,
    scan_transitions,
    tau_n,
    tau_nu_closed,
)
from .spectrum.lq import NumericBranchWarning
from .spectrum.synthesis import SearchConfig, synthesize_transitions

EXIT_OK, EXIT_HYPOTHESIS, EXIT_INPUT = 0, 1, 2
CHECKS = ("wqb", "qbfail", "lemma1", "submult", "frostman")


class UsageError(Exception):
    pass


def _param(text: str):
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key, value


def load_input(spec: str, params=()) -> WeightSystem:
    """A weight file path or a preset name (with key=value parameters)."""
    path = Path(spec)
    if path.exists():
        return io.read_weights(path)
    name = spec.split("(")[0]
    if name in NAMES:
        return preset(spec, **dict(params)).ws
    raise UsageError(f"{spec!r} is neither a weight file nor a preset ({', '.join(NAMES)})")


def _grid(lo, hi, n):
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi or n < 2:
        raise UsageError("grids need finite min < max and at least 2 samples")
    return np.linspace(lo, hi, n)


def _warn(msg):
    print(f"mfspec: {msg}", file=sys.stderr)


# ---------------------------------------------------------------------------


def cmd_validate(args) -> int:
    ws = load_input(args.input, args.param)
    bs = b_structure(ws)
    zero = [i for i in range(ws.base) if ws.weights[i] == 0.0]
    doc = {
        "valid": True,
        "base": ws.base,
        "weights": list(ws.weights),
        "B": sorted(bs.B),
        "BStar": sorted(bs.BStar),
        "kKind": bs.kind.value,
        "nuQB": check_nu_qb(ws).value,
        "nuMultinomial": tau_nu_closed(ws) is not None,
        "positiveLeadingWeights": not zero,
    }
    io.write_text(args.out, io.dumps(doc))
    return EXIT_OK


def cmd_tau(args) -> int:
    ws = load_input(args.input, args.param)
    q = _grid(args.qmin, args.qmax, args.samples)
    status = EXIT_OK
    try:
        spec = lq_spectrum(ws, force=args.force)
    except HypothesisViolated as exc:
        _warn(f"{exc}; curve computed anyway")
        spec = lq_spectrum(ws, force=True)
        status = EXIT_HYPOTHESIS
    if not spec.closed:
        _warn("tau_nu has no closed form; evaluated with the transfer operator")
    nu, tilde, mu = spec.nu(q), spec.tilde(q), spec(q)
    branch, d = spec.branch(q), spec.deriv(q)
    header = list(io.CURVE_HEADER)
    cols = [q, nu, tilde, mu, branch, d]
    if args.depth is not None:
        header.append("tau_n")
        cols.append(tau_n(ws, args.depth, q, "mu"))
    io.write_text(args.out, io.csv_text(header, zip(*cols)))
    return status


def cmd_spectrum(args) -> int:
    ws = load_input(args.input, args.param)
    dim = dimension_spectrum(ws)
    io.write_text(args.out, io.csv_text(io.SPECTRUM_HEADER, dim.sample(args.per_piece)))
    return EXIT_OK


def cmd_transitions(args) -> int:
    ws = load_input(args.input, args.param)
    spec = lq_spectrum(ws, force=args.force)
    scan = scan_transitions(
        ws, q_min=args.qmin, samples=args.samples, log_samples=args.log_samples, spec=spec
    )
    status = EXIT_OK
    gap_note = None
    dim = None
    if scan.transitions:
        try:
            dim = dimension_spectrum(ws)
        except HypothesisError as exc:
            gap_note = str(exc)
            status = EXIT_HYPOTHESIS
    entries = []
    for t in scan.transitions:
        gap = None
        if dim is not None:
            mid = 0.5 * (t.alpha_lo + t.alpha_hi)
            gap = legendre(spec, mid) - max(dim(mid), 0.0)
        entries.append(
            {
                "qStar": t.q_star,
                "leftSlope": t.left_slope,
                "rightSlope": t.right_slope,
                "alphaLo": t.alpha_lo,
                "alphaHi": t.alpha_hi,
                "gapAtMidpoint": gap,
                "leftBranch": t.left_branch,
                "rightBranch": t.right_branch,
            }
        )
    doc = {
        "transitions": entries,
        "tangencies": list(scan.tangencies),
        "numeric": scan.numeric,
        "unresolvedTail": scan.unresolved_tail,
        "config": {"qMin": args.qmin, "qMax": 0.0, "samples": args.samples, "logSamples": args.log_samples},
    }
    if gap_note:
        doc["gapError"] = gap_note
        _warn(gap_note)
    io.write_text(args.out, io.dumps(doc))
    return status


def _run_check(name, ws, args):
    from . import verify

    d = args.depth
    if name == "wqb":
        lo = verify.check_wqb(ws, min(3, d))
        hi = verify.check_wqb(ws, d)
        ratio = hi.constant / lo.constant
        return ratio < 2, {
            f"constantDepth{min(3, d)}": lo.constant,
            f"constantDepth{d}": hi.constant,
            "ratio": ratio,
            "bestLower": hi.best_lower,
            "bestUpper": hi.best_upper,
            "witnessLo": [str(w) for w in hi.witness_lo],
            "witnessHi": [str(w) for w in hi.witness_hi],
        }
    if name == "qbfail":
        n = args.qb_n
        step = math.exp(verify.qb_failure_log_ratio(ws, n + 1) - verify.qb_failure_log_ratio(ws, n))
        target = ws.weights[0] / ws.weights[1]
        rel = abs(step / target - 1)
        return rel < 0.05, {"n": n, "stepRatio": step, "p0OverP1": target, "relError": rel}
    if name == "lemma1":
        rep = verify.lemma1_sweep(ws, d)
        return rep.violations == 0, {"pairs": rep.pairs, "violations": rep.violations, "worstRatio": rep.worst_ratio}
    if name == "submult":
        out, ok = {}, True
        for q in args.q:
            rep = verify.check_submultiplicativity(ws, q, args.nmax)
            ok &= rep.slack >= 0
            out[repr(q)] = {"maxExcess": rep.best_upper, "bound": rep.bound, "slack": rep.slack, "witness": list(rep.witness_hi)}
        return ok, out
    if name == "frostman":
        out, ok = {}, True
        for q in args.frostman_q:
            consts = {}
            for n in args.truncations:
                fa = verify.frostman_approx(ws, q, args.delta, n, args.m)
                consts[n] = fa.frostman_constant
                ok &= abs(fa.table.sum() - 1) <= 1e-9
            vals = list(consts.values())
            change = max(vals) / min(vals)
            ok &= all(math.isfinite(v) for v in vals) and change < 2
            out[repr(q)] = {"constants": {str(k): v for k, v in consts.items()}, "change": change}
        return ok, out
    raise UsageError(f"unknown check {name!r}")


def cmd_verify(args) -> int:
    ws = load_input(args.input, args.param)
    names = [c.strip() for c in args.checks.split(",") if c.strip()]
    for n in names:
        if n not in CHECKS:
            raise UsageError(f"unknown check {n!r}; choose from {', '.join(CHECKS)}")
    results, status = {}, EXIT_OK
    for n in names:
        try:
            ok, detail = _run_check(n, ws, args)
            results[n] = {"status": "pass" if ok else "fail", **detail}
            if not ok:
                status = EXIT_HYPOTHESIS
        except WrongShape as exc:
            results[n] = {"status": "not-applicable", "reason": str(exc)}
        except HypothesisError as exc:
            results[n] = {"status": "hypothesis-failed", "reason": str(exc)}
            status = EXIT_HYPOTHESIS
    doc = {
        "input": args.input,
        "weights": ws.as_dict(),
        "checks": results,
        "config": {
            "depth": args.depth,
            "q": args.q,
            "nMax": args.nmax,
            "qbN": args.qb_n,
            "frostmanQ": args.frostman_q,
            "delta": args.delta,
            "truncations": args.truncations,
            "m": args.m,
        },
    }
    io.write_text(args.out, io.dumps(doc))
    return status


def cmd_synthesize(args) -> int:
    cfg = SearchConfig(seed=args.seed, max_attempts=args.max_attempts)
    syn = synthesize_transitions(args.n, cfg)
    meta = {"n": syn.n, "seed": syn.seed, "attempt": syn.attempt, "qStars": list(syn.q_stars), "logSamples": syn.log_samples}
    io.write_text(args.out, io.weights_json(syn.ws, meta))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mfspec", description="L^q-spectra and multifractal spectra of overlapping self-similar measures")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("input", help="weight file (JSON) or preset name: " + ", ".join(NAMES))
        p.add_argument("--param", type=_param, action="append", default=[], metavar="KEY=VALUE", help="preset parameter")
        p.add_argument("--out", default="-", help="output path (default stdout)")

    p = sub.add_parser("validate", help="check a weight system and describe its structure")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("tau", help="emit tau_nu, tau_tilde, tau_mu on a q grid as CSV")
    common(p)
    p.add_argument("--qmin", type=float, default=-30.0)
    p.add_argument("--qmax", type=float, default=5.0)
    p.add_argument("--samples", type=int, default=701)
    p.add_argument("--depth", type=int, default=None, help="also emit the finite-depth tau_n column")
    p.add_argument("--force", action="store_true", help="compute even if some p_i (i < base) vanishes")
    p.set_defaults(func=cmd_tau)

    p = sub.add_parser("spectrum", help="emit the dimension spectrum as CSV")
    common(p)
    p.add_argument("--per-piece", type=int, default=201)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("transitions", help="report the phase transitions of tau_mu")
    common(p)
    p.add_argument("--qmin", type=float, default=-200.0)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--log-samples", type=int, default=0)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_transitions)

    p = sub.add_parser("verify", help="run the finite-depth inequality checks")
    common(p)
    p.add_argument("--checks", default=",".join(CHECKS))
    p.add_argument("--depth", type=int, default=5)
    p.add_argument("--q", type=float, nargs="+", default=[-0.5, -1.0, -2.0, -4.0], help="q values for submult")
    p.add_argument("--nmax", type=int, default=10)
    p.add_argument("--qb-n", type=int, default=20)
    p.add_argument("--frostman-q", type=float, nargs="+", default=[-1.0, -2.0])
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--truncations", type=int, nargs="+", default=[8, 10])
    p.add_argument("--m", type=int, default=6)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("synthesize", help="search weights with exactly N phase transitions")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-attempts", type=int, default=5000)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_synthesize)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    warnings.simplefilter("ignore", NumericBranchWarning)
    try:
        return args.func(args)
    except (InputError, UsageError, ValueError, KeyError, OSError) as exc:
        _warn(f"{type(exc).__name__}: {exc}")
        return EXIT_INPUT
    except (HypothesisError, MfspecError) as exc:
        _warn(f"{type(exc).__name__}: {exc}" if not str(exc).startswith(type(exc).__name__) else str(exc))
        return EXIT_HYPOTHESIS


if __name__ == "__main__":
    sys.exit(main())
