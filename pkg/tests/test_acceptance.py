"""Acceptance criteria, one test each. Every test prints a PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from oracles import nu_masses
from mfspec.presets import preset
from mfspec.spectrum import (
    dimension_spectrum,
    find_phase_transitions,
    legendre,
    lq_spectrum,
    partition_log_sum,
    scan_transitions,
    tau_n,
    tau_nu_closed,
    tau_pi,
    tau_tilde,
    violation_intervals,
)
from mfspec.spectrum.synthesis import synthesize_transitions
from mfspec.verify import (
    check_wqb,
    frostman_approx,
    lemma1_sweep,
    qb_failure_log_ratio,
)

# max_q |tau_10(q) - tau_mu(q)|, measured once with the recursion enumerator
# (0.10968356 and 0.13639385) and pinned with a little headroom
CONVERGENCE_BOUND = {"sec61": 0.110, "sec63": 0.137}
CONVERGENCE_Q = [-8.0, -4.0, -2.0, -1.0, 0.5, 2.0]


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {n:2d}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return emit


def test_criterion_01_normalization(report):
    t0 = time.perf_counter()
    worst = 0.0
    for name in ("sec61", "sec62", "sec63", "nTrans(3)"):
        ws = preset(name).ws
        for n in range(1, 11):
            worst = max(worst, abs(float(tau_n(ws, n, 1.0))))
    dt = time.perf_counter() - t0
    report(1, worst <= 1e-12 and dt < 10, f"max |tau_n(1)| = {worst:.2e} for n <= 10 on all presets, {dt:.2f} s")


def test_criterion_02_two_transitions(report):
    ws = preset("sec63").ws
    t0 = time.perf_counter()
    ts = find_phase_transitions(ws)
    dt = time.perf_counter() - t0
    fine = find_phase_transitions(ws, samples=4000)
    spec = lq_spectrum(ws)
    ok = len(ts) == 2 and len(fine) == 2
    if ok:
        q1, q0 = ts[0].q_star, ts[1].q_star
        drift = max(abs(a.q_star - b.q_star) for a, b in zip(ts, fine))
        # a kink: one-sided difference quotients of tau_mu disagree
        h = 1e-6
        jumps = [
            (float(spec(q + h)) - float(spec(q))) / h - (float(spec(q)) - float(spec(q - h))) / h
            for q in (q1, q0)
        ]
        transversal = all(abs(t.left_slope - t.right_slope) > 1e-6 for t in ts)
        ok = q1 < q0 < 0 and drift < 1e-8 and transversal and all(j > 1e-3 for j in jumps) and dt < 1
        detail = f"q1 = {q1:.12f}, q0 = {q0:.12f}, drift {drift:.1e}, kinks {jumps[0]:.3f} {jumps[1]:.3f}, {dt:.2f} s"
    else:
        detail = f"found {len(ts)} / {len(fine)} transitions"
    report(2, ok, detail)


def test_criterion_03_singleton_b(report):
    ws = preset("sec61").ws
    t0 = time.perf_counter()
    ts = find_phase_transitions(ws)
    dim = dimension_spectrum(ws)
    vs = violation_intervals(ws)
    dt = time.perf_counter() - t0
    a = -math.log2(ws.weights[1])
    iso = [p for p in dim.points if math.isclose(p.alpha, a, rel_tol=1e-12)]
    ok = (
        len(ts) == 1
        and len(iso) == 1
        and iso[0].value == 0.0
        and len(vs) == 1
        and vs[0].gap_at_midpoint > 0
        and dt < 1
    )
    gap = vs[0].gap_at_midpoint if vs else float("nan")
    report(3, ok, f"{len(ts)} transition, isolated point {a:.6f} with dim {iso[0].value if iso else None}, midpoint gap {gap:.4f}, {dt:.2f} s")


def _local_maxima(dim):
    count = 0
    for pc in dim.pieces:
        a = np.linspace(pc.lo, pc.hi, 801)
        f = np.array([dim(x) for x in a])
        k = int(np.argmax(f))
        # concave piece: one maximum, interior or at an end
        count += 1
        assert np.all(np.diff(f[: k + 1]) >= -1e-12) and np.all(np.diff(f[k:]) <= 1e-12)
    return count


def test_criterion_04_disjoint_domain(report):
    p = preset("sec62")
    w = p.ws.weights
    t0 = time.perf_counter()
    dim = dimension_spectrum(p.ws)
    dt = time.perf_counter() - t0
    ivs = dim.intervals
    disjoint = len(ivs) == 2 and ivs[0][1] < ivs[1][0] and not dim.points
    maxima = _local_maxima(dim)
    ok = w[3] < w[1] <= w[0] and disjoint and maxima == 2 and dt < 1
    report(4, ok, f"domain {[tuple(round(x, 5) for x in iv) for iv in ivs]}, {maxima} local maxima, {dt:.2f} s")


def test_criterion_05_partition_convergence(report):
    t0 = time.perf_counter()
    ok, parts = True, []
    q = np.array(CONVERGENCE_Q)
    for name in ("sec61", "sec63"):
        ws = preset(name).ws
        exact = lq_spectrum(ws)(q)
        errs = [float(np.max(np.abs(tau_n(ws, n, q, workers=4) - exact))) for n in (4, 6, 8, 10)]
        mono = all(b < a for a, b in zip(errs, errs[1:]))
        ok &= mono and errs[-1] < CONVERGENCE_BOUND[name]
        parts.append(f"{name} {', '.join(f'{e:.5f}' for e in errs)} (bound {CONVERGENCE_BOUND[name]})")
    dt = time.perf_counter() - t0
    ok &= dt < 120
    report(5, ok, "; ".join(parts) + f", {dt:.1f} s")


def test_criterion_06_multinomial_exactness(report):
    q = np.linspace(-10, 10, 21)
    worst = 0.0
    systems = [
        preset("sec62").ws,
        preset("sec62", p0="0.35", p1="0.15", p2="0.05", p3="0.1").ws,
        preset("sec63").ws,
        preset("sec63", p0="0.3", p1="0.19", p2="0.01", p3="0.04", p4="0.03").ws,
    ]
    for ws in systems:
        nu = tau_nu_closed(ws)
        for n in range(1, 9):
            got = partition_log_sum(ws, n, q, "nu")
            want = n * math.log(ws.base) * nu(q)
            worst = max(worst, float(np.max(np.abs(got - want) / np.maximum(1, np.abs(want)))))
    report(6, worst <= 1e-9, f"max deviation {worst:.2e} over {len(systems)} systems, n <= 8, 21 q values")


def test_criterion_07_factor_two_sweep(report):
    t0 = time.perf_counter()
    total, bad = 0, 0
    for name in ("sec61", "nTrans(1)"):
        ws = preset(name).ws
        assert ws.base == 2
        r = lemma1_sweep(ws, 6)
        total += r.pairs
        bad += r.violations
    dt = time.perf_counter() - t0
    report(7, bad == 0 and dt < 60, f"{bad} violations in {total} pairs (base-2 presets, depth <= 6), {dt:.2f} s")


def test_criterion_08_wqb_and_qb_failure(report):
    parts, ok = [], True
    for name in ("sec61", "sec62", "sec63", "nTrans(3)"):
        ws = preset(name).ws
        c3, c5 = check_wqb(ws, 3).constant, check_wqb(ws, 5).constant
        ok &= math.isfinite(c5) and max(c3, c5) / min(c3, c5) < 2
        parts.append(f"{name} C3 {c3:.4f} C5 {c5:.4f}")
    ws = preset("sec61").ws
    step = math.exp(qb_failure_log_ratio(ws, 21) - qb_failure_log_ratio(ws, 20))
    target = ws.weights[0] / ws.weights[1]
    ok &= abs(step / target - 1) < 0.05
    parts.append(f"qb step at n=20 {step:.6f} vs p0/p1 {target}")
    report(8, ok, "; ".join(parts))


def test_criterion_09_frostman(report):
    parts, ok = [], True
    for name in ("sec61", "sec62", "sec63"):
        ws = preset(name).ws
        for q in (-1.0, -2.0):
            c8 = frostman_approx(ws, q, 0.05, 8, 6).frostman_constant
            c10 = frostman_approx(ws, q, 0.05, 10, 6).frostman_constant
            change = max(c8, c10) / min(c8, c10)
            ok &= math.isfinite(c8) and math.isfinite(c10) and change < 2
            parts.append(f"{name} q={q:g} x{change:.3f}")
    report(9, ok, "constant change 8 -> 10: " + ", ".join(parts))


def test_criterion_10_conjugate_duality(report):
    forms = []
    for name in ("sec61", "sec62", "sec63", "nTrans(3)"):
        ws = preset(name).ws
        forms += [tau_nu_closed(ws), tau_tilde(ws), tau_pi(ws)]
    rng = np.random.default_rng(10)
    worst = 0.0
    for tau in forms:
        for q in rng.uniform(-30, 30, 100):
            d = float(tau.deriv(q))
            worst = max(worst, abs(legendre(tau, -d) - (float(tau(q)) - q * d)))
    report(10, worst <= 1e-9, f"max duality error {worst:.2e} over {len(forms)} closed forms x 100 q")


def _oracle_count(ws, n_grid):
    w, l = ws.weights, ws.base
    nus = nu_masses(w, l, 1)
    nus = nus[nus > 0]
    b = np.array([w[i] for i in range(l) if w[i + l] == 0])
    q = np.linspace(-200, 0, n_grid)

    def lse(x):
        z = np.multiply.outer(np.log(x), q)
        m = z.max(axis=0)
        return m + np.log(np.exp(z - m).sum(axis=0))

    s = np.sign(lse(nus) - lse(b))
    return int(np.count_nonzero(s[1:] * s[:-1] < 0))


def test_criterion_11_synthesizer(report):
    t0 = time.perf_counter()
    syn = synthesize_transitions(3)
    dt = time.perf_counter() - t0
    scan = scan_transitions(syn.ws)
    certified = _oracle_count(syn.ws, 10 * scan.samples)
    ok = len(syn.q_stars) == 3 and certified == 3 and dt < 300
    report(11, ok, f"attempt {syn.attempt}, {certified} sign changes on a {10 * scan.samples}-point grid, {dt:.2f} s")
