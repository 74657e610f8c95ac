"""Acceptance criteria 1-10; each test prints one PASS/FAIL line (also repeated in the summary)."""

import math
import time
import warnings

import numpy as np
import pytest

import invariants
from becgw.cli import main
from becgw.csvio import read_csv
from becgw.decoherence import (
    DecoherenceParams,
    beliaev_rate,
    decoherence_time,
    optimal_tau,
    squeezing_decay_time,
    squeezing_decay_time_asymptotic,
)
from becgw.errors import ValidityWarning
from becgw.figures import QUOTED_FIGURE1_LEVEL
from becgw.metrology import (
    SqueezeParams,
    db_to_r,
    expand_transform,
    qfi_finite_difference,
    qfi_perturbative,
    r_factor,
    squeezed_cov,
    transform_cov,
)
from becgw.mode_dynamics import BecConfig, BogoliubovPair, GwWaveform, PhononMode, beta_analytic, beta_slope
from becgw.mode_dynamics import max_squeezing, numeric_bogoliubov
from becgw.sensitivity import (
    MeasurementPlan,
    angular_factor_mc,
    mode_integral_closed,
    mode_integral_quadrature,
    mode_sum_discrete,
    small_omega_tau_bound,
    total_sensitivity,
)

#: worked-example condensate: m = 1e-25 kg, n = 7e20 m^-3, c_s = 1.2 cm/s
WORKED = dict(atom_mass=1e-25, number_density=7e20, sound_speed=1.2e-2)


def _rel(a, b):
    return abs(a - b) / abs(b)


def test_criterion_1_ode_oracle(acceptance):
    big = 2 * math.pi * 100.0
    start = time.perf_counter()
    worst = 0.0
    for omega_tau in (2 * math.pi, 4 * math.pi, 10 * math.pi):
        wave = GwWaveform(1e-6, big, omega_tau / big)
        mode = PhononMode.from_omega(0.5 * big, 1e-2)
        num = numeric_bogoliubov(mode, wave).pair.beta
        an = beta_analytic(mode, wave).beta
        worst = max(worst, abs(num - an) / abs(an))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-2 and elapsed < 10
    acceptance(1, ok, f"max |beta_num/beta_an - 1| = {worst:.2e} (<= 1e-2), runtime {elapsed:.2f} s (< 10 s)")
    assert ok


def test_criterion_2_qfi_cross_check(acceptance):
    big = 2 * math.pi * 1e3
    start = time.perf_counter()
    worst, worst_zero, count = 0.0, 0.0, 0
    for r in np.linspace(0.0, 3.0, 5):
        for phi in np.linspace(0.0, math.pi, 5):
            for omega_tau in (1.0, 5.0, 10.0, 20.0):
                wave = GwWaveform(0.0, big, omega_tau / big)
                b = beta_slope(0.5 * big, wave)
                s0 = squeezed_cov(SqueezeParams(r, phi))
                pert = qfi_perturbative(s0, expand_transform(s0, b)).h_eps
                fd = qfi_finite_difference(lambda e: transform_cov(s0, BogoliubovPair(1.0, e * b)))
                count += 1
                # the fidelity-convention QFI is 2 b^2 sin^2 phi sinh^2 2r, identically zero on these points
                zero = r == 0 or math.isclose(math.sin(phi), 0.0, abs_tol=1e-12)
                if not zero:
                    worst = max(worst, _rel(fd.h_eps, pert))
                else:
                    # compare within the reported finite-difference error
                    worst_zero = max(worst_zero, abs(fd.h_eps - pert) / (1e-3 * abs(pert) + fd.abs_error))
    elapsed = time.perf_counter() - start
    ok = count == 100 and worst <= 1e-3 and worst_zero <= 1.0 and elapsed < 30
    acceptance(
        2, ok,
        f"{count} points, max relative deviation {worst:.2e} (<= 1e-3), zero-QFI points within "
        f"{worst_zero:.2f} x FD error (<= 1), runtime {elapsed:.2f} s (< 30 s)",
    )
    assert ok


def test_criterion_3_constants(acceptance):
    r1 = r_factor(SqueezeParams(0.83, math.pi / 2))
    r2 = r_factor(SqueezeParams(2.3, math.pi / 2))
    d1, d2 = db_to_r(7.2), db_to_r(20.0)
    ok = abs(r1 - 41) <= 1 and _rel(r2, 1.5e4) <= 0.05 and abs(d1 - 0.83) <= 0.005 and abs(d2 - 2.30) <= 0.005
    acceptance(3, ok, f"R(0.83) = {r1:.2f}, R(2.3) = {r2:.4g}, db_to_r(7.2) = {d1:.4f}, db_to_r(20) = {d2:.4f}")
    assert ok


def test_criterion_4_squeezing_ceiling(acceptance):
    bec = BecConfig(**WORKED, box_length=1e-3)
    with warnings.catch_warnings():
        # 10 kHz lies above the linear regime of this condensate; the bound itself is what is tested
        warnings.simplefilter("ignore", ValidityWarning)
        ceiling = max_squeezing(bec, 2 * math.pi * 1e4)
    ok = 25 <= ceiling.r_max <= 29
    acceptance(4, ok, f"r_max = {ceiling.r_max:.3f} in [25, 29]")
    assert ok


def test_criterion_5_integral_triple(acceptance):
    bec = BecConfig(**WORKED, box_length=1e-3)
    p = SqueezeParams(0.83)
    start = time.perf_counter()
    dq = dc = qc = 0.0
    count = 0
    for multiple in (100, 150, 200, 300):
        for omega_tau in (2.0, 5.0, 10.0, 20.0, 50.0):
            big = multiple * bec.fundamental_omega
            wave = GwWaveform(0.0, big, omega_tau / big)
            plan = MeasurementPlan(wave.tau, 1.0)
            d = mode_sum_discrete(bec, wave, p, plan)
            q = mode_integral_quadrature(bec, wave, p, plan)
            c = mode_integral_closed(bec, wave, p, plan)
            dq, dc, qc = max(dq, _rel(d, q)), max(dc, _rel(d, c)), max(qc, _rel(q, c))
            count += 1
    elapsed = time.perf_counter() - start
    # information only: the lattice deficit at exactly 50 fundamental harmonics
    big = 50 * bec.fundamental_omega
    wave = GwWaveform(0.0, big, 5.0 / big)
    plan = MeasurementPlan(wave.tau, 1.0)
    at50 = mode_sum_discrete(bec, wave, p, plan) / mode_integral_closed(bec, wave, p, plan) - 1
    ok = count == 20 and dq <= 0.02 and dc <= 0.02 and qc <= 1e-6 and elapsed < 60
    acceptance(
        5, ok,
        f"{count} points at Omega in {{100,150,200,300}} x 2 pi c_s/L: sum/quad {dq:.2e} (<= 2e-2), "
        f"sum/closed {dc:.2e} (<= 2e-2), quad/closed {qc:.2e} (<= 1e-6), runtime {elapsed:.2f} s (< 60 s); "
        f"info: sum/closed - 1 at 50 x = {at50:+.2e}",
    )
    assert ok


def test_criterion_6_small_omega_tau(acceptance):
    bec = BecConfig(**WORKED, box_length=1e-3)
    p = SqueezeParams(0.83)
    big = 2 * math.pi * 1e3
    parts, ok = [], True
    for omega_tau in (0.01, 0.05, 0.1):
        wave = GwWaveform(0.0, big, omega_tau / big)
        plan = MeasurementPlan(wave.tau, 1e6)
        dev = _rel(total_sensitivity(bec, wave, p, plan).delta_eps_sq, small_omega_tau_bound(bec, wave, p, plan))
        ok &= dev <= 10 * omega_tau**2
        parts.append(f"{omega_tau:g}: {dev:.2e} (<= {10 * omega_tau**2:.0e})")
    acceptance(6, ok, "relative deviation at Omega tau " + ", ".join(parts))
    assert ok


def test_criterion_7_decoherence_numbers(acceptance):
    bec = BecConfig(**WORKED, box_length=1e-3)
    gamma = beliaev_rate(bec, 2 * math.pi * 5e3)
    worked = DecoherenceParams(10.0, gamma_b=gamma)
    t_d = decoherence_time(worked, approximate=True)
    ok_a = _rel(t_d, 3.62) <= 0.02

    decay = {r0: gamma * squeezing_decay_time(DecoherenceParams(r0, gamma_b=gamma)) for r0 in (5.0, 8.0, 10.0)}
    ok_b = all(_rel(v, 0.4) <= 0.1 for v in decay.values())
    asym = gamma * squeezing_decay_time_asymptotic(10.0, gamma)

    opt = optimal_tau(worked, GwWaveform.from_frequency(1e4, 1e-3))
    ok_c = _rel(opt.tau, 2 / gamma) <= 0.05

    ok = ok_a and ok_b and ok_c
    decay_text = ", ".join(f"r0={r0:g}: {v:.3f}" for r0, v in decay.items())
    acceptance(
        7, ok,
        f"(a) {'ok' if ok_a else 'FAIL'}: 1/gamma_B = {t_d:.3f} s vs 3.62 s +-2% (exact log gives "
        f"{decoherence_time(worked):.3f} s); (b) {'ok' if ok_b else 'FAIL'}: gamma_B x half-decay time "
        f"{decay_text} vs 2/5 +-10% (large-squeezing relation gives {asym:.3f}); "
        f"(c) {'ok' if ok_c else 'FAIL'}: tau* = {opt.tau:.4f} s vs 2/gamma_B = {2 / gamma:.4f} s +-5%",
    )
    assert ok_a, "t_d"
    assert ok_c, "tau*"
    assert ok_b, "squeezing half-decay time"


def test_criterion_8_angular_factor(acceptance):
    mean, err = angular_factor_mc(1_000_000, rng=20261014)
    ok = abs(mean - 4 / 15) <= 1e-3
    acceptance(8, ok, f"Monte-Carlo mean {mean:.5f} (std. error {err:.1e}) vs 4/15 = {4 / 15:.5f} +- 1e-3")
    assert ok


def _columns(path):
    header, rows, meta = read_csv(path)
    cols = {h: np.array([r[i] for r in rows], dtype=object) for i, h in enumerate(header)}
    return cols, meta


def _positive_finite(values):
    values = np.asarray(values, dtype=float)
    return bool(np.all(np.isfinite(values) & (values > 0)))


def test_criterion_9_figures(acceptance, tmp_path):
    start = time.perf_counter()
    problems, info = [], ""
    for fid in ("1", "2a", "2b", "3"):
        out = tmp_path / f"figure{fid}.csv"
        if main(["figure", "--id", fid, "--out", str(out), "--no-metadata"]) != 0:
            problems.append(f"figure {fid} did not complete")
            continue
        cols, meta = _columns(out)
        f = cols["f_gw"].astype(float)
        if not np.all(np.diff(f) > 0):
            problems.append(f"figure {fid}: frequencies not increasing")
        curves = [h for h in cols if h.startswith(("curve", "undamped"))]
        for h in curves:
            if not _positive_finite(cols[h]):
                problems.append(f"figure {fid}: {h} not positive and finite")
        if fid in ("2a", "2b"):
            stack = np.array([cols[h].astype(float) for h in curves if h.startswith("curve")])
            if not np.all(np.diff(stack, axis=0) < 0):
                problems.append(f"figure {fid}: curves not ordered in r")
        if fid == "3":
            for h in curves:
                if h.startswith("curve") and not np.all(np.diff(cols[h].astype(float)) > 0):
                    problems.append(f"figure 3: {h} does not increase with f")
        if fid == "1":
            at_1k = float(np.interp(3.0, np.log10(f), cols["curve_value"].astype(float)))
            info = (
                f"info (not gated): figure-1 curve {at_1k:.3g} Hz^-1/2 at 1 kHz, best valid "
                f"{meta['best_valid_curve_value']} vs quoted {QUOTED_FIGURE1_LEVEL:g}"
            )
    elapsed = time.perf_counter() - start
    ok = not problems
    acceptance(9, ok, ("; ".join(problems) or "figures 1, 2a, 2b, 3 regenerated and checked") + f" in {elapsed:.1f} s; {info}")
    assert ok


def test_criterion_10_invariants(acceptance):
    start = time.perf_counter()
    results = invariants.run_all()
    elapsed = time.perf_counter() - start
    cases = sum(n for _, n, _ in results)
    failed = [f"{name}: {err.splitlines()[0]}" for name, _, err in results if err]
    ok = not failed and cases >= 10_000 and elapsed < 120
    acceptance(
        10, ok,
        f"{len(results)} invariants, {cases} cases (>= 1e4), runtime {elapsed:.1f} s (< 120 s)"
        + ("; failing: " + "; ".join(failed) if failed else ""),
    )
    assert ok, failed
