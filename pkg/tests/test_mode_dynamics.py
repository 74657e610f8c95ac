import math
import warnings

import numpy as np
import pytest

from becgw.errors import ValidityWarning, WindowNotClosedError
from becgw.mode_dynamics import (
    BecConfig,
    GwWaveform,
    PhononMode,
    beta_analytic,
    beta_slope,
    dispersion,
    extract_bogoliubov,
    gp_validity,
    is_dilute,
    max_squeezing,
    numeric_bogoliubov,
    resonance_profile,
)


def test_waveform_rejects_bad_parameters():
    with pytest.raises(ValueError):
        GwWaveform(-1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        GwWaveform(0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        GwWaveform(0.0, 1.0, 0.0)


def test_waveform_closing_time_hits_threshold():
    w = GwWaveform(1e-6, 2 * math.pi * 1e3, 2e-3)
    np.testing.assert_allclose(w.window(w.closing_time(1e-12)), 1e-12, rtol=1e-12)
    assert w.f_gw == pytest.approx(1e3)


def test_projection_by_orientation():
    c = 1e-2
    assert PhononMode((1, 0, 0), c).projection == pytest.approx(1.0)
    assert PhononMode((0, 2, 0), c).projection == pytest.approx(-1.0)
    assert PhononMode((0, 0, 3), c).projection == pytest.approx(0.0)
    assert PhononMode((1, 1, 0), c).projection == pytest.approx(0.0)
    mode = PhononMode.from_omega(5.0, c, direction=(0, 0, 1))
    assert mode.omega == pytest.approx(5.0)
    with pytest.raises(ValueError):
        PhononMode((0, 0, 0), c)


def test_box_mode_frequency(bec):
    mode = PhononMode.box_mode((1, 2, 2), bec)
    assert mode.omega == pytest.approx(math.pi * bec.sound_speed / bec.box_length * 3)


def test_beta_slope_matches_direct_formula():
    big, tau = 2 * math.pi * 1e3, 1.5e-3
    w = GwWaveform(0.0, big, tau)
    for omega in (0.2 * big, 0.5 * big, 0.9 * big):
        direct = (
            math.sqrt(math.pi) * omega * tau / 4
            * math.exp(-((big + 2 * omega) * tau) ** 2 / 4)
            * (math.exp(2 * omega * big * tau**2) - 1)
        )
        assert beta_slope(omega, w) == pytest.approx(direct, rel=1e-12)


def test_beta_slope_is_finite_for_long_windows():
    w = GwWaveform(0.0, 2 * math.pi * 1e4, 10.0)
    assert math.isfinite(beta_slope(0.5 * w.omega_gw, w))
    assert beta_slope(0.0, w) == 0.0


def test_resonance_profile_peaks_near_half_frequency():
    big, tau = 2 * math.pi * 1e3, 5e-3
    omega = np.linspace(1, big, 20001)
    prof = resonance_profile(omega, big, tau)
    assert np.all(prof >= 0)
    assert omega[np.argmax(prof)] == pytest.approx(big / 2, rel=1e-3)


def test_beta_analytic_scales_with_projection():
    w = GwWaveform(1e-6, 2 * math.pi * 1e3, 1e-3)
    along_x = PhononMode.from_omega(0.5 * w.omega_gw, 1e-2)
    along_y = PhononMode.from_omega(0.5 * w.omega_gw, 1e-2, direction=(0, 1, 0))
    bx, by = beta_analytic(along_x, w), beta_analytic(along_y, w)
    assert bx.alpha == 1
    assert by.beta == pytest.approx(-bx.beta)


@pytest.mark.parametrize("omega_tau", [1.0, 5.0, 20.0])
def test_numeric_beta_agrees_to_first_order(omega_tau):
    big = 2 * math.pi * 100.0
    w = GwWaveform(1e-6, big, omega_tau / big)
    mode = PhononMode.from_omega(0.5 * big, 1e-2)
    num = numeric_bogoliubov(mode, w).pair
    an = beta_analytic(mode, w)
    assert abs(num.beta - an.beta) <= 1e-2 * abs(an.beta)
    # phase-space area is conserved by the exact evolution
    assert abs(num.norm_defect) < 1e-7


def test_numeric_beta_is_linear_in_strain():
    big = 2 * math.pi * 100.0
    mode = PhononMode.from_omega(0.5 * big, 1e-2)
    b1 = numeric_bogoliubov(mode, GwWaveform(1e-6, big, 4 * math.pi / big)).pair.beta
    b2 = numeric_bogoliubov(mode, GwWaveform(2e-6, big, 4 * math.pi / big)).pair.beta
    assert b2 == pytest.approx(2 * b1, rel=1e-3)


def test_extract_free_solution():
    omega = 3.0
    t = np.linspace(0, 5, 40)
    psi = 0.7 * np.exp(-1j * omega * t) + 0.2j * np.exp(1j * omega * t)
    dpsi = -1j * omega * 0.7 * np.exp(-1j * omega * t) + 1j * omega * 0.2j * np.exp(1j * omega * t)
    pair, residual = extract_bogoliubov(t, psi, dpsi, omega)
    assert pair.alpha == pytest.approx(0.7)
    assert pair.beta == pytest.approx(0.2j)
    assert residual < 1e-12


def test_extract_flags_open_window():
    omega = 3.0
    t = np.linspace(0, 5, 40)
    psi = np.exp(-1j * omega * t) * (1 + 0.01 * t)
    with pytest.raises(WindowNotClosedError):
        extract_bogoliubov(t, psi, -1j * omega * psi, omega)


def test_dispersion_follows_quadratic_deviation_law(bec):
    for frac in (1e-3, 1e-2, 0.1):
        k = frac * bec.chemical_potential / bec.sound_speed
        branch = dispersion(k, bec)
        ratio = branch.omega_minus / (bec.sound_speed * k)
        law = math.sqrt(1 + (bec.hbar * k / (2 * bec.atom_mass * bec.sound_speed)) ** 2)
        assert ratio == pytest.approx(law, rel=1e-9)
        assert branch.omega_plus > branch.omega_minus
    assert branch.mu == pytest.approx(bec.chemical_potential, rel=1e-9)


def test_dispersion_input_checks(bec):
    with pytest.raises(ValueError):
        dispersion(-1.0, bec)
    fast = BecConfig(1e-25, 7e20, 0.6 * bec.c_light, 1e-3)
    with pytest.raises(ValueError):
        dispersion(1.0, fast)


def test_chemical_potential_in_hz():
    b = BecConfig(1e-25, 7e20, 1.8e-3, 1e-3)
    assert b.chemical_potential_hz == pytest.approx(489.2, rel=1e-3)


def test_max_squeezing_formula(bec):
    omega = 2 * math.pi * 1e3
    expected = 0.5 * math.log(56 * math.pi**2 * bec.sound_speed**3 * bec.energy_density / (omega**4 * bec.hbar))
    assert max_squeezing(bec, omega).r_max == pytest.approx(expected, rel=1e-12)


def test_max_squeezing_without_headroom(bec):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        ceiling = max_squeezing(bec, 1e12)
    assert ceiling.r_max == 0.0 and not ceiling.has_headroom


def test_max_squeezing_warns_outside_linear_regime(bec):
    with pytest.warns(ValidityWarning):
        max_squeezing(bec, bec.chemical_potential)


def test_diluteness():
    b = BecConfig(1e-25, 7e20, 1.2e-2, 1e-3)
    lam = 0.1 * b.c_light / b.sound_speed
    na3 = gp_validity(b, lam)
    assert na3 == pytest.approx(1e-2 / (4 * math.pi) ** 3, rel=1e-12)
    assert is_dilute(na3)
    assert not is_dilute(2e-3)
