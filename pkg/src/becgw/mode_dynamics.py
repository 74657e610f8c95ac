"""Phonon modes of a box condensate driven by a windowed plus-polarised strain.

The mode function obeys

    psi'' + omega**2 * (1 + eps_t * exp(-t**2/tau**2) * sin(Omega*t)) * psi = 0

with ``eps_t = eps * (kx**2 - ky**2) / |k|**2``.  This module provides the
first-order Bogoliubov coefficients in closed form, a high-order numerical
integration of the same equation used as an independent check, the exact
two-branch dispersion relation of the relativistic condensate, and the
validity bounds of the linear theory.  All interfaces are SI.
"""

from dataclasses import dataclass, field
import math
from typing import NamedTuple
import warnings

import numpy as np
from scipy import constants
from scipy.integrate import solve_ivp

from .errors import IntegrationError, ValidityWarning, WindowNotClosedError

HBAR = constants.hbar
C_LIGHT = constants.c

#: ``hbar * omega / (m * c_s**2)`` must stay below this for linear dispersion.
LINEAR_DISPERSION_FRACTION = 0.1

#: The strain window counts as closed once ``exp(-t**2/tau**2)`` drops below this.
WINDOW_CLOSED = 1e-12


@dataclass(frozen=True)
class GwWaveform:
    """Strain ``h_+(t) = epsilon * exp(-t**2/tau**2) * sin(omega_gw*t)``."""

    epsilon: float
    omega_gw: float
    tau: float

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if not self.omega_gw > 0:
            raise ValueError(f"omega_gw must be > 0, got {self.omega_gw}")
        if not self.tau > 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")

    @classmethod
    def from_frequency(cls, f_gw, tau, epsilon=0.0):
        return cls(epsilon=epsilon, omega_gw=2 * math.pi * f_gw, tau=tau)

    @property
    def f_gw(self):
        return self.omega_gw / (2 * math.pi)

    def window(self, t):
        return np.exp(-((np.asarray(t) / self.tau) ** 2))

    def strain(self, t):
        t = np.asarray(t)
        return self.epsilon * self.window(t) * np.sin(self.omega_gw * t)

    def closing_time(self, threshold=WINDOW_CLOSED):
        """Time after which the window factor stays below ``threshold``."""
        return self.tau * math.sqrt(-math.log(threshold))


@dataclass(frozen=True)
class BecConfig:
    """Homogeneous condensate in a cubic box of side ``box_length``."""

    atom_mass: float
    number_density: float
    sound_speed: float
    box_length: float
    hbar: float = HBAR
    c_light: float = C_LIGHT

    def __post_init__(self):
        for name in ("atom_mass", "number_density", "sound_speed", "box_length", "hbar", "c_light"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value}")
        if self.sound_speed >= self.c_light:
            raise ValueError("sound_speed must be far below c_light")

    @property
    def chemical_potential(self):
        """``mu = m c_s**2`` as an angular frequency (rad/s)."""
        return self.atom_mass * self.sound_speed**2 / self.hbar

    @property
    def chemical_potential_hz(self):
        return self.chemical_potential / (2 * math.pi)

    @property
    def energy_density(self):
        """Rest-mass energy density ``n m c**2`` in J/m^3."""
        return self.number_density * self.atom_mass * self.c_light**2

    @property
    def fundamental_omega(self):
        """Lowest acoustic harmonic ``2 pi c_s / L`` quoted for the continuum limit."""
        return 2 * math.pi * self.sound_speed / self.box_length

    def in_linear_regime(self, omega, fraction=LINEAR_DISPERSION_FRACTION):
        return bool(omega < fraction * self.chemical_potential)


@dataclass(frozen=True)
class PhononMode:
    """Plane-wave phonon with wavevector ``k_vec`` (rad/m) and ``omega = c_s |k|``."""

    k_vec: tuple
    sound_speed: float
    omega: float = field(init=False)

    def __post_init__(self):
        k = tuple(float(x) for x in self.k_vec)
        if len(k) != 3:
            raise ValueError("k_vec needs three components")
        knorm = math.sqrt(sum(x * x for x in k))
        if not knorm > 0:
            raise ValueError("|k| must be > 0")
        if not self.sound_speed > 0:
            raise ValueError("sound_speed must be > 0")
        object.__setattr__(self, "k_vec", k)
        object.__setattr__(self, "omega", self.sound_speed * knorm)

    @classmethod
    def from_omega(cls, omega, sound_speed, direction=(1.0, 0.0, 0.0)):
        d = np.asarray(direction, dtype=float)
        d = d / np.linalg.norm(d)
        return cls(tuple(d * omega / sound_speed), sound_speed)

    @classmethod
    def box_mode(cls, n, config):
        """Mode ``k = pi/L * (nx, ny, nz)`` of the box."""
        return cls(tuple(math.pi / config.box_length * np.asarray(n, dtype=float)), config.sound_speed)

    @property
    def k(self):
        return self.omega / self.sound_speed

    @property
    def projection(self):
        """Strain coupling ``(kx**2 - ky**2)/|k|**2`` of this orientation."""
        kx, ky, kz = self.k_vec
        return (kx * kx - ky * ky) / (kx * kx + ky * ky + kz * kz)

    def coupling(self, wave):
        return wave.epsilon * self.projection


@dataclass(frozen=True)
class BogoliubovPair:
    """Coefficients of ``alpha e^{-i omega t} + beta e^{+i omega t}`` after the wave."""

    alpha: complex
    beta: complex
    order: int = 1

    @property
    def norm_defect(self):
        """``|alpha|**2 - |beta|**2 - 1``, zero for an exact transformation."""
        return abs(self.alpha) ** 2 - abs(self.beta) ** 2 - 1.0


def resonance_profile(omega, omega_gw, tau):
    """``exp(-(O-2w)^2 t^2/4) - exp(-(O+2w)^2 t^2/4)`` without overflow.

    Written as ``-exp(-(O-2w)^2 t^2/4) * expm1(-2 w O t^2)``; works on arrays.
    """
    omega = np.asarray(omega, dtype=float)
    lead = np.exp(-0.25 * ((omega_gw - 2 * omega) * tau) ** 2)
    return -lead * np.expm1(-2.0 * omega * omega_gw * tau**2)


def beta_slope(omega, wave):
    """First-order ``beta`` per unit coupling, ``d beta / d eps_t``.

    Real for the odd (sine) waveform.  Evaluated from logarithms of each
    exponential factor so large ``Omega*tau**2`` never produces ``inf``.
    """
    if omega == 0:
        return 0.0
    tau, big = wave.tau, wave.omega_gw
    log_b = (
        math.log(math.sqrt(math.pi) * omega * tau / 4)
        - 0.25 * ((big - 2 * omega) * tau) ** 2
        + math.log(-math.expm1(-2 * omega * big * tau**2))
    )
    value = math.exp(log_b)
    if not math.isfinite(value):
        raise OverflowError(f"beta slope overflowed (log value {log_b})")
    return value


def beta_analytic(mode, wave):
    """First-order Bogoliubov coefficients of ``mode`` under ``wave``.

    ``alpha`` is exactly 1 for the odd waveform and
    ``beta = eps_t sqrt(pi) omega tau / 4 * exp(-(O+2w)^2 t^2/4) (exp(2 w O t^2) - 1)``.
    """
    beta = mode.coupling(wave) * beta_slope(mode.omega, wave)
    if not math.isfinite(beta):
        raise OverflowError("beta is not finite")
    return BogoliubovPair(alpha=1.0 + 0j, beta=complex(beta), order=1)


@dataclass(frozen=True)
class ModeEvolution:
    """Dense numerical solution ``psi(t)`` of the driven mode equation."""

    omega: float
    t_span: tuple
    solution: object

    def __call__(self, t):
        """Return ``(psi, dpsi/dt)`` at times ``t``."""
        y = self.solution.sol(np.asarray(t, dtype=float))
        return y[0], self.omega * y[1]

    def tail_samples(self, t_start, count=64):
        """Samples on ``[t_start, t_end]`` for coefficient extraction."""
        t = np.linspace(t_start, self.t_span[1], count)
        psi, dpsi = self(t)
        return t, psi, dpsi


def evolve_mode_numeric(mode, wave, t_span=None, tol=1e-10, method="DOP853"):
    """Integrate the mode equation from the positive-frequency solution at ``-T``.

    ``t_span`` defaults to ``(-T, T)`` with ``T = max(6 tau, closing time)``.
    The state is ``(psi, psi'/omega)`` so both components are order one and a
    single absolute tolerance is meaningful.
    """
    omega = mode.omega
    eps_t = mode.coupling(wave)
    if t_span is None:
        big_t = max(6 * wave.tau, wave.closing_time())
        t_span = (-big_t, big_t)
    t0, t1 = (float(t) for t in t_span)
    if not t1 > t0:
        raise ValueError("t_span must be increasing")
    tau, big = wave.tau, wave.omega_gw

    def rhs(t, y):
        drive = 1.0 + eps_t * math.exp(-((t / tau) ** 2)) * math.sin(big * t)
        return np.array([omega * y[1], -omega * drive * y[0]])

    phase = np.exp(-1j * omega * t0)
    y0 = np.array([phase, -1j * phase], dtype=complex)
    max_step = (t1 - t0) / 16 if eps_t == 0 else min((t1 - t0) / 16, 0.25 * tau, 1.0 / big)
    sol = solve_ivp(
        rhs, (t0, t1), y0, method=method, rtol=tol, atol=tol, dense_output=True, max_step=max_step
    )
    if sol.status != 0:
        raise IntegrationError(sol.message, float(sol.t[-1]))
    return ModeEvolution(omega=omega, t_span=(t0, t1), solution=sol)


class Extraction(NamedTuple):
    pair: BogoliubovPair
    residual: float


def extract_bogoliubov(t, psi, dpsi, omega, residual_tol=1e-8):
    """Project free-oscillator samples onto ``e^{-i omega t}`` and ``e^{+i omega t}``.

    Each sample gives ``alpha = e^{i w t}(psi + i psi'/w)/2`` and
    ``beta = e^{-i w t}(psi - i psi'/w)/2``.  The reported residual is the
    largest deviation of the per-sample coefficients from their mean; a large
    value means the strain was still acting on the sampled interval.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    psi = np.atleast_1d(np.asarray(psi, dtype=complex))
    dpsi = np.atleast_1d(np.asarray(dpsi, dtype=complex))
    if not omega > 0:
        raise ValueError("omega must be > 0")
    idpsi = 1j * dpsi / omega
    alphas = 0.5 * np.exp(1j * omega * t) * (psi + idpsi)
    betas = 0.5 * np.exp(-1j * omega * t) * (psi - idpsi)
    alpha, beta = alphas.mean(), betas.mean()
    residual = float(max(np.max(np.abs(alphas - alpha)), np.max(np.abs(betas - beta))))
    if residual > residual_tol:
        raise WindowNotClosedError(residual, residual_tol)
    return Extraction(BogoliubovPair(complex(alpha), complex(beta), order=0), residual)


def numeric_bogoliubov(mode, wave, tol=1e-10, samples=64, residual_tol=1e-8):
    """Bogoliubov coefficients from integrating the mode equation past the window."""
    evo = evolve_mode_numeric(mode, wave, tol=tol)
    t_close = wave.closing_time()
    t, psi, dpsi = evo.tail_samples(min(t_close, evo.t_span[1]), count=samples)
    return extract_bogoliubov(t, psi, dpsi, mode.omega, residual_tol=residual_tol)


@dataclass(frozen=True)
class DispersionBranch:
    """Both roots of the quadratic-fluctuation determinant at one ``k``.

    ``kappa`` and ``mu = kappa - m`` are angular frequencies (rad/s).
    """

    omega_plus: object
    omega_minus: object
    kappa: float
    mu: float


def dispersion(k, config):
    """Exact dispersion of the relativistic condensate, in SI.

    With ``u = (c_s/c)**2``, ``A = 3 kappa**2 - m**2 = 2 m**2/(1-3u)`` and
    ``s = 4 k**2 kappa**2 / A**2`` (natural units) the branches are
    ``omega**2 = k**2 + A (1 +- sqrt(1+s))``.  The Goldstone branch is
    rearranged into ``k**2 [s/(1+sqrt(1+s))**2 + u * 2/(1+sqrt(1+s))]`` since
    the naive form cancels away all digits when ``u ~ 1e-21``.
    """
    u = (config.sound_speed / config.c_light) ** 2
    if u >= 1.0 / 3.0:
        raise ValueError("dispersion requires c_s/c < 1/sqrt(3)")
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise ValueError("k must be >= 0")
    m_nat = config.atom_mass * config.c_light / config.hbar  # 1/m
    kappa_sq = m_nat**2 * (1 - u) / (1 - 3 * u)
    a_term = 2 * m_nat**2 / (1 - 3 * u)
    s = 4 * k**2 * kappa_sq / a_term**2
    root = np.sqrt(1 + s)
    minus_sq = k**2 * (s / (1 + root) ** 2 + u * 2 / (1 + root))
    plus_sq = k**2 + a_term * (1 + root)
    q = 2 * u / (1 - 3 * u)
    mu_nat = m_nat * q / (math.sqrt(1 + q) + 1)
    c = config.c_light
    omega_minus = c * np.sqrt(minus_sq)
    omega_plus = c * np.sqrt(plus_sq)
    if omega_minus.ndim == 0:
        omega_minus, omega_plus = float(omega_minus), float(omega_plus)
    return DispersionBranch(
        omega_plus=omega_plus, omega_minus=omega_minus, kappa=c * math.sqrt(kappa_sq), mu=c * mu_nat
    )


class SqueezingCeiling(NamedTuple):
    r_max: float
    has_headroom: bool


def max_squeezing(config, omega):
    """Largest squeezing keeping the squeezed ground state in the linear regime.

    ``exp(2 r) << 56 pi**2 c_s**3 rho / (omega**4 hbar)`` with ``rho = n m c**2``.
    Returns ``r_max = 0`` and ``has_headroom=False`` if the bound is at or below 1.
    """
    if not omega > 0:
        raise ValueError("omega must be > 0")
    if not config.in_linear_regime(omega):
        warnings.warn(
            f"omega = {omega:.4g} rad/s is not far below mu = {config.chemical_potential:.4g} rad/s",
            ValidityWarning,
            stacklevel=2,
        )
    log_arg = (
        math.log(56 * math.pi**2)
        + 3 * math.log(config.sound_speed)
        + math.log(config.energy_density)
        - 4 * math.log(omega)
        - math.log(config.hbar)
    )
    if log_arg <= 0:
        return SqueezingCeiling(0.0, False)
    return SqueezingCeiling(0.5 * log_arg, True)


def gp_validity(config, lambda_coupling):
    """Diluteness ``n a**3 = (lambda c_s)**2 / ((4 pi)**3 c**2)``; compare to ``1e-3``."""
    if lambda_coupling < 0:
        raise ValueError("lambda_coupling must be >= 0")
    return (lambda_coupling * config.sound_speed) ** 2 / ((4 * math.pi) ** 3 * config.c_light**2)


def is_dilute(na3, threshold=1e-3):
    return na3 < threshold
