"""Zero-temperature Beliaev damping of squeezed phonons.

A squeezed mode with initial squeezing ``r0`` and purity ``mu0`` relaxes at
rate ``gamma_b`` towards a state of purity ``mu_inf``.  Purity and squeezing
follow

    mu(t) = mu0 (x**2 + q**2 (1-x)**2 + 2 q x (1-x) cosh 2r0)**-1/2
    cosh 2r(t) = mu(t) (x cosh 2r0 / mu0 + (1-x) / mu_inf)

with ``x = exp(-gamma_b t)`` and ``q = mu0/mu_inf``.  The information of a
measurement of duration ``tau`` is then taken as the pure-state value at
``r(tau)`` multiplied by ``mu(tau)``, which is an approximation.
"""

from dataclasses import dataclass
import math
from typing import Callable, NamedTuple, Optional
import warnings

import numpy as np
from scipy import optimize

from .errors import ValidityWarning
from .metrology import SqueezeParams, r_factor
from .sensitivity import (
    _check_tau,
    _continuum_integral,
    _prefactor,
    closed_information,
    point_from_information,
)

#: ``|n|`` of the lowest box mode ``(1, 1, 1)``; weakly damped modes below it are not physical.
LOWEST_MODE = math.sqrt(3.0)

APPROXIMATION_NOTE = "purity multiplies the pure-state information (approximation)"


@dataclass(frozen=True)
class DecoherenceParams:
    r0: float
    mu0: float = 1.0
    mu_inf: float = 1.0
    gamma_b: float = 0.0

    def __post_init__(self):
        if not (self.r0 >= 0 and math.isfinite(self.r0)):
            raise ValueError(f"r0 must be finite and >= 0, got {self.r0}")
        for name in ("mu0", "mu_inf"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {v}")
        if not (self.gamma_b >= 0 and math.isfinite(self.gamma_b)):
            raise ValueError(f"gamma_b must be finite and >= 0, got {self.gamma_b}")

    def with_rate(self, gamma_b):
        return DecoherenceParams(self.r0, self.mu0, self.mu_inf, gamma_b)


def beliaev_rate(config, omega_k):
    """``gamma_B = 3/(640 pi) * hbar omega**5 / (m n c_s**5)``."""
    omega_k = np.asarray(omega_k, dtype=float)
    g = 3 / (640 * math.pi) * config.hbar * omega_k**5 / (
        config.atom_mass * config.number_density * config.sound_speed**5
    )
    return float(g) if g.ndim == 0 else g


def _inverse_cosh2(r0):
    """``1/cosh(2 r0)``, zero once ``cosh`` would overflow."""
    return 0.0 if 2 * r0 > 700 else 1.0 / math.cosh(2 * r0)


def decoherence_time(p, approximate=False):
    """Time ``t_d`` from ``ln[(q + 1/q - 2 cosh 2r0) / (q - cosh 2r0)] / gamma_b``.

    ``approximate=True`` sets the logarithm to 1, the order-one estimate
    ``t_d ~ 1/gamma_b`` used for strongly squeezed states.  The logarithm
    itself tends to ``ln 2`` in that limit when ``mu0 = mu_inf``.  A
    non-positive log argument raises ``ValueError`` naming the offending
    factor.  If ``r0 <= max(q, 1/q)`` a :class:`ValidityWarning` is issued.
    """
    if p.gamma_b == 0:
        return math.inf
    if approximate:
        return 1.0 / p.gamma_b
    q = p.mu0 / p.mu_inf
    if not p.r0 > max(q, 1 / q):
        warnings.warn(
            f"r0 = {p.r0} does not exceed max(mu0/mu_inf, mu_inf/mu0) = {max(q, 1 / q):.4g}",
            ValidityWarning,
            stacklevel=2,
        )
    inv = _inverse_cosh2(p.r0)
    # both factors scaled by 1/cosh(2 r0) so large r0 stays finite
    num = (q + 1 / q) * inv - 2
    den = q * inv - 1
    if num == 0 or den == 0 or (num > 0) != (den > 0):
        raise ValueError(
            f"decoherence-time log argument is not positive: numerator "
            f"q + 1/q - 2 cosh 2r0 has sign {math.copysign(1, num):+.0f}, "
            f"denominator q - cosh 2r0 has sign {math.copysign(1, den):+.0f}"
        )
    return math.log(num / den) / p.gamma_b


def _decay_parts(p, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    x = np.exp(-p.gamma_b * t)
    return t, x, -np.expm1(-p.gamma_b * t)


def purity_at(p, t):
    """Purity ``mu(t)``; ``mu(0) = mu0`` and ``mu -> mu_inf``."""
    t, x, y = _decay_parts(p, t)
    q = p.mu0 / p.mu_inf
    c = math.cosh(2 * p.r0)
    mu = p.mu0 / np.sqrt(x * x + q * q * y * y + 2 * q * x * y * c)
    return float(mu) if mu.ndim == 0 else mu


def cosh2r_over_mu(p, t):
    """Right-hand bracket ``x cosh 2r0 / mu0 + (1 - x) / mu_inf``."""
    _, x, y = _decay_parts(p, t)
    v = x * math.cosh(2 * p.r0) / p.mu0 + y / p.mu_inf
    return float(v) if v.ndim == 0 else v


def squeezing_at(p, t):
    """Squeezing ``r(t)`` from ``cosh 2r = mu(t) * bracket``.

    Arguments of ``arccosh`` below 1 are clamped (``r = 0``); a clamp larger
    than rounding issues a :class:`ValidityWarning`.
    """
    t_arr = np.asarray(t, dtype=float)
    arg = np.asarray(purity_at(p, t_arr) * cosh2r_over_mu(p, t_arr))
    low = arg < 1
    if np.any(arg < 1 - 1e-12):
        warnings.warn("arccosh argument below 1 clamped; squeezing reported as 0", ValidityWarning, stacklevel=2)
    r = 0.5 * np.arccosh(np.where(low, 1.0, arg))
    # no decay has happened: return r0 exactly
    r = np.where(p.gamma_b * t_arr == 0, p.r0, r)
    return float(r) if r.ndim == 0 else r


def squeezing_decay_time(p):
    """Time at which ``exp(2 r(t))`` has fallen from ``exp(2 r0)`` to ``exp(r0)``."""
    if p.r0 == 0:
        return 0.0
    if p.gamma_b == 0:
        return math.inf
    target = 0.5 * p.r0

    def gap(g):
        return squeezing_at(p, g / p.gamma_b) - target

    hi = 1.0
    while gap(hi) > 0:
        hi *= 2
        if hi > 1e4:
            raise ValueError("squeezing never decays to half its initial value")
    return optimize.brentq(gap, 0.0, hi, xtol=1e-14, rtol=1e-14) / p.gamma_b


def squeezing_decay_time_asymptotic(r0, gamma_b):
    """Large-squeezing estimate of the same time from ``exp(2r) ~ (x e^{2r0} + 1 - x)/sqrt(...)``.

    ``-ln[(2e - e**2 - 1 - sqrt(e - e**2 - e**3 + e**4)) / (4e - 3e**2 - 1)] / gamma_b``
    with ``e = exp(2 r0)``, i.e. ``ln(3/2)/gamma_b`` for ``r0 -> inf``.
    """
    e = math.exp(2 * r0)
    root = math.sqrt(e - e * e - e**3 + e**4)
    ratio = (2 * e - e * e - 1 - root) / (4 * e - 3 * e * e - 1)
    return -math.log(ratio) / gamma_b


def asymptotic_log_merit(tau, r0, gamma_b):
    """log of the single-mode figure of merit ``tau**4 e^{4 r0} e^{-2 gamma_b tau}``."""
    return 4 * math.log(tau) + 4 * r0 - 2 * gamma_b * tau


class TauOptimum(NamedTuple):
    tau: float
    log_merit: float
    lower: float
    upper: float
    at_lower: bool
    at_upper: bool
    infeasible: bool


def optimal_tau(
    p,
    wave,
    log_merit: Optional[Callable[[float], float]] = None,
    tau_max=None,
    maxiter=100,
):
    """Maximise a figure of merit over ``tau`` in ``[2 pi / Omega, 10 / gamma_b]``.

    ``log_merit(tau)`` defaults to :func:`asymptotic_log_merit`, whose
    maximum is ``2/gamma_b``.  ``tau_max`` caps the upper bound and is
    required for ``gamma_b = 0``.  A bounded Brent search on ``log tau`` is
    compared with both endpoints; boundary optima are flagged.
    An empty interval returns the lower bound with ``infeasible=True``.
    """
    lower = 2 * math.pi / wave.omega_gw
    upper = math.inf if p.gamma_b == 0 else 10 / p.gamma_b
    if tau_max is not None:
        upper = min(upper, tau_max)
    if not math.isfinite(upper):
        raise ValueError("gamma_b = 0 needs an explicit tau_max")
    if log_merit is None:
        def log_merit(tau):
            return asymptotic_log_merit(tau, p.r0, p.gamma_b)
    if upper <= lower:
        return TauOptimum(lower, log_merit(lower), lower, upper, True, False, True)

    lo, hi = math.log(lower), math.log(upper)
    scan = np.linspace(lo, hi, 17)
    vals = np.array([log_merit(math.exp(u)) for u in scan])
    rises = np.diff(vals) > 0
    # unimodal means the increments change sign at most once, from rising to falling
    if np.any(rises[1:] & ~rises[:-1]):
        warnings.warn("figure of merit is not unimodal on the coarse scan", ValidityWarning, stacklevel=2)
    res = optimize.minimize_scalar(
        lambda u: -log_merit(math.exp(u)),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12, "maxiter": maxiter},
    )
    candidates = [(res.x, -res.fun), (lo, vals[0]), (hi, vals[-1])]
    best_u, best_v = max(candidates, key=lambda c: c[1])
    span = hi - lo
    at_lower = bool(best_u - lo <= 1e-9 * max(1.0, span))
    at_upper = bool(hi - best_u <= 1e-9 * max(1.0, span))
    tau = lower if at_lower else upper if at_upper else math.exp(best_u)
    return TauOptimum(tau, float(best_v), lower, upper, at_lower, at_upper, False)


def damped_weight(p, phi, tau):
    """``R(r(tau), phi) * mu(tau)``, using ``sinh**2 2r = cosh**2 2r - 1``."""
    gt = p.gamma_b * tau
    if gt == 0:
        return r_factor(SqueezeParams(p.r0, phi)) * p.mu0
    x, y = math.exp(-gt), -math.expm1(-gt)
    q = p.mu0 / p.mu_inf
    c = math.cosh(2 * p.r0)
    mu = p.mu0 / math.sqrt(x * x + q * q * y * y + 2 * q * x * y * c)
    ch = max(mu * (x * c / p.mu0 + y / p.mu_inf), 1.0)
    return (2 + 6 * math.sin(phi) ** 2 * (ch - 1) * (ch + 1)) * mu


def decohered_information(config, wave, p0, plan, dec, rate=None):
    """Mode-integrated information after damping during each measurement.

    ``rate`` selects the per-mode damping: ``None`` uses :func:`beliaev_rate`
    at each mode frequency, a number applies one rate to every mode, and a
    callable maps ``omega`` to a rate.  With a single rate the weight is
    mode independent and the closed form is used.  Per-mode weights grow
    without bound as ``omega -> 0``, so the continuum integral then starts
    at the lowest box mode ``|n| = sqrt(3)`` instead of ``n = 0``.
    """
    _check_tau(wave, plan)
    if not math.isclose(p0.r, dec.r0, rel_tol=1e-12, abs_tol=0.0):
        raise ValueError(f"squeeze r = {p0.r} differs from decoherence r0 = {dec.r0}")
    if rate is not None and not callable(rate):
        weight = damped_weight(dec.with_rate(float(rate)), p0.phi, plan.tau)
        return closed_information(config, wave, plan, weight)
    if rate is None:
        def rate(omega):
            return beliaev_rate(config, omega)

    def weight(omega):
        return damped_weight(dec.with_rate(rate(omega)), p0.phi, plan.tau)

    return _prefactor(config, wave, plan, 1.0) * _continuum_integral(config, wave, weight, n_min=LOWEST_MODE)


def decohered_sensitivity(config, wave, p0, plan, dec, rate=None):
    """:func:`becgw.sensitivity.total_sensitivity` with damped squeezing and purity."""
    info = decohered_information(config, wave, p0, plan, dec, rate)
    return point_from_information(config, wave, plan, info)
