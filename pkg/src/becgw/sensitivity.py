"""Strain-sensitivity bounds summed over the phonon modes of a box condensate.

A mode of frequency ``omega`` contributes ``M * pi omega**2 tau**2 / 64 * R * D**2``
to the Fisher information on its projected strain, with ``D`` the resonance
profile of :func:`becgw.mode_dynamics.resonance_profile` and ``M = t_obs/tau``
repeated measurements.  Averaging the orientation factor over directions
gives 4/15.  Box modes ``k = pi/L (nx, ny, nz)`` with positive integers are
summed exactly, or replaced by the continuum integral (by quadrature or in
closed form) when the resonance sits far above the lowest harmonic.

The plotted strain curve is ``sqrt(delta_eps_sq / f)`` in Hz^-1/2.
"""

from dataclasses import dataclass
import math
from typing import Optional
import warnings

import numpy as np
from scipy import integrate, optimize, signal

from .errors import ConvergenceError, TruncationWarning
from .metrology import r_factor
from .mode_dynamics import GwWaveform, resonance_profile

ANGULAR_FACTOR = 4.0 / 15.0
PLOTTED_QUANTITY = "sqrt(delta_eps_sq/f)"


@dataclass(frozen=True)
class MeasurementPlan:
    """Single-shot duration ``tau``, total time ``t_obs`` and parallel condensates."""

    tau: float
    t_obs: float
    n_becs: int = 1

    def __post_init__(self):
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise ValueError(f"tau must be positive and finite, got {self.tau}")
        if not (self.t_obs >= self.tau and math.isfinite(self.t_obs)):
            raise ValueError(f"t_obs must be finite and >= tau, got {self.t_obs}")
        if int(self.n_becs) != self.n_becs or self.n_becs < 1:
            raise ValueError(f"n_becs must be an integer >= 1, got {self.n_becs}")

    @property
    def n_measurements(self):
        return self.t_obs / self.tau


@dataclass(frozen=True)
class SensitivityPoint:
    """One point of a strain curve; failed points carry ``nan`` and ``error``."""

    f_gw: float
    delta_eps_sq: float
    curve_value: float
    valid: bool = True
    error: Optional[str] = None

    @classmethod
    def from_variance(cls, f_gw, delta_eps_sq, valid=True):
        return cls(f_gw, delta_eps_sq, math.sqrt(delta_eps_sq / f_gw), valid)

    @classmethod
    def failed(cls, f_gw, message):
        return cls(f_gw, math.nan, math.nan, False, message)


def _check_tau(wave, plan):
    if not math.isclose(wave.tau, plan.tau, rel_tol=1e-12):
        raise ValueError(
            f"waveform window tau = {wave.tau} differs from measurement tau = {plan.tau}"
        )


def _log_mode_info(omega, wave, r_value):
    """log of ``pi omega**2 tau**2 / 64 * R * D**2`` for ``omega > 0`` (array)."""
    omega = np.asarray(omega, dtype=float)
    tau, big = wave.tau, wave.omega_gw
    with np.errstate(divide="ignore"):
        log_d = -0.25 * ((big - 2 * omega) * tau) ** 2 + np.log(-np.expm1(-2 * omega * big * tau**2))
        return math.log(math.pi / 64 * r_value) + 2 * np.log(omega * tau) + 2 * log_d


def single_mode_bound(mode, wave, p, plan):
    """Fisher information ``1/<d eps_t**2>`` of one mode over all ``M`` measurements.

    ``eps_t`` is the strain projected on the mode orientation.  The
    per-measurement value ``pi omega**2 tau**2 R D**2 / 64`` is formed in log
    space and multiplied by ``M = t_obs / tau``.
    """
    _check_tau(wave, plan)
    if mode.omega == 0:
        return 0.0
    value = math.exp(float(_log_mode_info(mode.omega, wave, r_factor(p)))) * plan.n_measurements
    if not math.isfinite(value):
        raise OverflowError("single-mode bound is not finite")
    return value


def angular_factor():
    """Solid-angle average of ``((kx**2 - ky**2) / k**2)**2``."""
    return ANGULAR_FACTOR


def angular_factor_mc(n_samples=1_000_000, rng=None):
    """Monte-Carlo estimate of :func:`angular_factor` and its standard error."""
    rng = np.random.default_rng(rng)
    v = rng.standard_normal((n_samples, 3))
    k2 = np.einsum("ij,ij->i", v, v)
    f = ((v[:, 0] ** 2 - v[:, 1] ** 2) / k2) ** 2
    return float(f.mean()), float(f.std(ddof=1) / math.sqrt(n_samples))


def _peak_index_units(config, wave):
    """Resonance position ``n = Omega L / (2 pi c_s)`` and width ``L / (2 pi c_s tau)``."""
    scale = 2 * math.pi * config.sound_speed / config.box_length
    return wave.omega_gw / scale, 1.0 / (scale * wave.tau)


def _n_to_omega(n, config):
    return math.pi * config.sound_speed / config.box_length * np.asarray(n, dtype=float)


def _term_profile(config, wave):
    """Shape ``n**4 D(omega(n))**2`` of the continuum summand."""

    def shape(n):
        n = np.asarray(n, dtype=float)
        return n**4 * resonance_profile(_n_to_omega(n, config), wave.omega_gw, wave.tau) ** 2

    return shape


class _ResonanceFrame:
    """The continuum summand in the offset ``u = (2 omega - Omega) tau`` from resonance.

    ``n = n_res + u * width`` and ``(Omega - 2 omega) tau = -u`` exactly, so the
    Gaussian factor has no cancellation however large ``Omega tau`` is.
    """

    def __init__(self, config, wave):
        self.n_res, self.width = _peak_index_units(config, wave)
        self.tau, self.big = wave.tau, wave.omega_gw
        self.u_min = -self.big * self.tau  # n = 0

    def n(self, u):
        return self.n_res + np.asarray(u, dtype=float) * self.width

    def omega(self, u):
        return 0.5 * (self.big + np.asarray(u, dtype=float) / self.tau)

    def shape(self, u):
        """``n**4 D**2`` at offset ``u``."""
        u = np.asarray(u, dtype=float)
        profile_sq = np.exp(-0.5 * u * u) * np.expm1(-2 * self.omega(u) * self.big * self.tau**2) ** 2
        return self.n(u) ** 4 * profile_sq

    def u_of_n(self, n):
        return (n - self.n_res) / self.width

    def peak(self):
        """Offset and height of the maximum of :meth:`shape`."""
        lo = max(self.u_min, -40.0)
        grid = np.linspace(lo, 40.0, 4001)
        i = int(np.argmax(self.shape(grid)))
        a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
        res = optimize.minimize_scalar(lambda u: -float(self.shape(u)), bounds=(a, b), method="bounded",
                                       options={"xatol": 1e-9})
        return float(res.x), float(-res.fun)


def integrand_peak(config, wave):
    """Mode index ``n`` where the continuum summand ``n**4 D**2`` peaks."""
    frame = _ResonanceFrame(config, wave)
    return float(frame.n(frame.peak()[0]))


def auto_n_max(config, wave, rel=1e-8):
    """Smallest per-axis cutoff beyond the peak where the summand is below ``rel`` of its peak."""
    frame = _ResonanceFrame(config, wave)
    u_peak, v_peak = frame.peak()
    n_peak = float(frame.n(u_peak))
    shape = _term_profile(config, wave)
    n = np.arange(max(1, math.ceil(n_peak)), math.ceil(frame.n(u_peak + 40)) + 11)
    below = np.nonzero(shape(n) < rel * v_peak)[0]
    if below.size == 0:
        return int(n[-1])
    return int(n[below[0]])


def _shell_counts(n_max):
    """Number of positive triples ``(nx, ny, nz) <= n_max`` with each value of ``|n|**2``."""
    squares = np.zeros(n_max * n_max + 1)
    squares[np.arange(1, n_max + 1) ** 2] = 1.0
    two = signal.fftconvolve(squares, squares)
    three = np.rint(signal.fftconvolve(two, squares))
    return np.maximum(three, 0.0)


def mode_sum_discrete(config, wave, p, plan, n_max=None):
    """``4/15 * sum_k single_mode_bound`` over positive box triples up to ``n_max`` per axis.

    Triples are grouped by ``|n|**2`` so the cost is one FFT convolution.  If the
    summand at ``|n| = n_max`` is not below ``1e-8`` of the peak a
    :class:`TruncationWarning` is issued.  ``n_max=None`` picks the cutoff.
    """
    _check_tau(wave, plan)
    if n_max is None:
        n_max = auto_n_max(config, wave)
    n_max = int(n_max)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    frame = _ResonanceFrame(config, wave)
    u_peak, v_peak = frame.peak()
    n_peak = float(frame.n(u_peak))
    shape = _term_profile(config, wave)
    if n_max < n_peak or shape(n_max) >= 1e-8 * v_peak:
        warnings.warn(
            f"mode sum truncated at n_max = {n_max} before the summand decayed (peak near n = {n_peak:.1f})",
            TruncationWarning,
            stacklevel=2,
        )
    counts = _shell_counts(n_max)
    s = np.nonzero(counts)[0]
    omega = _n_to_omega(np.sqrt(s), config)
    info = np.exp(_log_mode_info(omega, wave, r_factor(p)))
    return ANGULAR_FACTOR * plan.n_measurements * float(np.dot(counts[s], info))


def _prefactor(config, wave, plan, r_value):
    return (
        math.pi**4 * plan.n_measurements * config.sound_speed**2 * r_value * wave.tau**2
        / (480 * config.box_length**2)
    )


def _continuum_integral(config, wave, weight=None, n_min=0.0, epsrel=1e-10, target=1e-8):
    """``int_{n_min}^inf n**4 D**2 w(omega) dn`` split around the peak; ``w`` defaults to 1.

    Integrated in the resonance offset ``u`` (see :class:`_ResonanceFrame`).
    """
    frame = _ResonanceFrame(config, wave)
    if weight is None:
        f = frame.shape
    else:
        def f(u):
            return frame.shape(u) * weight(float(frame.omega(u)))
    u_peak, _ = frame.peak()
    u_min = max(frame.u_min, frame.u_of_n(n_min))
    edges = {u_min, *(max(u_min, u_peak + k) for k in (-40, -10, -3, 0, 3, 10, 40))}
    if weight is not None and n_min > 0:
        # mode-dependent weights can make the region below the peak steep
        low_n = float(frame.n(sorted(edges)[1]))
        if low_n > 2 * n_min:
            edges.update(frame.u_of_n(np.geomspace(n_min, low_n, 16)).tolist())
    edges = sorted(edges)
    total, err = 0.0, 0.0
    with warnings.catch_warnings():
        # accuracy is judged from the returned error estimates below
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(edges[:-1], edges[1:]):
            val, e = integrate.quad(f, a, b, epsrel=epsrel, epsabs=0.0, limit=400)
            total += val
            err += e
        tail, e = integrate.quad(f, edges[-1], np.inf, epsrel=epsrel, epsabs=0.0, limit=200)
    total += tail
    err += e
    if not total > 0 or err > target * total:
        raise ConvergenceError("mode integral quadrature did not converge", (total, err))
    return total * frame.width


def mode_integral_quadrature(config, wave, p, plan):
    """Continuum mode integral ``pi**4 M c_s**2 R tau**2 / (480 L**2) * int n**4 D**2 dn``."""
    _check_tau(wave, plan)
    r_value = r_factor(p)
    return _prefactor(config, wave, plan, r_value) * _continuum_integral(config, wave)


def mode_integral_closed(config, wave, p, plan):
    """Closed form of the continuum integral.

    ``M L**3 R (4 x**2 + 12 x - 3 expm1(-x)) / (7680 sqrt(2 pi) c_s**3 tau**3)``
    with ``x = (Omega tau)**2 / 2``; this is the usual
    ``e^-x (e^x (4x**2 + 12x + 3) - 3)`` with the exponential cancelled.
    """
    _check_tau(wave, plan)
    return closed_information(config, wave, plan, r_factor(p))


def closed_information(config, wave, plan, r_value):
    """:func:`mode_integral_closed` for an explicit (possibly weighted) ``R``."""
    x = 0.5 * (wave.omega_gw * wave.tau) ** 2
    poly = 4 * x * x + 12 * x - 3 * math.expm1(-x)
    return (
        plan.n_measurements * config.box_length**3 * r_value * poly
        / (7680 * math.sqrt(2 * math.pi) * config.sound_speed**3 * wave.tau**3)
    )


def small_omega_tau_bound(config, wave, p, plan):
    """Variance ``1024 sqrt(2 pi) c_s**3 tau**2 / (L**3 t_obs Omega**2 R)`` for ``Omega tau << 1``."""
    _check_tau(wave, plan)
    return (
        1024 * math.sqrt(2 * math.pi) * config.sound_speed**3 * wave.tau**2
        / (config.box_length**3 * plan.t_obs * wave.omega_gw**2 * r_factor(p))
    )


def point_from_information(config, wave, plan, info):
    """Variance ``1/(N info)`` and curve value at ``f = Omega/2pi``; flags ``Omega/2`` above the linear regime."""
    delta = 1.0 / (info * plan.n_becs)
    if not (delta > 0 and math.isfinite(delta)):
        raise ArithmeticError(f"strain variance is not positive and finite: {delta}")
    return SensitivityPoint.from_variance(
        wave.f_gw, delta, valid=config.in_linear_regime(0.5 * wave.omega_gw)
    )


def total_sensitivity(config, wave, p, plan):
    """Closed-form ``<d eps**2>_tot`` divided over ``n_becs`` condensates."""
    return point_from_information(config, wave, plan, mode_integral_closed(config, wave, p, plan))


def sweep_curve(config, p, plan, f_grid, evaluate=None, map_fn=map):
    """One :class:`SensitivityPoint` per frequency in ascending ``f_grid``.

    ``evaluate(config, wave, p, plan)`` defaults to :func:`total_sensitivity`.
    Points are independent, so any ordered ``map`` (for example an executor's)
    may be supplied.  A failing point is recorded with its message instead of
    aborting the sweep.
    """
    f_grid = [float(f) for f in f_grid]
    if any(b < a for a, b in zip(f_grid, f_grid[1:])):
        raise ValueError("f_grid must be sorted ascending")
    evaluate = evaluate or total_sensitivity

    def one(f):
        try:
            return evaluate(config, GwWaveform.from_frequency(f, plan.tau), p, plan)
        except (ArithmeticError, ValueError) as exc:
            return SensitivityPoint.failed(f, f"{type(exc).__name__}: {exc}")

    return list(map_fn(one, f_grid))
