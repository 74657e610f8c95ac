"""Single-mode Gaussian states: squeezing, Bogoliubov action, fidelity and QFI.

Covariance convention: ``sigma_mn = <X_m X_n + X_n X_m>/2`` with
``X_1 = (a + a^dag)/sqrt(2)``, so the vacuum is ``diag(1/2, 1/2)`` and pure
states have ``det sigma = 1/4``.  First moments are zero throughout.
"""

from dataclasses import dataclass
import math
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConvergenceError

TWO_PI = 2 * math.pi


def db_to_r(s):
    """Squeezing in dB, ``s = -10 log10(exp(-2 r))``, to the parameter ``r``."""
    if s < 0:
        raise ValueError(f"squeezing in dB must be >= 0, got {s}")
    return s * math.log(10) / 20


def r_to_db(r):
    return 20 * r / math.log(10)


@dataclass(frozen=True)
class SqueezeParams:
    """Squeezing magnitude ``r >= 0`` and angle ``phi``, stored reduced to ``[0, 2 pi)``."""

    r: float
    phi: float = math.pi / 2

    def __post_init__(self):
        if not (self.r >= 0 and math.isfinite(self.r)):
            raise ValueError(f"r must be finite and >= 0, got {self.r}")
        if not math.isfinite(self.phi):
            raise ValueError("phi must be finite")
        object.__setattr__(self, "phi", math.fmod(self.phi, TWO_PI) % TWO_PI)

    @classmethod
    def from_db(cls, s, phi=math.pi / 2):
        return cls(db_to_r(s), phi)


@dataclass(frozen=True)
class CovMatrix2:
    """Symmetric positive-definite 2x2 covariance ``[[s11, s12], [s12, s22]]``.

    Only positive definiteness is enforced.  First-order Bogoliubov maps with
    ``alpha = 1`` shrink the determinant below 1/4 at second order, so the
    uncertainty bound is checked on request via :meth:`is_physical`.
    """

    s11: float
    s12: float
    s22: float

    def __post_init__(self):
        for v in (self.s11, self.s12, self.s22):
            if not math.isfinite(v):
                raise ValueError("covariance entries must be finite")
        if not (self.s11 > 0 and self.s22 > 0 and self.det > 0):
            raise ValueError(f"covariance is not positive definite: {self}")

    @classmethod
    def from_matrix(cls, m, atol=1e-12):
        m = np.asarray(m, dtype=float)
        if m.shape != (2, 2):
            raise ValueError("expected a 2x2 matrix")
        scale = max(1.0, float(np.max(np.abs(m))))
        if abs(m[0, 1] - m[1, 0]) > atol * scale:
            raise ValueError("covariance matrix is not symmetric")
        return cls(float(m[0, 0]), 0.5 * float(m[0, 1] + m[1, 0]), float(m[1, 1]))

    @classmethod
    def vacuum(cls):
        return cls(0.5, 0.0, 0.5)

    @property
    def matrix(self):
        return np.array([[self.s11, self.s12], [self.s12, self.s22]])

    @property
    def det(self):
        return self.s11 * self.s22 - self.s12 * self.s12

    @property
    def purity(self):
        return 0.5 / math.sqrt(self.det)

    def is_pure(self, rtol=1e-10):
        return abs(self.det - 0.25) <= rtol * max(1.0, self.s11 * self.s22)

    def is_physical(self, rtol=1e-10):
        return self.det >= 0.25 * (1 - rtol)


def squeezed_cov(p):
    """Covariance of the squeezed vacuum with parameters ``p``."""
    ch, sh = math.cosh(2 * p.r), math.sinh(2 * p.r)
    c, s = math.cos(p.phi), math.sin(p.phi)
    big = ch + abs(c) * sh
    # ch - |c| sh = (1 + s**2 sh**2) / (ch + |c| sh) avoids cancelling near phi = 0, pi
    small = (1 + (s * sh) ** 2) / big
    a, d = (big, small) if c >= 0 else (small, big)
    return CovMatrix2(0.5 * a, -0.5 * s * sh, 0.5 * d)


def mode_matrix(b):
    """Real 2x2 action of a diagonal Bogoliubov pair on the quadratures."""
    d, s = b.alpha - b.beta, b.alpha + b.beta
    return np.array([[d.real, d.imag], [-d.imag, s.real]])


def transform_cov(sigma0, b, congruence=False):
    """Covariance after the wave: ``M sigma M`` (default) or ``M sigma M^T``.

    The product without transpose is only symmetric when ``M`` is, i.e. for
    real ``beta``; an asymmetric result raises ``ValueError``.
    """
    m = mode_matrix(b)
    out = m @ sigma0.matrix @ (m.T if congruence else m)
    return CovMatrix2.from_matrix(out, atol=1e-12)


def symplectic_form(n_modes=1):
    """``J = (+)_k [[0, 1], [-1, 0]]``."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _as_array(sigma):
    return sigma.matrix if isinstance(sigma, CovMatrix2) else np.asarray(sigma, dtype=float)


def _purity_deficit(m, half_j):
    """``det(m + iJ/2)``, snapped to zero when it is rounding noise.

    For a pure state this vanishes analytically; left unsnapped its ~1e-16
    noise enters the fidelity through ``sqrt(Lambda)`` at the 1e-8 level.
    """
    value = np.linalg.det(m + half_j).real
    noise = 64 * np.finfo(float).eps * float(np.prod(np.abs(np.diag(m))) + np.max(np.abs(m)) ** m.shape[0])
    return 0.0 if abs(value) <= noise else float(value)


def delta_lambda(a, b):
    """The determinant functionals ``Delta`` and ``Lambda`` entering the fidelity."""
    a, b = _as_array(a), _as_array(b)
    n = a.shape[0] // 2
    half_j = 0.5j * symplectic_form(n)
    delta = float(np.linalg.det(a + b))
    lam = 2 ** (2 * n) * _purity_deficit(a, half_j) * _purity_deficit(b, half_j)
    return delta, lam


def _check_pd(m):
    if not (m[0, 0] > 0 and m[1, 1] > 0 and np.linalg.det(m) > 0):
        raise ValueError("fidelity needs positive-definite covariance matrices")


def _sqrt_denominator(a, b):
    a, b = _as_array(a), _as_array(b)
    _check_pd(a)
    _check_pd(b)
    delta, lam = delta_lambda(a, b)
    if lam < 0:
        if lam >= -1e-15 * max(1.0, abs(delta)):
            lam = 0.0
        else:
            raise ValueError(f"Lambda = {lam:.3e} < 0: inputs violate the uncertainty bound")
    return math.sqrt(delta + lam) - math.sqrt(lam)


def fidelity(a, b):
    """Uhlmann fidelity of two zero-mean single-mode Gaussian states.

    ``F = 1 / (sqrt(Delta + Lambda) - sqrt(Lambda))`` with
    ``Delta = det(a + b)`` and ``Lambda = 4 det(a + iJ/2) det(b + iJ/2)``.
    """
    return 1.0 / _sqrt_denominator(a, b)


def one_minus_sqrt_fidelity(a, b):
    """``1 - sqrt(F)`` evaluated without subtracting two numbers near 1."""
    return -math.expm1(-0.5 * math.log(_sqrt_denominator(a, b)))


class QfiResult(NamedTuple):
    h_eps: float
    method: str
    step: float = float("nan")
    abs_error: float = 0.0


class CovExpansion(NamedTuple):
    """``sigma(eps) = s0 + eps s1 + eps**2 s2 + O(eps**3)`` as 2x2 arrays."""

    s0: np.ndarray
    s1: np.ndarray
    s2: np.ndarray


def expand_transform(sigma0, beta_per_eps, congruence=False):
    """Exact eps-expansion of :func:`transform_cov` for ``alpha = 1, beta = eps b``.

    ``M(eps) = I + eps B`` with ``B = [[-Re b, -Im b], [Im b, Re b]]``, so
    ``M s M = s + eps (B s + s B) + eps**2 B s B`` and the series terminates.
    """
    b = complex(beta_per_eps)
    big_b = np.array([[-b.real, -b.imag], [b.imag, b.real]])
    s = sigma0.matrix
    right = big_b.T if congruence else big_b
    return CovExpansion(s, big_b @ s + s @ right, big_b @ s @ right)


def qfi_perturbative(sigma0, expansion, convention="fidelity"):
    """QFI at ``eps = 0`` from the second-order covariance expansion.

    With ``a, b, d`` the ``11, 12, 22`` entries and ``^(n)`` the order in eps,
    ``convention="fidelity"`` is the small-step limit of
    ``8 (1 - sqrt F(sigma(0), sigma(d eps))) / d eps**2`` for pure ``sigma(0)``:

        H = 4 (a^(0) d^(2) + a^(2) d^(0) - 2 b^(0) b^(2)) + 2 (a^(1) d^(1) - b^(1)**2)

    ``convention="mode-sum"`` uses the bookkeeping formula

        H = 2 (a^(0) d^(2) + a^(2) d^(0) - 2 b^(0) b^(2)) + (a^(1) d^(1) - 2 b^(1)**2) / 2

    which equals ``b1**2 R / 4`` for ``beta = eps b1``; the closed-form mode
    sums in :mod:`becgw.sensitivity` rest on it.  The two differ because
    ``alpha = 1`` is not norm-preserving at second order.
    """
    s0 = _as_array(sigma0)
    e0, e1, e2 = (np.asarray(x, dtype=float) for x in expansion)
    if not np.allclose(e0, s0, rtol=1e-12, atol=0.0):
        raise ValueError("expansion zeroth order does not match sigma0")
    a0, b0, d0 = e0[0, 0], e0[0, 1], e0[1, 1]
    a1, b1, d1 = e1[0, 0], e1[0, 1], e1[1, 1]
    a2, b2, d2 = e2[0, 0], e2[0, 1], e2[1, 1]
    second = a0 * d2 + a2 * d0 - 2 * b0 * b2
    if convention == "fidelity":
        if abs(np.linalg.det(s0) - 0.25) > 1e-9 * max(1.0, a0 * d0):
            raise ValueError("the fidelity-convention formula needs a pure sigma0")
        first = a0 * d1 + a1 * d0 - 2 * b0 * b1
        scale = max(1.0, abs(a0 * d1), abs(a1 * d0), abs(b0 * b1))
        if abs(first) > 1e-10 * scale:
            raise ValueError("first-order purity change is nonzero; the QFI diverges")
        h = 4 * second + 2 * (a1 * d1 - b1 * b1)
    elif convention == "mode-sum":
        h = 2 * second + 0.5 * (a1 * d1 - 2 * b1 * b1)
    else:
        raise ValueError(f"unknown convention {convention!r}")
    if -1e-12 * max(1.0, abs(second)) < h < 0:
        h = 0.0
    return QfiResult(float(h), f"perturbative-{convention}")


def qfi_finite_difference(
    sigma_of_eps: Callable[[float], CovMatrix2],
    d_eps=1e-4,
    rtol=1e-6,
    target=1e-4,
    max_halvings=12,
):
    """QFI at ``eps = 0`` from ``8 (1 - sqrt F(sigma(0), sigma(d eps))) / d eps**2``.

    The trial step ``d_eps`` is first rescaled so that ``1 - sqrt F`` sits near
    ``target`` (quadratic regime, well above rounding), then Richardson
    extrapolation on successive halvings is repeated until two extrapolated
    values agree to ``rtol`` or to the rounding floor.  Non-convergence raises
    :class:`ConvergenceError` carrying the last two estimates.
    """
    sigma0 = sigma_of_eps(0.0)
    # rounding of det(sigma0 + sigma) is ~ eps * trace**2
    scale = float(np.trace(_as_array(sigma0))) ** 2

    def raw(h):
        return 8.0 * one_minus_sqrt_fidelity(sigma0, sigma_of_eps(h)) / h**2

    h = float(d_eps)
    delta0 = raw(h) * h**2 / 8
    # a vanishing leading term (zero QFI) pushes the step to its upper clamp
    h *= min(max(math.sqrt(target / max(delta0, 1e-300)), 2.0**-20), 1e3)

    def floor(step):
        return 16 * 8 * np.finfo(float).eps * scale / step**2

    values = [raw(h), raw(h / 2)]
    extrap = [(4 * values[1] - values[0]) / 3]
    for k in range(2, max_halvings + 2):
        step = h / 2**k
        values.append(raw(step))
        extrap.append((4 * values[-1] - values[-2]) / 3)
        diff = abs(extrap[-1] - extrap[-2])
        if diff <= rtol * abs(extrap[-1]) or diff <= floor(step):
            err = float(diff + floor(step))
            value = float(extrap[-1])
            if -err <= value < 0:
                value = 0.0
            return QfiResult(value, "finite-difference", step=step, abs_error=err)
    raise ConvergenceError("Richardson extrapolation did not converge", extrap[-2:])


def r_factor(p):
    """Squeezing enhancement ``R = sinh^2(2r)(6 sin^2 phi - 2) + cosh(4r) + 1``.

    Evaluated as the identical ``2 + 6 sin^2 phi sinh^2(2r)``; the form above
    cancels away every digit for small ``phi`` at large ``r``.
    """
    return 2 + 6 * math.sin(p.phi) ** 2 * math.sinh(2 * p.r) ** 2


def r_factor_max(r):
    """``R`` at the optimal angle ``phi = pi/2``: ``3 cosh(4 r) - 1``."""
    return 3 * math.cosh(4 * r) - 1
