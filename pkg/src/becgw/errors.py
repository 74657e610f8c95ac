"""Exception and warning types shared across the package."""


class IntegrationError(ArithmeticError):
    """Raised when the mode ODE integrator cannot advance."""

    def __init__(self, message, t_fail):
        super().__init__(f"{message} (at t = {t_fail:.17g} s)")
        self.t_fail = t_fail


class WindowNotClosedError(ArithmeticError):
    """Raised when post-window samples do not fit a two-exponential solution."""

    def __init__(self, residual, threshold):
        super().__init__(
            f"two-exponential fit residual {residual:.3e} exceeds {threshold:.3e}; "
            "the strain window had not closed over the sampled interval"
        )
        self.residual = residual
        self.threshold = threshold


class ConvergenceError(ArithmeticError):
    """Raised when an extrapolation or quadrature fails to converge."""

    def __init__(self, message, values=()):
        detail = ", ".join(f"{v:.17g}" for v in values)
        super().__init__(f"{message}: [{detail}]" if values else message)
        self.values = tuple(values)


class ConfigError(ValueError):
    """Invalid experiment configuration; carries every violation found."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n  - " + "\n  - ".join(self.violations))


class ValidityWarning(UserWarning):
    """Inputs fall outside the regime where the linear phonon model holds."""


class TruncationWarning(UserWarning):
    """A truncated mode sum has not decayed to the requested level."""
