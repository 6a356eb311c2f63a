"""Exception types raised by the simulator."""


class ConfigurationError(ValueError):
    """Invalid level scheme, pulse list, protocol, or run configuration."""


class NumericalError(ArithmeticError):
    """A propagator or integration step produced non-finite or unusable output."""


class DomainError(ValueError):
    """An analytic oracle was evaluated outside the window where it applies."""
