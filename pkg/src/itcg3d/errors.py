"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid gains, geometry or scenario settings."""


class SingularityError(ArithmeticError):
    """Kinematics evaluated at a singular point (r too small, cos(theta) ~ 0)."""


class SimulationError(RuntimeError):
    """Closed-loop integration produced a non-finite state."""
