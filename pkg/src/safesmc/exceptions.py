"""Custom exception hierarchy."""


class SafeSmcError(Exception):
    """Base exception for safesmc."""


class ConfigError(SafeSmcError):
    """Configuration-related errors."""


class IntegrationError(SafeSmcError):
    """Non-finite state produced by the integrator."""


class DisturbanceError(SafeSmcError):
    """Disturbance process sampled out of order."""


class InfeasibleProblemError(SafeSmcError):
    """Safety-filter QP with an empty feasible set."""


class UnsafeStartError(SafeSmcError):
    """Scenario starts inside an obstacle's safety circle."""


class LogError(SafeSmcError):
    """Missing or malformed run artifacts."""
