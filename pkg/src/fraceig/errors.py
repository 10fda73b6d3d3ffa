"""Exception taxonomy shared by the library and the CLI exit codes."""

__all__ = ["ConfigError", "NumericalError", "OracleError", "ProfileError", "StudyError"]


class ConfigError(ValueError):
    """Invalid configuration: bad parameter combination or malformed input."""


class NumericalError(RuntimeError):
    """Numerical breakdown (NaN/Inf in iterates, impossible evaluation)."""


class OracleError(RuntimeError):
    """The reference adaptive integrator failed to converge."""


class ProfileError(NumericalError):
    """Construction of a verified analytic profile failed its own check."""


class StudyError(RuntimeError):
    """A scripted study failed a declared stage tolerance."""
