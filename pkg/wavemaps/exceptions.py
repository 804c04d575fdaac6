# wavemaps/exceptions.py
"""Error hierarchy. Every error carries the process exit code the cli reports."""


class WavemapError(Exception):
    exit_code = 1

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = context

    def __str__(self):
        base = super().__str__()
        if not self.context:
            return base
        extra = ", ".join(f"{k}={v}" for k, v in self.context.items())
        return f"{base} ({extra})"


class CertificateFailure(WavemapError):
    exit_code = 2


class ConvergenceFailure(WavemapError):
    exit_code = 3


class ConfigError(WavemapError):
    exit_code = 4


# bad input grids and calculi
class GridError(ConfigError):
    pass


class CalculusMismatch(ConfigError):
    pass


# certificate-type failures
class TailBoundError(CertificateFailure):
    pass


class NonresonanceError(CertificateFailure):
    pass


class UnderResolvedError(CertificateFailure):
    pass


class NoCrossingError(CertificateFailure):
    """The map never reaches π/2, so it is not near a soliton."""


class GaugeRecoveryError(CertificateFailure):
    pass


# convergence-type failures
class IntegrationFailure(ConvergenceFailure):
    pass


class ContractionFailure(ConvergenceFailure):
    pass


class BlowupDetected(ConvergenceFailure):
    """Gradient at the origin passed the resolution threshold (candidate Type 1)."""


class ConsistencyError(CertificateFailure):
    """Two independent routes to the same quantity disagree."""
