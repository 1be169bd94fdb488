"""Exception types raised by the numerical layers and the CLI."""


class WaveguideQEDError(Exception):
    """Base class for all numerical failures in this package."""


class SingularTransmission(WaveguideQEDError):
    """A resonant, lossless emitter transmits nothing; its transfer matrix
    is undefined.  ``emitter_index`` identifies the offender in a chain
    (None for the single-emitter functions)."""

    def __init__(self, message, emitter_index=None):
        super().__init__(message)
        self.emitter_index = emitter_index


class DegenerateMatrix(WaveguideQEDError):
    """Transfer matrix with a vanishing lower-right element."""


class NearSingularPhase(WaveguideQEDError):
    """Propagation phase too close to pi/2 for the tan-based detuning rule."""


class OddEmitterCount(WaveguideQEDError):
    """An operation that only holds for even emitter counts got an odd one."""


class TargetOutsideBranch(WaveguideQEDError):
    """Requested phase shift cannot be realised on the given branch."""


class NoValidBranch(WaveguideQEDError):
    """No operating point exists for the requested gate parameters."""


class NotReachable(WaveguideQEDError):
    """Gate concatenation search exhausted without hitting the target."""


class LossyResponse(WaveguideQEDError):
    """Array response loses too much flux to represent a pure qubit state."""


class ZeroResultant(WaveguideQEDError):
    """Phasor sum vanished; the mean phase is undefined."""


class AllRealizationsSingular(WaveguideQEDError):
    """Every disorder realization hit a singular transfer matrix."""


class QuadratureNotConverged(WaveguideQEDError):
    """Pulse quadrature failed to reach the requested tolerance."""


class GridTooNarrow(WaveguideQEDError):
    """Output-detuning grid truncates non-negligible amplitude tails."""


class GridMismatch(WaveguideQEDError):
    """Fields defined on different grids cannot be combined."""


class DegenerateFit(WaveguideQEDError):
    """Power-law fit requested on data without spread in the abscissa."""


class ConfigError(Exception):
    """Invalid or unknown run configuration (CLI exit code 2)."""
