"""Exception types shared across the library."""


class ExoticFlowError(Exception):
    """Base class for all library errors."""


class BadParams(ExoticFlowError):
    """Invalid fixture or configuration parameters (non-orthogonal rotation,
    non-unit quaternion, malformed field spec, ...)."""


class DegenerateChartPoint(ExoticFlowError):
    """A chart operation was requested at (or too close to) the locus where
    its defining formulas degenerate (x-tilde = 0 in chart A transitions,
    y-bar = 0 in chart B)."""


class PoleChartMismatch(ExoticFlowError):
    """A sphere point was asked for a chart representation that is singular
    there (chart A at kappa = 0, chart B at gamma = 0)."""


class StepBlowup(ExoticFlowError):
    """A field evaluation exceeded the blow-up guard during SDE integration,
    usually a sign of a bad fixture or an unstable step size."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ConfigError(BadParams):
    """Unparseable or inconsistent run configuration."""
