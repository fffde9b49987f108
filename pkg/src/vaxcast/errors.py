"""Exception types shared across the package.

Every error carries the name of the module that raised it so the CLI can
emit a single machine-parsable line.
"""


class VaxcastError(Exception):
    """Base class for all package errors."""

    module = "vaxcast"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class SchemaError(VaxcastError):
    """Schema/data mismatch: unknown columns, bad kinds, fingerprint clashes."""

    module = "data_model"


class IngestError(VaxcastError):
    """Unreadable or malformed CSV input."""

    module = "data_model"


class ConfigError(VaxcastError):
    """Invalid generator or forest configuration."""

    module = "synth"


class CalibrationError(VaxcastError):
    """Coefficient calibration failed to reach its targets."""

    module = "synth"


class SeparationError(VaxcastError):
    """(Quasi-)complete separation detected during probit estimation."""

    module = "probit"


class FitError(VaxcastError):
    """Estimation preconditions violated (missing data, too few rows...)."""

    module = "probit"


class EvaluationError(VaxcastError):
    """Invalid inputs to metric computations."""

    module = "evaluation"


class PipelineError(VaxcastError):
    """Split-search / composite-model failures."""

    module = "pipeline"
