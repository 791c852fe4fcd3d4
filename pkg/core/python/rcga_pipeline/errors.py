"""
Exception types shared by the r-cGA pipeline.
The campaign CLI maps them onto exit statuses (see campaign_core.EXIT_CODES).
"""


class InvalidParameterError(ValueError):
    """A parameter was rejected; `reason` names the failed condition."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class PreconditionError(InvalidParameterError):
    """A verifier's structural precondition does not hold for the given input."""


class TraceLevelError(InvalidParameterError):
    """An analysis needs trace records that the run did not keep."""


class MatrixCorruptionError(RuntimeError):
    """An update would drive a frequency count below zero."""


class ConfigError(Exception):
    """Experiment config missing, unparsable or carrying invalid keys."""
