"""Exception taxonomy shared across the library.

Every error raised by csgi derives from :class:`CsgiError` so callers can
catch library failures with a single except clause. The CLI maps these onto
exit codes (config 2, data 3, divergence 4).
"""


class CsgiError(Exception):
    """Base class for all csgi errors."""


class ZeroVarianceError(CsgiError):
    """A quantity that must have positive variance is constant."""


class TooShortError(CsgiError):
    """Input series or window is shorter than the operation requires."""


class IncompatibleError(CsgiError):
    """Paired inputs disagree in length or sampling."""


class DivergedError(CsgiError):
    """A simulation or training run left its admissible numeric range."""


class ShapeMismatchError(CsgiError):
    """Tensor or array shapes are inconsistent for the requested operation."""


class GraphNotBuiltError(CsgiError):
    """backward() was called on a tensor with no recorded computation graph."""


class ConfigInvalidError(CsgiError):
    """An experiment or model configuration failed schema validation."""


class CsvParseError(CsgiError):
    """A data file could not be parsed; message carries the row number."""


class NonUniformSamplingError(CsgiError):
    """Timestamps of an ingested file are not uniformly spaced after cleaning."""


class MissingChannelError(CsgiError):
    """A channel named in a group mapping has no pairwise results."""


class DomainError(CsgiError):
    """A numeric argument lies outside the mathematical domain of a formula."""


class SingularDesignWarning(UserWarning):
    """Least-squares design matrix was rank deficient; pseudoinverse used."""


class UnderSampledWarning(UserWarning):
    """Histogram estimator has too few samples per cell to be reliable."""
