"""Exception types shared across the studio modules."""


class StudioError(Exception):
    """Base class for all errors raised by this package."""


class AdapterUnavailable(StudioError):
    """A required pluggable adapter (ASR, muxer, scorer) is not configured."""


class AdapterError(StudioError):
    """An adapter was invoked and failed."""


class DecodeError(StudioError):
    """Input bytes could not be decoded as the expected media format."""


class ShapeError(StudioError):
    """A tensor or sequence has the wrong shape or length."""


class StageExceeded(StudioError):
    """Requested more frames than the model's trained stage supports."""


class StageOrderError(StudioError):
    """Evolutionary stages must be entered in order, one at a time."""


class NumericalError(StudioError):
    """A computation produced non-finite or out-of-domain values."""


class ConfigError(StudioError):
    """Invalid training or service configuration."""


class DivergenceError(StudioError):
    """Training loss became non-finite."""


class InsufficientData(StudioError):
    """Dataset cannot supply the requested windows or caption diversity."""


class InsufficientSamples(StudioError):
    """Too few samples to fit the requested statistics."""


class DimensionMismatch(StudioError):
    """Two statistics or feature sets disagree on dimensionality."""


class NotFound(StudioError):
    """A referenced asset, session or job does not exist."""


class UnknownAsset(NotFound):
    """An asset id does not resolve in the catalog."""


class EmptySelection(StudioError):
    """Composition was requested with no image selected for any term."""


class MuxerUnavailable(StudioError):
    """No muxer tool is available; callers may fall back to bundle output."""


class DurationMismatch(StudioError):
    """Video and audio durations differ beyond the allowed tolerance."""
