"""Domain exception types shared across the package."""


class ZonePulseError(Exception):
    """Base class for all domain errors."""


class GeoJsonError(ZonePulseError, ValueError):
    """Malformed zone document; message carries the offending feature index."""


class DuplicateZoneIdError(ZonePulseError, ValueError):
    pass


class HeaderError(ZonePulseError, ValueError):
    """CSV header row missing or not matching the documented schema."""


class ConfigError(ZonePulseError, ValueError):
    pass


class ZeroVarianceError(ZonePulseError, ValueError):
    """Constant input where a spread estimate is required."""


class UnsupportedSizeError(ZonePulseError, ValueError):
    pass


class UndefinedScoreError(ZonePulseError, ValueError):
    """z-score requested against a degenerate (n < 2 or zero-variance) model."""


class DegenerateRegressionError(ZonePulseError, ValueError):
    """Singular design matrix in an OLS fit."""
