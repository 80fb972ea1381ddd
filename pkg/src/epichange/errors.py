"""Exception types raised across the package."""


class EpichangeError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(EpichangeError, ValueError):
    """Invalid detection configuration."""


class EmptySeries(EpichangeError, ValueError):
    pass


class NonFiniteValue(EpichangeError, ValueError):
    def __init__(self, index):
        super().__init__(f"non-finite value at index {index}")
        self.index = index


class BadRange(EpichangeError, IndexError):
    pass


class NonPositiveSigma(EpichangeError, ValueError):
    pass


class TooShort(EpichangeError, ValueError):
    pass


class WindowTooShort(EpichangeError, ValueError):
    pass


class TooLarge(EpichangeError, ValueError):
    """Instance exceeds the enumeration budget of the exact oracle."""


class AllPointsSegmented(EpichangeError, ValueError):
    pass


class UnknownScenario(EpichangeError, ValueError):
    pass


class EmptyInput(EpichangeError, ValueError):
    pass


class MissingColumn(EpichangeError, KeyError):
    pass


class ParseError(EpichangeError, ValueError):
    def __init__(self, line, message="could not parse value"):
        super().__init__(f"line {line}: {message}")
        self.line = line


class BadBinCount(EpichangeError, ValueError):
    pass


class DegenerateScale(EpichangeError, ValueError):
    """Estimated scale is zero, so the Gaussian cost is undefined."""
