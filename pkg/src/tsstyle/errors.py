"""Exception types raised across the toolkit.

Every error derives from :class:`TsStyleError`, which is itself a
``ValueError`` so callers that only care about bad input can catch that.
"""


class TsStyleError(ValueError):
    pass


class SeriesTooShort(TsStyleError):
    pass


class NonPositiveValue(TsStyleError):
    pass


class DegenerateSeries(TsStyleError):
    """A zero-variance series where a ratio or square root is undefined.

    ``iteration`` is set when the failure happened inside an optimization
    loop, ``sample`` when it happened while building a dataset.
    """

    def __init__(self, message, iteration=None, sample=None):
        super().__init__(message)
        self.iteration = iteration
        self.sample = sample


class LagTooLarge(TsStyleError):
    pass


class WindowTooLarge(TsStyleError):
    pass


class LengthMismatch(TsStyleError):
    pass


class BadSplit(TsStyleError):
    pass


class ParseError(TsStyleError):
    def __init__(self, message, row=None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class EmptyDataset(TsStyleError):
    pass


class KTooLarge(TsStyleError):
    pass


class SingularSystem(TsStyleError):
    pass


class ConfigError(TsStyleError):
    """A configuration object violates its invariants."""
