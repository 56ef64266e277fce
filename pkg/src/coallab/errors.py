"""Exception types raised across coallab."""


class CoalLabError(ValueError):
    pass


class NonPositiveT(CoalLabError):
    pass


class HypothesisUnavailable(CoalLabError):
    """The measure is outside the regularly varying class a routine needs."""


class OutOfRange(CoalLabError):
    pass


class TooLarge(CoalLabError):
    pass


class BadAlpha(CoalLabError):
    pass


class DomainError(CoalLabError):
    pass


class EmptySample(CoalLabError):
    pass


class UnsortedTimes(CoalLabError):
    pass


class ConfigError(CoalLabError):
    pass
