"""Exception types shared across the package."""


class SwooshError(ValueError):
    """Base class for validation errors raised by this package."""


class NonPositiveInput(SwooshError):
    pass


class DegenerateExponent(SwooshError):
    pass


class DimensionMismatch(SwooshError):
    pass


class OverlapError(SwooshError):
    pass


class OutOfBounds(SwooshError):
    pass


class DegenerateHeatmap(SwooshError):
    pass


class DegenerateInput(SwooshError):
    pass


class DegenerateAxis(SwooshError):
    pass


class NearParallelAxes(SwooshError):
    pass


class DegenerateSpace(SwooshError):
    pass


class NonPositiveSpacing(SwooshError):
    pass


class DegenerateTable(SwooshError):
    """ICC is not estimable (0/0) for this table."""


class LengthMismatch(SwooshError):
    pass


class EmptyInput(SwooshError):
    pass


class ConfigError(SwooshError):
    pass
