"""Exception types raised across the package."""


class BanditFunctionalsError(Exception):
    """Base class for all package errors."""


class UnboundedFunctional(BanditFunctionalsError):
    pass


class UnknownArm(BanditFunctionalsError, IndexError):
    pass


class MissingAssumption(BanditFunctionalsError):
    pass


class DegenerateM(BanditFunctionalsError):
    pass


class EmptyInput(BanditFunctionalsError, ValueError):
    pass


class SingularSystem(BanditFunctionalsError):
    pass


class EpsTooLarge(BanditFunctionalsError, ValueError):
    pass


class GridTooCoarse(BanditFunctionalsError, ValueError):
    pass


class MisalignedGrids(BanditFunctionalsError, ValueError):
    pass


class TooFewPoints(BanditFunctionalsError, ValueError):
    pass


class ConfigError(BanditFunctionalsError, ValueError):
    """Invalid sweep configuration; ``field`` names the first offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
