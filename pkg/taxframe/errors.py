EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


class TaxFrameError(Exception):
    exit_code = EXIT_VALIDATION


class InputError(TaxFrameError):
    pass


class SchemaError(InputError):
    pass


class BalanceError(InputError):
    pass


class NonFiniteError(InputError):
    pass


class GroupSetError(InputError):
    pass


class DimensionError(InputError):
    pass


class UnknownSectorError(InputError):
    pass


class MissingSectorError(InputError):
    pass


class NegativeIntensityError(InputError):
    pass


class DegenerateSectorError(InputError):
    """A sector with zero total output still records flows in its column."""


class ZeroIncomeError(InputError):
    pass


class ConsumptionShareError(InputError):
    pass


class ScenarioError(InputError):
    pass


class ConfigError(InputError):
    pass


class DistributionError(InputError):
    pass


class ZeroTotalIncomeError(InputError):
    pass


class GroupMismatchError(InputError):
    pass


class NumericalError(TaxFrameError):
    exit_code = EXIT_NUMERICAL


class NonProductiveError(NumericalError):
    pass


class SingularError(NumericalError):
    pass


class LorenzInvariantError(NumericalError):
    pass


class MissingFileError(TaxFrameError):
    exit_code = EXIT_IO


class TaxFrameWarning(UserWarning):
    pass


class DegenerateSectorWarning(TaxFrameWarning):
    pass


class ZeroImpactWarning(TaxFrameWarning):
    pass


class MissingWeightsWarning(TaxFrameWarning):
    pass
