"""Exception hierarchy shared by every pmrc module."""


class PMRCError(Exception):
    """Base class for all library errors."""


# field arithmetic
class DivisionByZero(PMRCError, ZeroDivisionError):
    pass


class ModulusMismatch(PMRCError, ValueError):
    pass


class SourceExhausted(PMRCError):
    pass


# linear algebra
class ShapeError(PMRCError, ValueError):
    pass


class SingularMatrix(PMRCError, ArithmeticError):
    pass


class NoSolution(PMRCError, ArithmeticError):
    pass


class DuplicatePoint(PMRCError, ValueError):
    pass


# parameters and construction
class InvalidParams(PMRCError, ValueError):
    pass


class UnsupportedRegime(InvalidParams):
    pass


class DegenerateSecrecy(InvalidParams):
    pass


class FieldTooSmall(PMRCError, ValueError):
    pass


class PointSelectionFailed(PMRCError, ValueError):
    pass


# codec usage
class LengthMismatch(PMRCError, ValueError):
    pass


class DuplicateShare(PMRCError, ValueError):
    pass


class NotEnoughShares(PMRCError, ValueError):
    pass


class NotEnoughHelpers(PMRCError, ValueError):
    pass


class InvalidHelper(PMRCError, ValueError):
    pass


class PaddingError(PMRCError, ValueError):
    pass


# secrecy audit
class InvalidSpec(PMRCError, ValueError):
    pass


class SecrecyViolation(PMRCError):
    def __init__(self, spec, leakage):
        self.spec = spec
        self.leakage = leakage
        super().__init__(f"eavesdropper {spec} learns {leakage} q-ary unit(s) of the message")


class TooLargeForBruteForce(PMRCError):
    pass


# simulator
class RepairImpossible(PMRCError):
    pass


class CollectImpossible(PMRCError):
    pass


class ScenarioError(PMRCError, ValueError):
    pass


# file formats / CLI
class ConfigError(PMRCError, ValueError):
    pass


class CorruptShare(PMRCError):
    pass


class FormatError(PMRCError, ValueError):
    pass
