"""Exception hierarchy used across the package."""


class FlatFrontError(Exception):
    """Base class for all package errors."""


class InputError(FlatFrontError):
    """Malformed user input (expressions, scene specs, CLI arguments)."""


class ParseError(InputError):
    pass


class BranchAmbiguous(FlatFrontError):
    """A multivalued expression was evaluated without a sheet in strict mode."""


class PoleHit(FlatFrontError):
    """Evaluation landed on a pole or produced a non-finite value."""


class ConstantInput(FlatFrontError):
    """An operation needs a non-constant function."""


class ZeroForm(FlatFrontError):
    pass


class ClearanceViolation(FlatFrontError):
    """A path passes too close to a declared special point."""


class NonSingleValued(FlatFrontError):
    """A function does not close up around a loop where it must."""


class EssentialOrIrregular(FlatFrontError):
    """Local expansion is not of finite order."""


class ToleranceNotMet(FlatFrontError):
    pass


class BranchPointOnPath(FlatFrontError):
    pass


class DegenerateMetric(FlatFrontError):
    pass


class DegenerateInput(FlatFrontError):
    pass


class NotFiniteType(FlatFrontError):
    pass


class NotRegularEnd(FlatFrontError):
    pass


class NonRealAlpha(FlatFrontError):
    pass


class InconsistentClassification(FlatFrontError):
    pass


class NotUmbilic(FlatFrontError):
    pass


class RouteDisagreement(FlatFrontError):
    pass


class UmbilicAtBasepoint(FlatFrontError):
    pass


class NotAnInvolution(FlatFrontError):
    pass


class InvalidSpec(InputError):
    pass


class UnknownFixture(InputError):
    pass


class ExcludedParameter(FlatFrontError):
    """A parallel front was requested at a parameter where it has no ends of finite type."""


class BetaDegenerate(FlatFrontError):
    """``dG = +-dG*`` identically: one caustic Gauss map is undefined."""


class UmbilicInRegion(FlatFrontError):
    pass


class QsVanishesAtBasepoint(FlatFrontError):
    pass


class NoAdmissibleS(FlatFrontError):
    pass


class IrregularEnd(FlatFrontError):
    pass


class InvalidPoint(InputError):
    pass
