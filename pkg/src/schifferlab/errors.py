"""Exception and warning types raised across the package."""


class SchifferLabError(Exception):
    """Base class for all package errors."""


class DomainError(SchifferLabError, ValueError):
    """Argument outside the supported range of a special function."""


class RegularityError(SchifferLabError, ValueError):
    """Curve parametrization is singular or self-intersecting."""


class FlatPointError(SchifferLabError, ValueError):
    """Curvature vanishes where a center of curvature is requested."""


class DegenerateError(SchifferLabError):
    """Normal count is not a finite number (e.g. circle about its center)."""


class ConvexityError(SchifferLabError, ValueError):
    pass


class RangeError(SchifferLabError, ValueError):
    """Evaluation point too far from the expansion origin."""


class PreconditionError(SchifferLabError):
    """Field is not an accepted Schiffer solution on the given domain."""


class AllBelowFloorError(SchifferLabError):
    """Every trace sample lies under the noise floor."""


class UnstableCountError(SchifferLabError):
    """Ring sign-change counts disagree across radii."""


class NormalFormError(SchifferLabError, ValueError):
    pass


class FlatError(SchifferLabError, ValueError):
    """Vertex classification on the normal needs nonzero curvature."""


class TangencyWarning(UserWarning):
    pass


class IllConditionedWarning(UserWarning):
    pass


class NonzeroWarning(UserWarning):
    """Field to be traced is identically zero."""
