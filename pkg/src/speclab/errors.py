"""Exception hierarchy shared by all speclab modules."""


class SpecLabError(Exception):
    """Base class for every error raised by speclab."""


class DomainError(SpecLabError, ValueError):
    """Invalid domain construction."""


class SelfIntersecting(DomainError):
    pass


class ClockwiseOrDegenerate(DomainError):
    pass


class LabelCountMismatch(DomainError):
    pass


class EmptyPart(DomainError):
    """A named boundary part has no segment or face."""


class HypothesisViolated(EmptyPart):
    """A mixed problem was requested without both a Dirichlet and a Neumann part."""


class NothingToShrink(DomainError):
    pass


class NotConvex(DomainError):
    pass


class EarClippingFailed(SpecLabError):
    pass


class DegenerateTriangle(SpecLabError, ValueError):
    pass


class MassNotPD(SpecLabError, ValueError):
    pass


class ConvergenceFailure(SpecLabError):
    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class DomainMismatch(SpecLabError, ValueError):
    pass


class DegreeOverflow(SpecLabError, ValueError):
    pass


class BoundaryConditionViolated(SpecLabError, ValueError):
    pass


class SchemaError(SpecLabError, ValueError):
    """Scenario file does not match the schema.

    ``pointer`` is a JSON pointer to the offending field.
    """

    def __init__(self, message, pointer=""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
