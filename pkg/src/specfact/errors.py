"""Exception and warning classes raised by specfact."""


class SpecfactError(Exception):
    """Base class for all specfact errors."""


class ValidationError(SpecfactError, ValueError):
    """Input violates a documented precondition."""


class PoleProximity(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class VariableMismatch(ValidationError):
    pass


class SingularMatrix(ValidationError):
    pass


class RankDeficientInput(ValidationError):
    pass


class NotProper(ValidationError):
    pass


class SingularTransform(ValidationError):
    pass


class NonUniqueSolution(ValidationError):
    pass


class PreconditionViolated(ValidationError):
    pass


class SingularBlock(ValidationError):
    pass


class BoundaryPole(ValidationError):
    pass


class UnstableFilter(ValidationError):
    pass


class IllConditioned(ValidationError):
    pass


class DefectiveZeroStructure(ValidationError):
    """Zero with fewer independent directions than its multiplicity."""


class UnsupportedRank(ValidationError):
    pass


class DocumentError(ValidationError):
    """Malformed serialized document; ``path`` names the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


class VerificationFailure(SpecfactError):
    """An internal consistency check failed after a computation."""


class SpecfactWarning(UserWarning):
    pass


class BoundaryZeroWarning(SpecfactWarning):
    pass


class NonConvergenceWarning(SpecfactWarning):
    pass


class PoleZeroCoincidenceWarning(SpecfactWarning):
    pass
