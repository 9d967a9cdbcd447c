"""Exception hierarchy shared by all modules."""


class BranchDynError(Exception):
    pass


class ZeroPrimaryError(BranchDynError, ValueError):
    pass


class NotUnitError(BranchDynError, ValueError):
    pass


class NotPureError(BranchDynError, ValueError):
    pass


class EmptyVectorError(BranchDynError, ValueError):
    pass


class DimensionMismatch(BranchDynError, ValueError):
    pass


class ParseError(BranchDynError, ValueError):
    pass


class ValidationError(BranchDynError, ValueError):
    pass


class MissingSensor(BranchDynError, LookupError):
    pass


class MissingState(BranchDynError, LookupError):
    pass


class BlackBoxPresent(BranchDynError, ValueError):
    pass


class LengthMismatch(BranchDynError, ValueError):
    pass


class DegenerateVariance(BranchDynError, ValueError):
    pass
