"""Exception types raised across the package."""


class NMFError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(NMFError, ValueError):
    pass


class ZeroRowError(NMFError, ValueError):
    def __init__(self, index):
        super().__init__(f"row {index} is identically zero")
        self.index = index


class NotNormalizedError(NMFError, ValueError):
    def __init__(self, index, norm):
        super().__init__(f"row {index} has l1 norm {norm!r}, expected 1")
        self.index = index
        self.norm = norm


class ConvergenceFailure(NMFError, RuntimeError):
    pass


class LPError(NMFError, RuntimeError):
    """The LP backend reported a status other than optimal."""


class NotSeparableError(NMFError):
    def __init__(self, found_k, reason=""):
        msg = f"no separable factorization: found {found_k} distinct loner rows"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)
        self.found_k = found_k


class InvalidParamsError(NMFError, ValueError):
    pass


class InfeasibleParamsError(NMFError, ValueError):
    pass


class NoRobustLonersError(NMFError):
    pass


class RankTooHighError(NMFError, ValueError):
    def __init__(self, rank, s):
        super().__init__(f"numeric rank {rank} exceeds s={s}")
        self.rank = rank
        self.s = s


class RankMismatchError(NMFError, ValueError):
    def __init__(self, rank, r):
        super().__init__(f"numeric rank {rank} differs from r={r}")
        self.rank = rank
        self.r = r


class BudgetExceededError(NMFError):
    pass


class InvalidPartitionError(NMFError, ValueError):
    pass


class GenerationFailure(NMFError, RuntimeError):
    pass


class EpsTooLargeError(NMFError, ValueError):
    pass


class DuplicateValuesError(NMFError, ValueError):
    pass


class IndexOutOfRangeError(NMFError, IndexError):
    pass


class ParseError(NMFError, ValueError):
    def __init__(self, line, col, detail=""):
        super().__init__(f"parse error at line {line}, column {col}: {detail}")
        self.line = line
        self.col = col


class RaggedRowsError(NMFError, ValueError):
    def __init__(self, line, expected, got):
        super().__init__(f"line {line} has {got} fields, expected {expected}")
        self.line = line


class NonFiniteError(NMFError, ValueError):
    def __init__(self, line, col):
        super().__init__(f"non-finite value at line {line}, column {col}")
        self.line = line
        self.col = col
