"""Exception hierarchy. Domain errors map to CLI exit code 2."""


class MultcoverError(Exception):
    pass


class DomainError(MultcoverError, ValueError):
    """Input outside the mathematical domain of an operation."""


class OutOfRange(DomainError):
    """Exponent s outside the admissible window (d-1, d)."""

    def __init__(self, message, s=None, d=None):
        super().__init__(message)
        self.s = s
        self.d = d


class CapExceeded(DomainError):
    def __init__(self, count, cap):
        super().__init__(f"cover has {count} cubes, exceeds cap {cap}")
        self.count = count
        self.cap = cap


class CoverOverflow(DomainError, OverflowError):
    pass


class BudgetExceeded(DomainError):
    def __init__(self, required_bytes, budget_bytes):
        super().__init__(
            f"box grid needs {required_bytes} bytes, budget is {budget_bytes}"
        )
        self.required_bytes = required_bytes
        self.budget_bytes = budget_bytes


class ParseError(DomainError):
    pass
