# utils/errors.py


class LCHSError(Exception):
    """Base class for estimator errors"""


class DomainError(LCHSError, ValueError):
    """A parameter lies outside the range a formula is defined on"""


class InfeasibleError(LCHSError):
    """The error budget cannot be met for this instance"""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition or message


class BoundViolationError(LCHSError):
    """A measured error exceeded its proven bound during validation"""

    def __init__(self, message, failures=None):
        super().__init__(message)
        self.failures = list(failures or [])
