class AoiError(Exception):
    """Base class of every error raised by the Framework package."""


class ParameterDomainError(AoiError, ValueError):
    def __init__(self, field, value, requirement):
        self.field = field
        self.value = value
        super().__init__('{} = {!r} is out of domain ({})'.format(field, value, requirement))


class ConfigError(AoiError):
    pass


class UsageError(AoiError):
    def __init__(self, message, token=None):
        self.token = token
        if token is not None:
            message = '{} (offending token: {!r})'.format(message, token)
        super().__init__(message)


class NumericalError(AoiError, ArithmeticError):
    pass


class OracleError(NumericalError):
    def __init__(self, message, achieved_error):
        self.achieved_error = achieved_error
        super().__init__('{} (achieved error estimate {:.3g})'.format(message, achieved_error))


class _NotApplicable:
    """Returned by a wait-state conditional whose wait is zero (the state has probability 0)."""
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return 'NotApplicable'

    def __bool__(self):
        return False


NotApplicable = _NotApplicable()
