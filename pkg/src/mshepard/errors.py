"""Exception hierarchy shared by all modules."""


class MShepardError(Exception):
    """Base class for every error raised by this package."""


class GridTooSmall(MShepardError, ValueError):
    pass


class IndexOutOfRange(MShepardError, IndexError):
    pass


class SingularSystem(MShepardError, ArithmeticError):
    pass


class NodeCoincidence(MShepardError, ValueError):
    pass


class ParseError(MShepardError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyResult(MShepardError, ValueError):
    pass


class NodataPresent(MShepardError, ValueError):
    pass


class GridMismatch(MShepardError, ValueError):
    pass


class EmptyLevels(MShepardError, ValueError):
    pass


class IncompatibleSize(MShepardError, ValueError):
    pass
