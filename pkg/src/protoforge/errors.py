"""Exception hierarchy shared by all protoforge modules."""


class ProtoforgeError(Exception):
    pass


class UnboundedType(ProtoforgeError):
    """Raised when a universe is requested for Int without explicit bounds."""


class EvalError(ProtoforgeError):
    pass


class ParseError(ProtoforgeError):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{line}:{col}: {message}"
        super().__init__(message)


class DSLTypeError(ParseError):
    pass


class UnresolvedName(ParseError):
    pass


class HoleMisuse(ParseError):
    pass


class ValidationError(ProtoforgeError):
    pass


class MissingHole(ProtoforgeError):
    pass


class ArityMismatch(ProtoforgeError):
    pass


class StateSpaceLimitExceeded(ProtoforgeError):
    def __init__(self, message, candidate=None):
        super().__init__(message)
        self.candidate = candidate


class ConfigError(ParseError):
    pass
