"""Exception hierarchy shared by all modules."""


class SemipassiveError(Exception):
    pass


class GraphError(SemipassiveError, ValueError):
    pass


class IndexOutOfRange(GraphError):
    pass


class NegativeWeight(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class GraphParseError(GraphError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NoSpanningTree(SemipassiveError):
    pass


class DimensionMismatch(SemipassiveError, ValueError):
    pass


class NotStronglyConnected(SemipassiveError):
    pass


class NoConvergence(SemipassiveError):
    pass


class UnknownModel(SemipassiveError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class InvalidBox(SemipassiveError, ValueError):
    pass


class BadTimeStep(SemipassiveError, ValueError):
    pass


class ConfigError(SemipassiveError, ValueError):
    pass
