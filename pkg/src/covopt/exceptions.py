"""Exception hierarchy shared by every module of the package."""


class CovoptError(Exception):
    """Base class for all package errors."""


class GraphError(CovoptError):
    pass


class IsolatedNode(GraphError):
    def __init__(self, node):
        super().__init__(f"node {node} has degree 0")
        self.node = node


class Disconnected(GraphError):
    def __init__(self, n_components=None, message=None):
        if message is None:
            message = "graph is not connected"
            if n_components is not None:
                message += f" ({n_components} components)"
        super().__init__(message)
        self.n_components = n_components


class CompleteGraph(GraphError):
    def __init__(self):
        super().__init__("no non-edge left to insert")


class NoConvergence(CovoptError):
    def __init__(self, iterations, residual):
        super().__init__(
            f"eigensolver did not converge after {iterations} iterations "
            f"(max residual {residual:.3e})"
        )
        self.iterations = iterations
        self.residual = residual


class NonPositiveConnectivity(CovoptError, ValueError):
    pass


class DensityTooLow(CovoptError, ValueError):
    pass


class Unreachable(CovoptError):
    def __init__(self, source, target):
        super().__init__(f"state {target} is unreachable from {source}")
        self.source = source
        self.target = target


class MultiplicityAboveOne(CovoptError):
    """The second smallest eigenvalue is repeated, so no single edge can raise it."""


class MalformedMap(CovoptError, ValueError):
    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)
        self.line = line
        self.column = column


class MalformedTrack(MalformedMap):
    pass


class OptionStuck(CovoptError):
    def __init__(self, option, state):
        super().__init__(
            f"option {option.initiation}->{option.termination} reached state {state} "
            "outside its policy domain"
        )
        self.option = option
        self.state = state


class ConfigError(CovoptError, ValueError):
    pass
