"""Exception hierarchy shared by the services and the CLI."""


class EstimationError(Exception):
    """Base class for every error raised by walkscope."""


# graph-core


class GraphError(EstimationError):
    pass


class EmptyGraph(GraphError):
    pass


class ParseError(GraphError):
    def __init__(self, line_number: int, line: str, reason: str = "malformed line"):
        self.line_number = line_number
        self.line = line
        super().__init__(f"line {line_number}: {reason}: {line!r}")


class SpecError(GraphError, ValueError):
    pass


class InvalidNode(GraphError, IndexError):
    pass


class GraphInvariantError(GraphError):
    pass


# access


class AccessError(EstimationError):
    pass


class BudgetExhausted(AccessError):
    def __init__(self, requested: int, remaining: int):
        self.requested = requested
        self.remaining = remaining
        super().__init__(
            f"query needs {requested} unit(s) but only {remaining} remain"
        )


class IsolatedNode(AccessError):
    pass


# walkers


class WalkError(EstimationError):
    pass


class DMaxTooSmall(WalkError):
    pass


class NonReturning(WalkError):
    pass


class EmptyWalk(WalkError):
    pass


# estimators


class EstimatorError(EstimationError):
    pass


class CollisionFree(EstimatorError):
    pass


class EmptySample(EstimatorError):
    pass


# centrality / structure


class RankingError(EstimationError):
    pass


class NonConvergence(RankingError):
    pass


class EmptyStats(RankingError):
    pass


# promptgen


class PromptError(EstimationError):
    pass


class UnknownTask(PromptError, ValueError):
    pass


# agents


class AgentError(EstimationError):
    pass


class ProcessFailure(AgentError):
    pass


class ReplayMissing(ProcessFailure):
    pass


class AgentTimeout(AgentError):
    pass


class Unparsable(AgentError):
    pass


# harness


class HarnessError(EstimationError):
    pass


class ConfigError(HarnessError):
    pass


class FetchError(HarnessError):
    pass
