"""
프로젝트 공통 예외
"""


class SubgoalPlannerError(Exception):
    """Base class of every error raised on purpose by this package."""


# knowledge
class GraphLoadError(SubgoalPlannerError):
    def __init__(self, message, location=None):
        self.location = location
        if location:
            message = f'{location}: {message}'
        super().__init__(message)


class GraphSchemaError(GraphLoadError):
    pass


class KnowledgeSchemaError(GraphSchemaError):
    pass


class GrammarError(SubgoalPlannerError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f'line {line}: {message}'
        super().__init__(message)


class UnknownSubgoalError(SubgoalPlannerError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class InvalidGraphError(SubgoalPlannerError):
    pass


class ExtractionError(SubgoalPlannerError):
    pass


# llm
class BackendError(SubgoalPlannerError):
    pass


class LLMTimeout(BackendError):
    pass


class RetriesExhausted(BackendError):
    def __init__(self, message, attempts):
        self.attempts = attempts
        super().__init__(message)


class ReplayExhausted(BackendError):
    pass


class MockMiss(BackendError):
    pass


# planner
class PromptError(SubgoalPlannerError):
    pass


class UnknownPlaceholder(PromptError):
    def __init__(self, name):
        self.name = name
        super().__init__(f'unknown placeholder {{{name}}}')


class MissingExtras(PromptError):
    def __init__(self, role, names):
        self.role = role
        self.names = sorted(names)
        super().__init__(f'{role} prompt needs {", ".join(self.names)}')


class ParseError(SubgoalPlannerError):
    def __init__(self, kind, message):
        self.kind = kind
        super().__init__(f'{kind}: {message}')


class PlanningError(SubgoalPlannerError):
    pass


# tracker
class TrackerError(SubgoalPlannerError):
    pass


class NoActivePlan(TrackerError):
    pass


# gridcraft
class WorldConfigError(SubgoalPlannerError):
    pass


class EpisodeDoneError(SubgoalPlannerError):
    pass


# harness
class ConfigError(SubgoalPlannerError):
    pass


class MetricsError(SubgoalPlannerError, ValueError):
    pass
