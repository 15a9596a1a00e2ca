"""Exception hierarchy shared across the harness."""


class PromptProbeError(Exception):
    """Base class for all harness errors."""


# model access
class GatewayError(PromptProbeError):
    pass


class AuthMissing(GatewayError):
    pass


class Transport(GatewayError):
    pass


class RateLimited(GatewayError):
    pass


class MalformedResponse(GatewayError):
    pass


class UnknownRulebook(GatewayError):
    pass


# datasets and prompts
class UnknownDataset(PromptProbeError):
    pass


class SchemaViolation(PromptProbeError):
    def __init__(self, message, record_id=None):
        super().__init__(message if record_id is None else f"record {record_id!r}: {message}")
        self.record_id = record_id


class InsufficientRecords(PromptProbeError):
    pass


class TemplateError(PromptProbeError):
    pass


class ShotMismatch(TemplateError):
    pass


class MissingField(TemplateError):
    pass


# prompt engineering
class UnknownMethod(PromptProbeError):
    pass


class StageFailure(PromptProbeError):
    pass


class DecompositionEmpty(PromptProbeError):
    pass


# attacks
class InvalidPosition(PromptProbeError):
    pass


class NoAttackableWords(PromptProbeError):
    pass


class BudgetTooSmall(PromptProbeError):
    pass


class UnknownProvider(PromptProbeError):
    pass


# dynamic generation
class GenerationExhausted(PromptProbeError):
    pass


class CyclicGraph(PromptProbeError):
    pass


class ArityViolation(PromptProbeError):
    pass


class SingularSystem(PromptProbeError):
    pass


# pipeline
class EmptyRun(PromptProbeError):
    pass


class ConfigError(PromptProbeError):
    pass
