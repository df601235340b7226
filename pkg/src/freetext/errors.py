"""Typed errors shared across modules.

Every error carries a stable ``name`` (the class name) that the API layer
echoes in error bodies, so these class names are part of the wire contract.
"""


class FreetextError(Exception):
    """Base for all service errors."""

    @property
    def name(self) -> str:
        return type(self).__name__

    @property
    def detail(self) -> str:
        return str(self) or self.name


# --- domain validation ---------------------------------------------------

class ValidationError(FreetextError):
    pass


class EmptyQuestionText(ValidationError):
    pass


class QuestionTooLong(ValidationError):
    pass


class EmptyCriterionText(ValidationError):
    pass


class CriterionTooLong(ValidationError):
    pass


class TooManyCriteria(ValidationError):
    pass


class EmptyResponseText(ValidationError):
    pass


class ResponseTooLong(ValidationError):
    pass


class BoundsError(ValidationError):
    """Span offsets fall outside the annotated response."""


class InvalidFeedback(ValidationError):
    """Feedback violates the mode/span invariants."""


class InvalidQuestionId(ValidationError):
    pass


class DuplicateQuestionId(ValidationError):
    """An assignment lists the same question twice."""


# --- prompt engine -------------------------------------------------------

class TemplateError(FreetextError):
    pass


class MissingBinding(TemplateError):
    def __init__(self, placeholder: str):
        super().__init__(f"no binding supplied for placeholder {placeholder!r}")
        self.placeholder = placeholder


class UnknownPlaceholder(TemplateError):
    def __init__(self, placeholder: str):
        super().__init__(f"binding {placeholder!r} matches no declared placeholder")
        self.placeholder = placeholder


# --- llm gateway ---------------------------------------------------------

class ProviderError(FreetextError):
    """Base for completion-backend failures.

    ``retryable`` marks transport-class faults; the gateway never retries
    deterministic failures (script misses, refusals, parse errors).
    """

    retryable = False


class ProviderTimeout(ProviderError):
    retryable = True


class ProviderUnavailable(ProviderError):
    def __init__(self, detail: str = "", retryable: bool = True):
        super().__init__(detail)
        self.retryable = retryable


class OutputTooLong(ProviderError):
    retryable = False


class UnparseableCompletion(FreetextError):
    """Completion text lacks a required structured block."""


# --- refinement ----------------------------------------------------------

class CriteriaAlreadyPresent(FreetextError):
    pass


class RefinementError(FreetextError):
    """Provider or parse failure mid-loop; carries the partial report."""

    def __init__(self, cause: FreetextError, report_so_far):
        super().__init__(f"refinement aborted: {cause.detail}")
        self.cause = cause
        self.report_so_far = report_so_far


class NotFound(FreetextError):
    """Missing entity or unlocatable quote."""


# --- storage -------------------------------------------------------------

class StorageError(FreetextError):
    pass


class DuplicateId(StorageError):
    pass


class VersionConflict(StorageError):
    pass


class PersistenceDisabled(StorageError):
    pass
