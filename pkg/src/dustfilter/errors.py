"""Exception types shared across the package."""


class CorpusValidationError(ValueError):
    """A corpus violates a structural requirement (duplicate ids, no samples...)."""


class EvaluationUnavailableError(ValueError):
    """An evaluation-mode operation needs ground truth that is missing."""
