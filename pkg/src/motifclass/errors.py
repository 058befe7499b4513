"""Exception types shared across the pipeline."""


class MotifClassError(Exception):
    """Base class for all pipeline errors."""


class CorpusError(MotifClassError):
    """Malformed corpus, category, or pattern input."""


class ConfigError(MotifClassError):
    """Invalid configuration value."""


class PipelineError(MotifClassError):
    """Stage-level failure (missing artifact, empty pseudo set, ...)."""
