"""Exception types shared across the pipeline.

The CLI maps these onto exit codes: ConfigError (and bad arguments) exit 1,
FormatError/DataError exit 2, OSError exits 3.
"""


class PipelineError(Exception):
    """Base class for errors raised by pipeline stages."""


class ConfigError(PipelineError):
    """Invalid configuration."""


class FormatError(PipelineError):
    """Malformed file contents (bad magic, wrong column count, ...)."""


class DataError(PipelineError):
    """Well-formed input whose data is unusable (duplicate ids, empty lexicon, ...)."""
