"""Exception types shared across the pipeline."""


class PipelineError(Exception):
    """Base class for all toolkit errors."""


class ParseError(PipelineError):
    """Input file missing or malformed; message carries path and line number."""


class UnknownLabel(PipelineError):
    """Record label is outside the dataset's declared class set."""


class UnknownSource(PipelineError):
    """Corpus pair carries a source tag with no filtering rule."""


class UnknownId(PipelineError):
    """Candidate line references an id absent from the source dataset."""


class TooFewRecords(PipelineError):
    """Not enough records to perform the requested split."""


class EmptyInput(PipelineError):
    """Operation requires at least one element."""


class LengthMismatch(PipelineError):
    """Paired sequences have different lengths."""


class ChecksumMismatch(PipelineError):
    """Manifest content does not match its embedded checksum."""


class EmptyAfterNormalization(PipelineError):
    """Normalized text is empty or whitespace-only; caller decides drop/keep."""
