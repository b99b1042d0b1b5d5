"""Error and warning types for the fine-tune runner."""


class FinetuneError(Exception):
    """Base class for runner failures."""


class MalformedTrainingFile(FinetuneError):
    """A training file line is missing or invalid; carries the line number
    (0 for an empty file)."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}" if lineno else message)
        self.lineno = lineno


class CheckpointLoadFailure(FinetuneError):
    """A checkpoint directory is missing or unreadable."""


class InputFormatMismatch(UserWarning):
    """A CoT-trained checkpoint was fed an input without a <CoT> marker.

    Emitted as a warning: generation proceeds, but outputs are suspect.
    """
