"""Exception hierarchy shared by every stage of the pipeline."""


class DravmixError(Exception):
    """Base class for all package errors."""


class ParseError(DravmixError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ContractError(DravmixError, ValueError):
    """An operation was called with inputs violating its preconditions."""


class ConfigurationError(DravmixError):
    pass


class TranslationError(DravmixError):
    """The external translator failed (non-zero exit, killed, unreadable output)."""

    def __init__(self, message, returncode=None, stderr=""):
        self.returncode = returncode
        self.stderr = stderr
        super().__init__(message)


class ProtocolError(TranslationError):
    """The translator produced a different number of lines than it was sent."""


class TrainingError(DravmixError):
    pass


class ReportError(DravmixError):
    def __init__(self, message, missing=()):
        self.missing = list(missing)
        super().__init__(message)


class RunError(DravmixError):
    """A grid stage failed. Carries the stage name and, when known, the sample id."""

    def __init__(self, stage, message, sample_id=None):
        self.stage = stage
        self.sample_id = sample_id
        where = f"[{stage}]" if sample_id is None else f"[{stage}] sample {sample_id}"
        super().__init__(f"{where}: {message}")
