"""Exception hierarchy shared by all tabdistill modules."""


class TabDistillError(Exception):
    """Base class for every error raised by this package."""


# --- corpus ---------------------------------------------------------------

class MissingField(TabDistillError):
    def __init__(self, field: str):
        self.field = field
        super().__init__(f"record is missing required field {field!r}")


class EmptyTable(TabDistillError):
    pass


class InvalidSplit(TabDistillError):
    def __init__(self, split: str):
        self.split = split
        super().__init__(f"unknown split label {split!r} (expected train/validation/test)")


class IoFailure(TabDistillError):
    pass


class ParseFailure(TabDistillError):
    """Aggregates per-line parse errors with line numbers."""

    def __init__(self, line_errors: list[tuple[int, Exception]]):
        self.line_errors = line_errors
        lines = "; ".join(f"line {n}: {e}" for n, e in line_errors[:5])
        more = f" (+{len(line_errors) - 5} more)" if len(line_errors) > 5 else ""
        super().__init__(f"{len(line_errors)} malformed record(s): {lines}{more}")


class EmptyCorpus(TabDistillError):
    pass


# --- linearizer -----------------------------------------------------------

class SpecialTokenCollision(TabDistillError):
    def __init__(self, token: str, where: str):
        self.token = token
        self.where = where
        super().__init__(f"special token {token!r} occurs verbatim in {where}")


class EmptyReasoning(TabDistillError):
    pass


class MalformedInput(TabDistillError):
    pass


# --- prompt builder -------------------------------------------------------

class TokenBudgetExceeded(TabDistillError):
    def __init__(self, estimate: int, limit: int):
        self.estimate = estimate
        self.limit = limit
        super().__init__(f"estimated {estimate} tokens exceeds limit {limit}")


class EmptyDescription(TabDistillError):
    pass


# --- llm client -----------------------------------------------------------

class ClientError(TabDistillError):
    pass


class AuthFailure(ClientError):
    def __init__(self, status: int):
        self.status = status
        super().__init__(f"authentication rejected by backend (HTTP {status})")


class RetriesExhausted(ClientError):
    def __init__(self, attempts: int, last_status: int | None):
        self.attempts = attempts
        self.last_status = last_status
        super().__init__(f"gave up after {attempts} attempts (last status: {last_status})")


class Timeout(ClientError):
    pass


class MalformedResponse(ClientError):
    pass


class ScriptExhausted(ClientError):
    pass


# --- orchestrator ---------------------------------------------------------

class PairParseFailure(TabDistillError):
    def __init__(self, label: str, detail: str = ""):
        self.label = label
        detail = f": {detail}" if detail else ""
        super().__init__(f"could not parse section {label!r}{detail}")


class GenerationFailed(TabDistillError):
    pass


class VerificationFailed(TabDistillError):
    pass


class ResumeConfigMismatch(TabDistillError):
    pass


class UnknownMode(TabDistillError):
    def __init__(self, mode: str):
        self.mode = mode
        super().__init__(f"unknown emission mode {mode!r}")


class MissingTable(TabDistillError):
    def __init__(self, table_id: str):
        self.table_id = table_id
        super().__init__(f"pair references table_id {table_id!r} absent from corpus")


# --- metrics --------------------------------------------------------------

class EmptyReference(TabDistillError):
    pass


class EmptyInput(TabDistillError):
    pass


class AlignmentFailure(TabDistillError):
    def __init__(self, missing_ids: list[str]):
        self.missing_ids = missing_ids
        shown = ", ".join(missing_ids[:10])
        super().__init__(f"example ids do not align: {shown}")


# --- cli ------------------------------------------------------------------

class ConfigValidationFailure(TabDistillError):
    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {v}" for v in violations))
