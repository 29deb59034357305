from typing import Optional


class ACTException(Exception):
    """Base error for the detection pipeline.

    Carries the process exit code and a human readable ``detail``.
    """

    exit_code: int = 1

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code

    def __str__(self) -> str:
        return self.detail


class InputNotFoundError(ACTException):
    exit_code = 1

    def __init__(self, path):
        super().__init__(f"No such file: {path}")
        self.path = path


class ConfigError(ACTException):
    exit_code = 2


class CorpusFormatError(ACTException):
    exit_code = 3

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class DuplicateVerseError(ACTException):
    exit_code = 3

    def __init__(self, verse_id, line_number: Optional[int] = None):
        where = f" (line {line_number})" if line_number is not None else ""
        super().__init__(f"Duplicate verse id {verse_id}{where}")
        self.verse_id = verse_id


class EmptyCorpusError(ACTException):
    exit_code = 3


class GroundTruthError(ACTException):
    exit_code = 3


class DocumentMismatchError(ACTException):
    exit_code = 3


class IndexFormatError(ACTException):
    exit_code = 4


class IndexMismatchError(ACTException):
    exit_code = 4
