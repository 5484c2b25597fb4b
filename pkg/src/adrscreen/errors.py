"""Exception types shared across the pipeline.

Every rejected input surfaces as one of these; parsers never let raw
json/csv/unicode exceptions escape.
"""


class AdrScreenError(Exception):
    """Base class for all pipeline errors."""


class ParseError(AdrScreenError):
    """Input bytes are not syntactically valid (bad JSON, bad encoding).

    Carries line/column/offset of the failure when the underlying parser
    reports one.
    """

    def __init__(self, message: str, line: int | None = None,
                 column: int | None = None, offset: int | None = None):
        loc = ""
        if line is not None:
            loc = f" (line {line}, column {column})"
        elif offset is not None:
            loc = f" (offset {offset})"
        super().__init__(message + loc)
        self.line = line
        self.column = column
        self.offset = offset


class SchemaError(AdrScreenError):
    """Input parsed but violates the documented file schema."""


class EmptyInputError(AdrScreenError):
    """An operation that needs at least one element received none."""


class EvaluationError(AdrScreenError):
    """Cohort evaluation cannot proceed (unknown ground truth, single-class ROC)."""
