"""Exception hierarchy. Every data-level failure derives from MathIRError."""


class MathIRError(Exception):
    """Base class for data errors (CLI exit code 2)."""


class MalformedXml(MathIRError):
    pass


class EmptyFormula(MathIRError):
    pass


class UnreadableFile(MathIRError):
    pass


class SchemaError(MathIRError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyCorpus(MathIRError):
    pass


class IndexIoError(MathIRError):
    """Index file missing, truncated, or corrupt."""


class VersionMismatch(MathIRError):
    pass


class EmptyQuery(MathIRError):
    pass


class UnknownPost(MathIRError):
    pass


class EmptyDocSet(MathIRError):
    pass


class EmptyPool(MathIRError):
    pass


class MissingJudgments(MathIRError):
    pass
