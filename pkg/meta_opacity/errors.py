import typing as T


class OpacityError(Exception):
    def __init__(self, msg, cause=None):
        super().__init__(msg)
        self.cause = cause


class Violation(T.NamedTuple):
    code: str
    message: str
    path: str = ""
    line: T.Optional[int] = None
    column: T.Optional[int] = None

    def __str__(self) -> str:
        where = self.path
        if self.line is not None:
            where = f"line {self.line}, column {self.column}"
        return f"{where}: {self.message}" if where else self.message


class ModelError(OpacityError, ValueError):
    def __init__(self, msg, violations: T.Sequence[Violation] = (), cause=None):
        super().__init__(msg, cause)
        self.violations = list(violations)

    def __str__(self) -> str:
        if not self.violations:
            return super().__str__()
        return "; ".join(str(v) for v in self.violations)


class SemanticsError(OpacityError):
    def __init__(self, msg, code: str, atom=None, cause=None):
        super().__init__(msg, cause)
        self.code = code
        self.atom = atom


class UnsupportedClassError(OpacityError):
    def __init__(self, msg, reason: str = "", cause=None):
        super().__init__(msg, cause)
        self.reason = reason or msg


class ResourceLimitError(OpacityError):
    def __init__(self, msg, limit: str, value: int, cause=None):
        super().__init__(msg, cause)
        self.limit = limit
        self.value = value


class DimensionError(OpacityError, ValueError):
    pass
