class FracFemError(Exception):
    pass


class DomainError(FracFemError, ValueError):
    def __init__(self, name: str, value, reason: str):
        self.name = name
        self.value = value
        self.reason = reason
        super().__init__(f"Invalid {name}={value!r}: {reason}")


class UnsupportedDomainError(DomainError):
    pass


class MeshMismatchError(FracFemError, ValueError):
    def __init__(self, expected: int, got: int, what: str = "vector"):
        self.expected = expected
        self.got = got
        self.what = what
        super().__init__(f"Size mismatch for {what}: expected {expected}, got {got}")


class ConfigError(FracFemError):
    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"Config error in '{field}': {reason}")


class InvariantViolationError(FracFemError):
    def __init__(self, name: str, value: float, limit: float):
        self.name = name
        self.value = value
        self.limit = limit
        super().__init__(f"Numerical invariant '{name}' violated: {value:.3e} exceeds {limit:.3e}")


class ReferenceCacheError(FracFemError, OSError):
    def __init__(self, path, reason: str):
        self.path = str(path)
        self.reason = reason
        super().__init__(f"Reference cache error at {self.path}: {reason}")
