"""Exception types raised across the package."""


class DQCError(Exception):
    """Base class for all package errors."""


class UnsupportedGate(DQCError):
    def __init__(self, name: str, line: int | None = None):
        self.name = name
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"unsupported gate {name!r}{where}")


class MalformedProgram(DQCError):
    def __init__(self, line: int, msg: str = "malformed statement"):
        self.line = line
        super().__init__(f"line {line}: {msg}")


class MultipleQuantumRegisters(DQCError):
    pass


class InsufficientCapacity(DQCError):
    pass


class CapacityViolation(DQCError):
    pass


class InvalidLayer(DQCError):
    pass


class TooManyWires(DQCError):
    pass


class NonUnitaryAngle(DQCError):
    pass
