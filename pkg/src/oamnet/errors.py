"""Exception hierarchy for the simulator.

Library code raises these; only the command line turns them into exit codes.
"""


class OamnetError(Exception):
    """Base class for every error raised by oamnet."""


class OrderCapError(OamnetError, ValueError):
    """Mode order or |ℓ| above the configured cap."""

    def __init__(self, what: str, value: int, cap: int):
        self.value = value
        self.cap = cap
        super().__init__(f"{what} {value} exceeds configured cap {cap}")


class NotBb84StateError(OamnetError, ValueError):
    """A Jones vector that is not one of the four canonical states at the given depth."""


class UnsortableSetError(OamnetError, ValueError):
    def __init__(self, subset):
        self.subset = tuple(sorted(subset))
        super().__init__(f"unsortable set: no deterministic split found for {list(self.subset)}")


class UnknownUserError(OamnetError, KeyError):
    def __init__(self, user: str):
        self.user = user
        super().__init__(f"unknown user {user!r}")

    def __str__(self) -> str:
        return self.args[0]


class InportBusyError(OamnetError, RuntimeError):
    def __init__(self, requester: str, holder: str):
        self.requester = requester
        self.holder = holder
        super().__init__(f"in-port busy: {requester!r} refused, lease held by {holder!r}")


class TranscriptLengthError(OamnetError, ValueError):
    """Sender and receiver transcripts of different length."""


class InsufficientSampleError(OamnetError, ValueError):
    """Not enough sifted bits to estimate the error rate."""


class ScenarioError(OamnetError, ValueError):
    def __init__(self, field: str, message: str, line: int | None = None):
        self.field = field
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{field}: {message}")
