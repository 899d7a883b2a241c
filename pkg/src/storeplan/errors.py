"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class StoreplanError(Exception):
    exit_code = 1


class InfeasibleError(StoreplanError):
    """A budget or threshold admits no valid plan."""

    exit_code = 2


class InvalidInputError(StoreplanError):
    exit_code = 3


class InvalidPlanError(InvalidInputError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class CorruptionError(StoreplanError):
    """Stored bytes do not match their recorded digest."""

    exit_code = 4
