class FogplaceError(Exception):
    """Base class for every domain error raised by fogplace."""

    exit_code = 1


class InvalidParameterError(FogplaceError):
    pass


class InvalidScenarioError(FogplaceError):
    exit_code = 2


class NoPathError(FogplaceError):
    def __init__(self, src: int, dst: int):
        super().__init__(f"No path between core nodes {src} and {dst}")
        self.src = src
        self.dst = dst


class InconsistentReplicaError(FogplaceError):
    pass


class InfeasiblePlacementError(FogplaceError):
    exit_code = 4

    def __init__(self, violations: list):
        self.violations = list(violations)
        preview = "; ".join(str(v) for v in self.violations[:3])
        super().__init__(
            f"Placement violates {len(self.violations)} constraint(s): {preview}"
        )


class SearchSpaceTooLargeError(FogplaceError):
    exit_code = 3

    def __init__(self, size: int, bound: int, what: str = "candidate placements"):
        super().__init__(f"{size} {what} exceed the enumeration bound of {bound}")
        self.size = size
        self.bound = bound


class UnclassifiedVmError(FogplaceError):
    pass


class AuditError(FogplaceError):
    exit_code = 5

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        preview = "; ".join(self.problems[:3])
        super().__init__(f"Audit found {len(self.problems)} problem(s): {preview}")
