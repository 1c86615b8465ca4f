from typing import Any, List, Optional


class ToolkitError(Exception):
    """Base failure carrying a user-facing detail and a process exit code."""

    exit_code = 1

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class DomainError(ToolkitError):
    exit_code = 2


class SpecSyntaxError(DomainError):
    def __init__(self, detail: str, position: int = 0):
        super().__init__(f"{detail} (at column {position})")
        self.position = position


class CapacityError(DomainError):
    def __init__(self, cap_name: str, cap_value: int, requested: int):
        super().__init__(
            f"{cap_name}={cap_value} exceeded (requested {requested}); "
            f"raise it with --{cap_name.replace('_', '-')}"
        )
        self.cap_name = cap_name
        self.cap_value = cap_value
        self.requested = requested


class ConfigError(DomainError):
    pass


class BudgetExhausted(ToolkitError):
    exit_code = 3

    def __init__(self, visited: int, budget: int, systems: Optional[List[Any]] = None):
        super().__init__(
            f"enumeration budget of {budget} closed sets exhausted after {visited}"
        )
        self.visited = visited
        self.budget = budget
        self.systems = systems if systems is not None else []
