"""Runtime errors shared by the two evaluators."""


class FuelExhausted(Exception):
    """Raised when an evaluation budget runs out (models divergence)."""

    def __init__(self, steps: int):
        super().__init__(f"fuel exhausted after {steps} steps")
        self.steps = steps


class StuckError(Exception):
    """A non-normal term with no applicable rule: an interpreter bug, not
    a user error."""
