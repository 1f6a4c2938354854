"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition."""


class AmplitudeMatchError(ValidationError):
    """No amplitude factor reproduces the target equation.

    Carries the full coefficient-matching system so callers can report it.
    """

    def __init__(self, message, system=None, best_c=None, residual=None):
        super().__init__(message)
        self.system = system or {}
        self.best_c = best_c
        self.residual = residual


class BlowUpError(RuntimeError):
    """Raised when a simulated field exceeds the blow-up guard."""

    def __init__(self, step, max_abs):
        super().__init__(f"blow-up detected at step {step} (max|u| = {max_abs:.3e})")
        self.step = step
        self.max_abs = max_abs


class UnderResolvedError(RuntimeError):
    """Two curve features fall within one sample spacing; resample finer."""


class ConvergenceError(RuntimeError):
    """Iterative solver failed; carries the last bracketing state."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class TailDivergenceError(RuntimeError):
    """An improper integral's tail does not decay at the requested bound."""
