"""Exception types shared across the toolkit."""

from __future__ import annotations


class UsageError(ValueError):
    """Bad arguments: dimension mismatches, malformed config, unknown parameter keys."""


class SingularIterationMatrix(RuntimeError):
    """Newton iteration matrix numerically singular.

    Carries the 1-norm condition estimate that tripped the guard.
    """

    def __init__(self, cond: float, iteration: int | None = None):
        self.cond = cond
        self.iteration = iteration
        where = f" at iteration {iteration}" if iteration is not None else ""
        super().__init__(
            f"iteration matrix numerically singular{where} (cond ~ {cond:.3e})"
        )


class DivergedTrajectory(RuntimeError):
    """Non-finite values encountered while evaluating a trajectory."""


class MaxIterationsExceeded(RuntimeError):
    """Newton failed to reach tolerance within the iteration budget.

    ``residual_history`` holds the step norms recorded before giving up;
    ``last_spectrum`` the final (non-converged) iterate for inspection.
    """

    def __init__(self, residual_history, tolerance: float, last_spectrum=None):
        self.residual_history = list(residual_history)
        self.tolerance = tolerance
        self.last_spectrum = last_spectrum
        tail = self.residual_history[-1] if self.residual_history else float("nan")
        super().__init__(
            f"no convergence in {len(self.residual_history)} iterations "
            f"(last step norm {tail:.3e}, tolerance {tolerance:.1e})"
        )


class SingularAtFrequency(RuntimeError):
    """Harmonic transfer function requested at (numerically) an HSS eigenvalue."""

    def __init__(self, s: complex, distance: float):
        self.s = s
        self.distance = distance
        super().__init__(
            f"s = {s:.6g} lies within {distance:.3e} of an HSS eigenvalue"
        )
