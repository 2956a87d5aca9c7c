"""Exception hierarchy shared by every stage of the pipeline."""


class ApproxFixError(Exception):
    """Base class for all errors raised by approxfix."""


class EmptyInput(ApproxFixError, ValueError):
    pass


class DimensionMismatch(ApproxFixError, ValueError):
    pass


class SeparationFailure(ApproxFixError):
    """Two distinct generators cannot be told apart by any functional."""

    def __init__(self, i, j, message=None):
        self.pair = (i, j)
        super().__init__(message or f"generators {i} and {j} are not separated by any functional")


class AdmissibilityFailure(ApproxFixError):
    """A sampled audit of the admissibility axioms failed."""

    def __init__(self, failures):
        self.failures = dict(failures)
        names = ", ".join(sorted(k for k, ok in self.failures.items() if not ok))
        super().__init__(f"admissibility audit failed: {names}")


class NetOverflow(ApproxFixError):
    """The epsilon-net grew past its configured cap."""

    def __init__(self, cap, epsilon):
        self.cap = cap
        self.epsilon = epsilon
        super().__init__(f"net exceeded {cap} points at epsilon={epsilon:g}")


class UncoveredPoint(ApproxFixError):
    """All partition values vanish at a point, so the net does not cover it."""

    def __init__(self, x, total):
        self.x = x
        self.total = total
        super().__init__(f"point {x!r} is not covered (partition sum {total:.3e})")


class NotConverged(ApproxFixError):
    def __init__(self, best_residual, best_point=None, message=None):
        self.best_residual = best_residual
        self.best_point = best_point
        super().__init__(message or f"fixed point solver did not converge (best residual {best_residual:.3e})")


class MapLeavesHull(ApproxFixError):
    def __init__(self, point, residual):
        self.point = point
        self.residual = residual
        super().__init__(f"map output {point!r} is outside the hull (fit residual {residual:.3e})")


class DimensionTooHigh(ApproxFixError):
    pass


class NotFound(ApproxFixError):
    """Fixed point extraction failed the residual check."""

    def __init__(self, best, residual):
        self.best = best
        self.residual = residual
        super().__init__(f"no fixed point within tolerance (residual {residual:.3e})")


class BlowUp(ApproxFixError):
    def __init__(self, t, value):
        self.t = t
        self.value = value
        super().__init__(f"a priori bound blew up at t={t:g} (b={value:.3e})")


class TubeViolation(ApproxFixError):
    def __init__(self, index, norm, bound):
        self.index = index
        self.norm = norm
        self.bound = bound
        super().__init__(f"grid node {index}: norm {norm:.6e} exceeds tube bound {bound:.6e}")


class Diverged(ApproxFixError):
    def __init__(self, residuals):
        self.residuals = list(residuals)
        super().__init__("uniform residual grew for 5 consecutive iterates")


class EstimateViolated(ApproxFixError):
    def __init__(self, detail):
        self.detail = detail
        super().__init__(f"L_p estimate violated: {detail}")


class ConfigInvalid(ApproxFixError):
    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        where = f"line {line}" if line else "config"
        super().__init__(f"{where}: {reason}")
