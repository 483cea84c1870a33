"""Exception hierarchy shared by all ffscale modules."""


class FFScaleError(Exception):
    """Base class for every error raised by ffscale."""


class ConfigError(FFScaleError):
    """A scenario file or parameter set failed validation."""


class DomainError(FFScaleError, ValueError):
    """A time argument fell outside the domain of a schedule or Hamiltonian."""


class NumericError(FFScaleError):
    """A numerical routine could not produce a trustworthy result."""


class EigenNotConverged(NumericError):
    def __init__(self, residual, sweeps):
        self.residual = residual
        self.sweeps = sweeps
        super().__init__(
            f"Jacobi eigensolver did not converge after {sweeps} sweeps "
            f"(off-diagonal residual {residual:.3e})"
        )


class DegenerateSpectrum(NumericError):
    def __init__(self, s, min_gap, threshold):
        self.s = s
        self.min_gap = min_gap
        self.threshold = threshold
        super().__init__(
            f"degenerate spectrum at s={s!r}: min gap {min_gap:.3e} <= threshold {threshold:.3e}"
        )


class AmbiguousTracking(NumericError):
    def __init__(self, s, overlap):
        self.s = s
        self.overlap = overlap
        super().__init__(
            f"level tracking ambiguous at s={s!r}: best overlap {overlap:.3f} < 1/sqrt(2); "
            "reduce the step size"
        )


class SeriesNotConverged(NumericError):
    def __init__(self, message, max_phase_difference=None):
        self.max_phase_difference = max_phase_difference
        super().__init__(message)
