"""Exception hierarchy. CLI exit codes: config 1, solver/training 2, I/O 3."""


class LasdiError(Exception):
    exit_code = 1


class ConfigError(LasdiError):
    exit_code = 1


class DomainError(ConfigError):
    """Parameter point outside the problem's declared domain."""


class ShapeError(LasdiError, ValueError):
    exit_code = 1


class SolverError(LasdiError):
    exit_code = 2


class NewtonDivergenceError(SolverError):
    def __init__(self, step, residual, tol):
        self.step = step
        self.residual = residual
        super().__init__(
            f"Newton failed at time step {step}: residual {residual:.3e} > tol {tol:.1e}"
        )


class InstabilityError(SolverError):
    """NaN/Inf detected in a state trajectory."""


class ConvergenceError(SolverError):
    """Eigen iteration did not converge."""


class RankError(SolverError):
    """Requested latent dimension exceeds numerical rank."""


class TrainingError(SolverError):
    """Autoencoder training diverged."""


class IntegrationError(SolverError):
    """Adaptive ODE integration failed (step underflow or blow-up)."""

    def __init__(self, message, t_reached=None):
        self.t_reached = t_reached
        super().__init__(message)


class IoError(LasdiError):
    exit_code = 3


class FormatError(IoError):
    """Bad magic number, version, or inconsistent header dimensions."""


class HashMismatchError(IoError):
    pass


class IngestError(IoError):
    """External snapshot file inconsistent with its declared layout."""
