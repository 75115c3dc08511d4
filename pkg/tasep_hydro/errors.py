"""Exception hierarchy shared by the library and the command line."""


class TasepHydroError(Exception):
    """Base error with a machine-readable code and a process exit status."""

    code = "error"
    exit_code = 1


class ConfigError(TasepHydroError):
    """Configuration error."""

    code = "config_error"
    exit_code = 2


class DomainError(TasepHydroError, ValueError):
    """Argument outside the domain of a model function."""

    code = "domain_error"


class SimulationError(TasepHydroError):
    """Invalid simulation request or broken lattice invariant."""

    code = "simulation_error"


class AbsorbingStateError(SimulationError):
    """No event is enabled in the current configuration."""

    code = "absorbing_state"


class StateSpaceTooLargeError(TasepHydroError):
    """Exact enumeration refused because the state space is too large."""

    code = "state_space_too_large"


class ReducibleChainError(TasepHydroError):
    """The Markov chain has no unique stationary distribution."""

    code = "reducible_chain"


class ExactSolveError(TasepHydroError):
    """The stationary linear system could not be solved accurately."""

    code = "exact_solve_error"


class ConvergenceError(TasepHydroError):
    """An iterative solver did not reach its tolerance."""

    code = "non_convergence"
    exit_code = 3

    def __init__(self, message: str, residual: float | None = None) -> None:
        super().__init__(message)
        self.residual = residual


class IntegrationError(TasepHydroError):
    """Characteristic integration drifted beyond its tolerance."""

    code = "integration_error"


class InferenceError(TasepHydroError):
    """Rate inference cannot be carried out on the given profile."""

    code = "inference_error"
