"""Exception types raised by the sensing toolkit."""
from dataclasses import dataclass
from typing import List, Optional


class SensingError(Exception):
    """Base class for every error raised by this package."""


class ContractViolation(SensingError, ValueError):
    """Shape, dimension or range precondition broken by the caller."""


class NotHermitianError(SensingError):
    def __init__(self, deviation: float, tol: float):
        self.deviation= deviation
        self.tol= tol
        super().__init__(f'matrix is not Hermitian: max|m - m^dag| = {deviation:.3e} exceeds tolerance {tol:.1e}')


class NotPositiveError(SensingError):
    def __init__(self, min_eigenvalue: float, tol: float):
        self.min_eigenvalue= min_eigenvalue
        self.tol= tol
        super().__init__(f'matrix is not positive semidefinite: most negative eigenvalue {min_eigenvalue:.3e} (floor {-tol:.1e})')


class ConvergenceError(SensingError):
    """Iterative routine hit its iteration cap."""


class FIDivergenceError(SensingError):
    def __init__(self, label, prob: float, derivative: float):
        self.label= label
        super().__init__(f'FI divergence at outcome {label!r}: p = {prob:.3e} while |dp| = {abs(derivative):.3e}')


class PoleError(SensingError):
    def __init__(self, fidelity: float, alpha: float):
        self.fidelity= fidelity
        self.alpha= alpha
        super().__init__(f'finite-fidelity FI has a pole at f = {fidelity!r}, alpha = {alpha!r}')


class FitError(SensingError):
    def __init__(self, message: str, residual: Optional[float] = None):
        self.residual= residual
        if residual is not None:
            message= f'{message} (residual {residual:.3e})'
        super().__init__(message)


class FlatLikelihoodError(SensingError):
    """Log-likelihood does not depend on alpha over the search range."""


class ConfigError(SensingError):
    def __init__(self, diagnostics: List[str]):
        self.diagnostics= list(diagnostics)
        super().__init__('invalid config: ' + '; '.join(self.diagnostics))


@dataclass(frozen=True)
class NonIdentifiable:
    """Returned instead of a bound when (I^-1)_11 does not exist."""
    reason: str

    def __bool__(self):
        return False
