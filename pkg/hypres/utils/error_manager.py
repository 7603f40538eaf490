"""
Error Manager for hypres.

Provides the exception hierarchy shared by every numerical module,
classification by severity, and the standardized error record the
CLI emits with --json-errors.
"""

from typing import Dict, Any, Optional, Tuple
from datetime import datetime
import enum
import traceback

import numpy as np
import structlog

logger = structlog.get_logger()


class ErrorSeverity(enum.Enum):
    RECOVERABLE = "RECOVERABLE"  # Retry with other settings may succeed
    DEGRADED = "DEGRADED"        # One result failed, the run continues
    CRITICAL = "CRITICAL"        # The run cannot continue


class HypresError(Exception):
    """Base class for known hypres errors."""

    code = "HYPRES_ERROR"
    exit_status = 3

    def __init__(self, message: str, severity: ErrorSeverity = ErrorSeverity.CRITICAL,
                 context: Optional[Dict[str, Any]] = None):
        self.message = message
        self.severity = severity
        self.context = context or {}
        super().__init__(message)


class ConfigurationError(HypresError):
    """Unknown model kind, invalid parameters or an invalid run document."""
    code = "CONFIGURATION_ERROR"
    exit_status = 2


class EvaluationError(HypresError):
    """A Hamiltonian or one of its derivatives could not be evaluated."""
    code = "EVALUATION_ERROR"

    def __init__(self, message: str, point=None, **kwargs):
        context = kwargs.pop("context", {}) or {}
        if point is not None:
            context["point"] = [float(v) for v in point]
        super().__init__(message, context=context, **kwargs)
        self.point = point


class IntegrationError(HypresError):
    """The integrator failed; carries the last good time and state."""
    code = "INTEGRATION_ERROR"

    def __init__(self, message: str, t_last: Optional[float] = None, state_last=None, **kwargs):
        context = kwargs.pop("context", {}) or {}
        if t_last is not None:
            context["t_last"] = float(t_last)
        if state_last is not None:
            context["state_last"] = [float(v) for v in state_last]
        super().__init__(message, context=context, **kwargs)
        self.t_last = t_last
        self.state_last = state_last


class SearchError(HypresError):
    """No section crossing within the search horizon."""
    code = "SEARCH_ERROR"


class NonConvergenceError(HypresError):
    """Newton stagnation; carries the final residual."""
    code = "NON_CONVERGENCE"

    def __init__(self, message: str, residual: float = float("nan"), **kwargs):
        context = kwargs.pop("context", {}) or {}
        context["residual"] = float(residual)
        super().__init__(message, context=context, **kwargs)
        self.residual = residual


class DegenerateSectionError(HypresError):
    code = "DEGENERATE_SECTION"


class DegeneracyError(HypresError):
    """The eigenvalue 1 of the monodromy does not have multiplicity exactly 2."""
    code = "TRIVIAL_MULTIPLICITY"

    def __init__(self, message: str, multiplicity: int = -1, **kwargs):
        context = kwargs.pop("context", {}) or {}
        context["multiplicity"] = int(multiplicity)
        super().__init__(message, context=context, **kwargs)
        self.multiplicity = multiplicity


class WilliamsonDegeneracyError(HypresError):
    """A multiplier sits on +1 or -1."""
    code = "WILLIAMSON_DEGENERACY"


class BranchError(HypresError):
    """A multiplier lies on the negative real axis; no real logarithm exists."""
    code = "BRANCH_ERROR"


class LogarithmError(HypresError):
    code = "LOGARITHM_ERROR"


class ZeroExponentError(HypresError):
    code = "ZERO_EXPONENT"


class NonSemisimpleError(HypresError):
    code = "NON_SEMISIMPLE"


class BasisConstructionError(HypresError):
    code = "BASIS_CONSTRUCTION"


class NoAnchorError(HypresError):
    """Bohr-Sommerfeld target outside the tabulated action range."""
    code = "NO_ANCHOR"

    def __init__(self, message: str, k_interval: Tuple[int, int] = (0, -1), **kwargs):
        context = kwargs.pop("context", {}) or {}
        context["admissible_k"] = [int(k_interval[0]), int(k_interval[1])]
        super().__init__(message, severity=ErrorSeverity.DEGRADED, context=context, **kwargs)
        self.k_interval = k_interval


class HypothesisFailure(HypresError):
    """Raised by the CLI under --strict when a hypothesis certificate fails."""
    code = "HYPOTHESIS_FAILURE"
    exit_status = 4


class ErrorManager:
    """
    Centralized error classification for CLI and workflow callers.
    """

    def handle_error(self, error: Exception, component: str,
                     context: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        """
        Process an error: log it, determine severity, and return a safe error record.

        Args:
            error: The exception that occurred.
            component: Name of the component where error happened (e.g., 'orbit_finder').
            context: Additional context data (e.g., energy, config path).

        Returns:
            A standardized error dictionary for machine-readable output.
        """
        severity = ErrorSeverity.CRITICAL
        message = str(error)
        code = type(error).__name__
        # outside errors still map onto the documented statuses
        exit_status = 3
        error_context: Dict[str, Any] = {}

        if isinstance(error, HypresError):
            severity = error.severity
            code = error.code
            exit_status = error.exit_status
            error_context.update(error.context)
        elif isinstance(error, (np.linalg.LinAlgError, ArithmeticError)):
            exit_status = 3
        elif isinstance(error, (ValueError, KeyError, TypeError)):
            severity = ErrorSeverity.DEGRADED
            exit_status = 2
        error_context.update(context or {})

        logger.error(
            f"{component} error",
            code=code,
            message=message,
            severity=severity.value,
            traceback=traceback.format_exc() if severity is ErrorSeverity.CRITICAL else None,
        )

        return {
            "error": True,
            "message": message,
            "code": code,
            "severity": severity.value,
            "component": component,
            "exit_status": exit_status,
            "context": error_context,
            "timestamp": datetime.now().isoformat(),
        }


# Global instance
_error_manager = ErrorManager()


def get_error_manager() -> ErrorManager:
    return _error_manager
