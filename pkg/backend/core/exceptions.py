"""
Custom exceptions and error payload handler for the Galerkin solver.
"""


def solver_exception_payload(exc):
    """
    Standardizes any exception raised during a solver run into a consistent payload.
    Solver errors keep their own exit code; anything else is reported as an internal error.
    """
    if isinstance(exc, SolverError):
        return {
            'error': True,
            'code': exc.exit_code,
            'message': exc.detail,
            'details': exc.get_details(),
        }

    # Ensure we don't crash on __str__ if it's not implemented
    try:
        exc_str = str(exc)
    except Exception:
        exc_str = None

    return {
        'error': True,
        'code': SolverError.exit_code,
        'message': 'Internal solver error',
        'details': exc_str,
    }


class SolverError(Exception):
    """
    Base exception for the solver.
    Every subclass maps onto a process exit code for the `solver` command.
    """
    exit_code = 1
    default_detail = 'The solver could not complete the request.'
    default_code = 'solver_error'

    def __init__(self, detail=None, code=None):
        self.detail = detail if detail is not None else self.default_detail
        self.code = code if code is not None else self.default_code
        super().__init__(self.detail)

    def get_details(self):
        return {'code': self.code}


class InvalidArgumentError(SolverError, ValueError):
    """
    Exception raised for arguments outside an operation's domain
    (non-positive length, x outside [0, L], mismatched discretizations...).
    """
    exit_code = 1
    default_detail = 'Invalid argument.'
    default_code = 'invalid_argument'


class ConfigParseError(InvalidArgumentError):
    """Exception raised by the run-config parser. Carries the offending line number."""
    default_detail = 'Configuration could not be parsed.'
    default_code = 'config_parse_error'

    def __init__(self, detail=None, line=None, code=None):
        self.line = line
        if detail is not None and line is not None:
            detail = f'line {line}: {detail}'
        super().__init__(detail, code)

    def get_details(self):
        return {'code': self.code, 'line': self.line}


class InternalError(SolverError, RuntimeError):
    """
    Exception raised when an internal invariant breaks
    (unbracketed eigenvalue root, failed Cholesky factorization).
    """
    exit_code = 1
    default_detail = 'Internal solver error.'
    default_code = 'internal_error'


class BlowUpError(SolverError, ArithmeticError):
    """
    Exception raised when the coefficient vector stops being finite.
    Automatically maps to exit code 2.
    """
    exit_code = 2
    default_detail = 'Numerical blow-up.'
    default_code = 'blow_up'

    def __init__(self, t, max_abs, detail=None):
        self.t = float(t)
        self.max_abs = float(max_abs)
        if detail is None:
            detail = f'Non-finite state at t={self.t:.6g} (max |c| = {self.max_abs:.6g})'
        super().__init__(detail)

    def get_details(self):
        return {'code': self.code, 't': self.t, 'max_abs': self.max_abs}


class EnergyIncreaseError(SolverError):
    """
    Exception raised when a forcing-free step increases the discrete energy beyond tolerance.
    The runner answers it by halving the time step.
    """
    exit_code = 2
    default_detail = 'Discrete energy increased beyond tolerance.'
    default_code = 'energy_increase'

    def __init__(self, t, increase, detail=None):
        self.t = float(t)
        self.increase = float(increase)
        if detail is None:
            detail = f'Energy increased by {self.increase:.3e} at t={self.t:.6g}'
        super().__init__(detail)

    def get_details(self):
        return {'code': self.code, 't': self.t, 'increase': self.increase}


class AuditFailure(SolverError):
    """
    Exception raised when an enforced audit check fails.
    Automatically maps to exit code 3.
    """
    exit_code = 3
    default_detail = 'One or more audit checks failed.'
    default_code = 'audit_failed'

    def __init__(self, failed_checks, detail=None):
        self.failed_checks = list(failed_checks)
        if detail is None:
            detail = f'Audit failed: {", ".join(self.failed_checks)}'
        super().__init__(detail)

    def get_details(self):
        return {'code': self.code, 'failed_checks': self.failed_checks}


class OutputError(SolverError):
    """Exception raised when a result file cannot be written. Carries the path."""
    exit_code = 1
    default_detail = 'Could not write output.'
    default_code = 'output_error'

    def __init__(self, path, reason=None):
        self.path = str(path)
        detail = f'Could not write {self.path}'
        if reason:
            detail = f'{detail}: {reason}'
        super().__init__(detail)

    def get_details(self):
        return {'code': self.code, 'path': self.path}
