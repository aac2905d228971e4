"""
Custom validators for the Galerkin solver.
Each validator returns the value unchanged or raises InvalidArgumentError with a code.
"""
import math

from .exceptions import InvalidArgumentError


def validate_positive_length(value, name='L'):
    """Validate a domain length (finite, strictly positive)."""
    if not math.isfinite(value) or value <= 0:
        raise InvalidArgumentError(
            f'{name} must be a positive finite length, got {value!r}.',
            code='invalid_length'
        )

    return value


def validate_positive_count(value, name='n'):
    """Validate a count such as basis size or number of panels."""
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise InvalidArgumentError(
            f'{name} must be a positive integer, got {value!r}.',
            code='invalid_count'
        )

    return int(value)


def validate_operator_order(value):
    """Validate the order m of the m-harmonic operator."""
    if value not in (1, 2):
        raise InvalidArgumentError(
            f'Operator order m must be 1 or 2, got {value!r}.',
            code='invalid_order'
        )

    return value


def validate_gauss_points(value):
    """Validate Gauss points per panel."""
    if int(value) != value or not 2 <= value <= 16:
        raise InvalidArgumentError(
            f'points_per_panel must be an integer in 2..16, got {value!r}.',
            code='invalid_gauss_order'
        )

    return int(value)


def validate_in_domain(x, L, name='x', closed=True):
    """Validate that a position lies in [0, L] (or (0, L) when closed is False)."""
    inside = 0.0 <= x <= L if closed else 0.0 < x < L
    if not inside:
        interval = f'[0, {L:g}]' if closed else f'(0, {L:g})'
        raise InvalidArgumentError(
            f'{name}={x!r} lies outside {interval}.',
            code='outside_domain'
        )

    return x


def validate_interval(a, b, L):
    """Validate an indicator interval 0 <= a < b <= L."""
    if not 0.0 <= a < b <= L:
        raise InvalidArgumentError(
            f'Indicator interval requires 0 <= a < b <= L, got a={a!r}, b={b!r}, L={L!r}.',
            code='invalid_interval'
        )

    return a, b


def validate_time_step(tau, T=None):
    """Validate a time step; tau must not exceed a positive final time."""
    if not math.isfinite(tau) or tau <= 0:
        raise InvalidArgumentError(
            f'Time step must be positive, got {tau!r}.',
            code='invalid_time_step'
        )

    if T is not None and T > 0 and tau > T:
        raise InvalidArgumentError(
            f'Time step {tau!r} exceeds final time {T!r}.',
            code='time_step_too_large'
        )

    return tau


def validate_non_negative(value, name):
    """Validate a non-negative coefficient such as gamma or a final time."""
    if not math.isfinite(value) or value < 0:
        raise InvalidArgumentError(
            f'{name} must be non-negative, got {value!r}.',
            code='negative_value'
        )

    return value
