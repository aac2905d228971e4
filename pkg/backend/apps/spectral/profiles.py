# FILE: /backend/apps/spectral/profiles.py
"""
Initial and reference profiles on (0, L).

A Profile is a small immutable description (kind + parameters) that can be
sampled at arbitrary points. sine_mode and poly_bump also provide analytic
derivatives up to order four, which manufactured forcing relies on.
"""
import math
from dataclasses import dataclass

import numpy as np

from backend.core.exceptions import InvalidArgumentError
from backend.core.validators import validate_interval, validate_positive_count

PROFILE_KINDS = ('gaussian', 'poly_bump', 'indicator', 'sine_mode', 'coefficients', 'table')
ANALYTIC_KINDS = ('sine_mode', 'poly_bump')


@dataclass(frozen=True)
class Profile:
    kind: str
    params: tuple = ()

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------
    @classmethod
    def gaussian(cls, center=0.0, width=1.0):
        """exp(-((x - center) / width)^2)"""
        if width <= 0:
            raise InvalidArgumentError(f'Gaussian width must be positive, got {width!r}.', code='invalid_profile')
        return cls('gaussian', (float(center), float(width)))

    @classmethod
    def poly_bump(cls):
        """s^2 (1 - s)^2 with s = x / L."""
        return cls('poly_bump')

    @classmethod
    def indicator(cls, a, b):
        if not a < b:
            raise InvalidArgumentError(f'Indicator requires a < b, got a={a!r}, b={b!r}.', code='invalid_interval')
        return cls('indicator', (float(a), float(b)))

    @classmethod
    def sine_mode(cls, j):
        return cls('sine_mode', (validate_positive_count(j, name='j'),))

    @classmethod
    def coefficients(cls, values):
        values = tuple(float(v) for v in values)
        if not values:
            raise InvalidArgumentError('Coefficient profile needs at least one value.', code='invalid_profile')
        return cls('coefficients', values)

    @classmethod
    def table(cls, xs, vs):
        xs = tuple(float(x) for x in xs)
        vs = tuple(float(v) for v in vs)
        if len(xs) != len(vs) or len(xs) < 2:
            raise InvalidArgumentError('Sampled table needs at least two (x, value) pairs.', code='invalid_profile')
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise InvalidArgumentError('Sampled table positions must be strictly increasing.', code='invalid_profile')
        return cls('table', xs + vs)

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------
    @property
    def table_points(self):
        half = len(self.params) // 2
        return np.asarray(self.params[:half]), np.asarray(self.params[half:])

    def breakpoints(self, L):
        """Interior points where the profile is not smooth; quadrature panels must align to them."""
        if self.kind == 'indicator':
            points = self.params
        elif self.kind == 'table':
            points = tuple(self.table_points[0])
        else:
            return ()
        return tuple(sorted({p for p in points if 0.0 < p < L}))

    def validate(self, L):
        if self.kind not in PROFILE_KINDS:
            raise InvalidArgumentError(f'Unknown profile kind {self.kind!r}.', code='invalid_profile')
        if self.kind == 'indicator':
            validate_interval(self.params[0], self.params[1], L)
        return self

    def evaluate(self, x, L, basis=None):
        """Sample the profile at positions x for a domain of length L."""
        x = np.asarray(x, dtype=float)
        if self.kind == 'gaussian':
            center, width = self.params
            return np.exp(-((x - center) / width) ** 2)
        if self.kind == 'indicator':
            a, b = self.params
            return np.where((x >= a) & (x <= b), 1.0, 0.0)
        if self.kind == 'table':
            xs, vs = self.table_points
            return np.interp(x, xs, vs)
        if self.kind == 'coefficients':
            if basis is None:
                raise InvalidArgumentError(
                    'Coefficient profiles can only be sampled against an eigenbasis.',
                    code='basis_required'
                )
            coeffs = self.coefficient_vector(basis.n)
            return basis.evaluate_all(x) @ coeffs
        return self.derivative(x, L, 0)

    def derivative(self, x, L, order):
        """Analytic derivative of order 0..4 (sine_mode and poly_bump only)."""
        if self.kind not in ANALYTIC_KINDS:
            raise InvalidArgumentError(
                f'Analytic derivatives are only available for {", ".join(ANALYTIC_KINDS)}, not {self.kind!r}.',
                code='unsupported_profile'
            )
        if not 0 <= order <= 4:
            raise InvalidArgumentError(f'Derivative order must be in 0..4, got {order!r}.', code='invalid_derivative')

        x = np.asarray(x, dtype=float)
        if self.kind == 'sine_mode':
            (j,) = self.params
            k = j * math.pi / L
            amplitude = math.sqrt(2.0 / L) * k ** order
            # d^order/dx^order sin(kx) = sin(kx + order * pi / 2)
            phase = order % 4
            if phase == 0:
                return amplitude * np.sin(k * x)
            if phase == 1:
                return amplitude * np.cos(k * x)
            if phase == 2:
                return -amplitude * np.sin(k * x)
            return -amplitude * np.cos(k * x)

        s = x / L
        polys = (
            s ** 2 - 2.0 * s ** 3 + s ** 4,
            2.0 * s - 6.0 * s ** 2 + 4.0 * s ** 3,
            2.0 - 12.0 * s + 12.0 * s ** 2,
            -12.0 + 24.0 * s,
            np.full_like(s, 24.0),
        )
        return polys[order] / L ** order

    def coefficient_vector(self, n):
        """Explicit coefficients padded with zeros or truncated to n."""
        coeffs = np.zeros(n)
        given = np.asarray(self.params[:n], dtype=float)
        coeffs[:given.size] = given
        return coeffs

    def describe(self):
        if self.kind == 'table':
            xs, vs = self.table_points
            return 'table ' + ' '.join(f'{x:g}:{v:g}' for x, v in zip(xs, vs))
        return ' '.join([self.kind] + [f'{p:g}' for p in self.params])
