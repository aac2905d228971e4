# FILE: /backend/apps/spectral/utils/eigenbasis.py
"""
Orthonormal eigenbases of the m-harmonic operator on (0, L).

m = 1: Dirichlet sine modes w_j = sqrt(2/L) sin(j pi x / L), lambda_j = (j pi / L)^2.
m = 2: clamped beam modes (u = u' = 0 at both ends), lambda_j = (kappa_j / L)^4
       where kappa_j solves cos(kappa) cosh(kappa) = 1.

Beam modes are evaluated in an exponentially decomposed form so that no
cosh/sinh of a large argument is ever differenced.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from backend.core.exceptions import InternalError, InvalidArgumentError
from backend.core.validators import validate_positive_count, validate_positive_length

from .quadrature import gauss_rule

logger = logging.getLogger(__name__)

ROOT_RESIDUAL_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SineMode:
    frequency: float
    amplitude: float


@dataclass(frozen=True)
class BeamMode:
    kappa: float
    wavenumber: float
    sigma: float
    # coefficients of e^{-kx} and e^{-k(L-x)} in the decomposed mode shape
    left_decay: float
    right_decay: float
    nu: float


@dataclass(frozen=True, eq=False)
class Eigenbasis:
    m: int
    L: float
    n: int
    lambdas: np.ndarray
    mode_params: tuple

    @property
    def kappas(self):
        """Dimensionless wavenumbers k_j L (j pi for the sine basis)."""
        if self.m == 1:
            return np.array([mode.frequency * self.L for mode in self.mode_params])
        return np.array([mode.kappa for mode in self.mode_params])

    def evaluate_all(self, x, deriv=0):
        """Matrix of w_j^(deriv)(x_q): one row per position, one column per mode."""
        if deriv not in (0, 1, 2):
            raise InvalidArgumentError(f'Derivative order must be 0, 1 or 2, got {deriv!r}.', code='invalid_derivative')
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.size and (x.min() < 0.0 or x.max() > self.L):
            raise InvalidArgumentError(
                f'Evaluation points must lie in [0, {self.L:g}], got range [{x.min():g}, {x.max():g}].',
                code='outside_domain'
            )
        if self.m == 1:
            return BasisEvaluator.sine_values(self, x, deriv)
        return BasisEvaluator.beam_values(self, x, deriv)

    def evaluate(self, j, x, deriv=0):
        if not 1 <= j <= self.n:
            raise InvalidArgumentError(f'Mode index must be in 1..{self.n}, got {j!r}.', code='invalid_mode')
        values = self.evaluate_all(x, deriv)[:, j - 1]
        return float(values[0]) if np.ndim(x) == 0 else values

    def eigenresidual(self):
        """|cos(kappa_j) - sech(kappa_j)| per beam mode; zeros for the sine basis."""
        if self.m == 1:
            return np.zeros(self.n)
        return np.abs(np.array([_beam_characteristic(mode.kappa) for mode in self.mode_params]))

    def eigen_table(self):
        """Rows (j, lambda_j, kappa_j) for inspection dumps."""
        return [(j, float(lam), float(kappa)) for j, (lam, kappa) in enumerate(zip(self.lambdas, self.kappas), start=1)]


class BasisEvaluator:
    """Vectorised mode-shape evaluation, analytic in x."""

    @staticmethod
    def sine_values(basis, x, deriv):
        k = np.array([mode.frequency for mode in basis.mode_params])
        amplitude = basis.mode_params[0].amplitude
        phase = np.outer(x, k)
        if deriv == 0:
            return amplitude * np.sin(phase)
        if deriv == 1:
            return amplitude * k * np.cos(phase)
        return -amplitude * k ** 2 * np.sin(phase)

    @staticmethod
    def beam_values(basis, x, deriv):
        params = basis.mode_params
        k = np.array([mode.wavenumber for mode in params])
        sigma = np.array([mode.sigma for mode in params])
        left = np.array([mode.left_decay for mode in params])
        right = np.array([mode.right_decay for mode in params])
        nu = np.array([mode.nu for mode in params])
        return nu * BasisEvaluator.raw_beam(x, basis.L, k, sigma, left, right, deriv)

    @staticmethod
    def raw_beam(x, L, k, sigma, left, right, deriv):
        """
        Unnormalised W(x) = cosh(kx) - cos(kx) - sigma (sinh(kx) - sin(kx)) and its
        first two derivatives, written as
        left e^{-kx} + right e^{-k(L-x)} - cos(kx) + sigma sin(kx).
        """
        xi = np.outer(x, k)
        decay_left = left * np.exp(-xi)
        decay_right = right * np.exp(-np.outer(L - x, k))
        cos_xi, sin_xi = np.cos(xi), np.sin(xi)
        if deriv == 0:
            return decay_left + decay_right - cos_xi + sigma * sin_xi
        if deriv == 1:
            return k * (-decay_left + decay_right + sin_xi + sigma * cos_xi)
        return k ** 2 * (decay_left + decay_right + cos_xi - sigma * sin_xi)


def _sech(kappa):
    return 2.0 * math.exp(-kappa) / (1.0 + math.exp(-2.0 * kappa))


def _beam_characteristic(kappa):
    """cos(kappa) cosh(kappa) = 1 rewritten as cos(kappa) - sech(kappa) = 0."""
    return math.cos(kappa) - _sech(kappa)


def sine_basis(L, n):
    """Dirichlet eigenbasis of -d2/dx2 on (0, L)."""
    L = validate_positive_length(L)
    n = validate_positive_count(n)
    amplitude = math.sqrt(2.0 / L)
    modes = tuple(SineMode(frequency=j * math.pi / L, amplitude=amplitude) for j in range(1, n + 1))
    lambdas = np.array([mode.frequency ** 2 for mode in modes])
    lambdas.flags.writeable = False
    logger.debug(f'Built sine basis n={n} L={L:g}')
    return Eigenbasis(m=1, L=float(L), n=n, lambdas=lambdas, mode_params=modes)


def beam_roots(n):
    """First n positive roots of cos(kappa) cosh(kappa) = 1."""
    n = validate_positive_count(n)
    roots = []
    for j in range(1, n + 1):
        # exactly one root per (j pi, (j + 1) pi): cos is monotone there and sech is tiny
        lower, upper = j * math.pi, (j + 1) * math.pi
        f_lower, f_upper = _beam_characteristic(lower), _beam_characteristic(upper)
        if f_lower * f_upper > 0:
            raise InternalError(
                f'Beam root {j} not bracketed in ({lower:.6f}, {upper:.6f}).',
                code='root_not_bracketed'
            )
        kappa = brentq(_beam_characteristic, lower, upper, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        residual = abs(_beam_characteristic(kappa))
        if residual >= ROOT_RESIDUAL_TOLERANCE:
            raise InternalError(f'Beam root {j} residual {residual:.3e} too large.', code='root_not_converged')
        roots.append(kappa)
    return roots


def _beam_mode_coefficients(kappa):
    """sigma and the two decay coefficients, all computed without exp(+kappa)."""
    e1 = math.exp(-kappa)
    e2 = e1 * e1
    denominator = 1.0 - e2 - 2.0 * math.sin(kappa) * e1
    sigma = (1.0 + e2 - 2.0 * math.cos(kappa) * e1) / denominator
    left = 0.5 * (1.0 + sigma)
    right = (math.cos(kappa) - math.sin(kappa) - e1) / denominator
    return sigma, left, right


def beam_basis(L, n):
    """Clamped eigenbasis of d4/dx4 on (0, L), normalised in L2."""
    L = validate_positive_length(L)
    n = validate_positive_count(n)
    kappas = beam_roots(n)

    # high-order rule used only to fix the normalisation constants
    rule = gauss_rule(L, panels=max(4 * n, 32), points_per_panel=16)
    modes = []
    for kappa in kappas:
        k = kappa / L
        sigma, left, right = _beam_mode_coefficients(kappa)
        raw = BasisEvaluator.raw_beam(rule.nodes, L, np.array([k]), sigma, left, right, 0)[:, 0]
        nu = 1.0 / math.sqrt(rule.integrate(raw * raw))
        modes.append(BeamMode(kappa=kappa, wavenumber=k, sigma=sigma, left_decay=left, right_decay=right, nu=nu))

    lambdas = np.array([mode.wavenumber ** 4 for mode in modes])
    lambdas.flags.writeable = False
    logger.debug(f'Built clamped beam basis n={n} L={L:g} (kappa_n={kappas[-1]:.6f})')
    return Eigenbasis(m=2, L=float(L), n=n, lambdas=lambdas, mode_params=tuple(modes))


def build_basis(m, L, n):
    if m == 1:
        return sine_basis(L, n)
    if m == 2:
        return beam_basis(L, n)
    raise InvalidArgumentError(f'Operator order m must be 1 or 2, got {m!r}.', code='invalid_order')


def evaluate(basis, j, x, deriv=0):
    """Value of w_j^(deriv)(x)."""
    return basis.evaluate(j, x, deriv)
