# FILE: /backend/apps/spectral/operators.py
"""
Galerkin right-hand side for u_t + (-1)^m D^{2m} u + phi(u) = f on (0, L).

The evolved unknown is the homogeneous remainder v = u - g, where g is the
affine lifting of the boundary values (m = 1 only). Linear part:
    A = diag(lambda)              for m = 1
    A = gamma diag(lambda) + beta B  for m = 2, B_ij = (w_i', w_j')
The cubic term is evaluated pseudo-spectrally at the quadrature nodes.
"""
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from backend.core.exceptions import InvalidArgumentError
from backend.core.validators import (
    validate_non_negative,
    validate_operator_order,
    validate_positive_length,
)

from .profiles import ANALYTIC_KINDS, Profile

logger = logging.getLogger(__name__)


def phi(s):
    """Nonlinearity s^3 - s."""
    return s * s * s - s


def double_well(s):
    """Potential (1 - s^2)^2 / 4, the antiderivative of phi vanishing at +-1."""
    return 0.25 * (1.0 - s * s) ** 2


@dataclass(frozen=True)
class Forcing:
    kind: str = 'zero'
    reference: Profile = None
    rate: float = 0.0

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def manufactured(cls, reference, rate):
        if reference.kind not in ANALYTIC_KINDS:
            raise InvalidArgumentError(
                f'Manufactured forcing needs an analytic reference profile '
                f'({", ".join(ANALYTIC_KINDS)}), got {reference.kind!r}.',
                code='unsupported_profile'
            )
        return cls(kind='manufactured', reference=reference, rate=float(rate))

    @property
    def is_zero(self):
        return self.kind == 'zero'

    def exact_solution(self, x, L, t):
        """u_ex(t, x) = exp(-rate t) * reference(x)."""
        return np.exp(-self.rate * t) * self.reference.evaluate(x, L)

    def describe(self):
        if self.is_zero:
            return 'zero'
        return f'manufactured {self.rate:g} {self.reference.describe()}'


@dataclass(frozen=True)
class ProblemSpec:
    m: int
    L: float
    T: float
    u0: Profile
    gamma: float = 0.0
    beta: float = 1.0
    bc_left: float = 0.0
    bc_right: float = 0.0
    forcing: Forcing = field(default_factory=Forcing.zero)
    reaction: bool = True

    def __post_init__(self):
        validate_operator_order(self.m)
        validate_positive_length(self.L)
        validate_non_negative(self.T, 'T')
        validate_non_negative(self.gamma, 'gamma')
        if self.m == 1:
            # gamma is meaningless and the second-order coefficient is the operator itself
            object.__setattr__(self, 'gamma', 0.0)
            object.__setattr__(self, 'beta', 1.0)
        else:
            if self.beta not in (0, 1):
                raise InvalidArgumentError(f'beta must be 0 or 1, got {self.beta!r}.', code='invalid_beta')
            if self.bc_left != 0 or self.bc_right != 0:
                raise InvalidArgumentError(
                    'Inhomogeneous boundary values are only supported for m = 1.',
                    code='unsupported_lifting'
                )
            if self.gamma == 0 and self.beta == 0:
                raise InvalidArgumentError('gamma and beta cannot both vanish for m = 2.', code='degenerate_operator')
        if not self.forcing.is_zero and self.has_lifting:
            raise InvalidArgumentError(
                'Manufactured forcing requires homogeneous boundary values.',
                code='unsupported_lifting'
            )
        self.u0.validate(self.L)

    @property
    def has_lifting(self):
        return self.bc_left != 0 or self.bc_right != 0

    def lifting(self, x):
        """g(x) = bc_left + (bc_right - bc_left) x / L"""
        x = np.asarray(x, dtype=float)
        return self.bc_left + (self.bc_right - self.bc_left) * x / self.L

    @property
    def lifting_slope(self):
        return (self.bc_right - self.bc_left) / self.L

    def with_changes(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class AssembledOperators:
    spec: ProblemSpec
    stiffness_diag: np.ndarray
    gram_grad: np.ndarray
    linear: np.ndarray
    weights: np.ndarray
    nodes: np.ndarray
    values_at_nodes: np.ndarray
    slopes_at_nodes: np.ndarray
    curvatures_at_nodes: np.ndarray
    lifting_at_nodes: np.ndarray = None

    @property
    def n(self):
        return self.stiffness_diag.size

    def field_at_nodes(self, c):
        """u = v + g at the quadrature nodes."""
        values = self.values_at_nodes @ c
        if self.lifting_at_nodes is not None:
            values = values + self.lifting_at_nodes
        return values

    def potential(self, c):
        """P(c) = integral of the double-well potential of u."""
        return float(self.weights @ double_well(self.field_at_nodes(c)))

    def lifting_energy(self):
        """1/2 |g'|^2 L: the constant Dirichlet energy the lifting adds for m = 1."""
        if self.lifting_at_nodes is None:
            return 0.0
        return 0.5 * self.spec.lifting_slope ** 2 * self.spec.L

    def vnorm_sq(self, c):
        """gamma |u''|^2 + beta |u'|^2 of u = v + g from the assembled linear part."""
        return float(c @ (self.linear @ c)) + 2.0 * self.lifting_energy()

    def l2_sq(self, c):
        return float(self.weights @ self.field_at_nodes(c) ** 2)

    def l4_4(self, c):
        return float(self.weights @ self.field_at_nodes(c) ** 4)

    def energy(self, c):
        """
        Discrete energy 1/2 c.A c + P(c) (+ lifting constant), evaluated in coefficient space.
        Without the reaction term the potential is not part of the dynamics and is left out.
        """
        quadratic = 0.5 * self.vnorm_sq(c)
        if not self.spec.reaction:
            return quadratic
        return quadratic + self.potential(c)


def assemble(basis, rule, spec):
    """Assemble stiffness, gradient Gram matrix and node caches for a problem."""
    if basis.m != spec.m:
        raise InvalidArgumentError(
            f'Basis order m={basis.m} does not match problem order m={spec.m}.',
            code='order_mismatch'
        )
    if not np.isclose(basis.L, spec.L, rtol=1e-14, atol=0.0) or not np.isclose(rule.L, spec.L, rtol=1e-14, atol=0.0):
        raise InvalidArgumentError('Basis, quadrature and problem must share the same L.', code='length_mismatch')

    values = basis.evaluate_all(rule.nodes, 0)
    slopes = basis.evaluate_all(rule.nodes, 1)
    curvatures = basis.evaluate_all(rule.nodes, 2)

    gram = slopes.T @ (rule.weights[:, None] * slopes)
    gram = 0.5 * (gram + gram.T)

    if spec.m == 1:
        stiffness = np.array(basis.lambdas, dtype=float)
        linear = np.diag(stiffness)
    else:
        stiffness = spec.gamma * np.asarray(basis.lambdas, dtype=float)
        linear = np.diag(stiffness) + spec.beta * gram

    lifting = spec.lifting(rule.nodes) if spec.has_lifting else None

    for array in (stiffness, gram, linear, values, slopes, curvatures):
        array.flags.writeable = False
    logger.debug(f'Assembled operators m={spec.m} n={basis.n} panels={rule.panels}')
    return AssembledOperators(
        spec=spec,
        stiffness_diag=stiffness,
        gram_grad=gram,
        linear=linear,
        weights=rule.weights,
        nodes=rule.nodes,
        values_at_nodes=values,
        slopes_at_nodes=slopes,
        curvatures_at_nodes=curvatures,
        lifting_at_nodes=lifting,
    )


def nonlinear_term(ops, c):
    """N_j = (phi(u_n + g), w_j), evaluated at the quadrature nodes."""
    c = np.asarray(c, dtype=float)
    if c.shape != (ops.n,):
        raise InvalidArgumentError(f'Expected {ops.n} coefficients, got shape {c.shape}.', code='dimension_mismatch')
    if not ops.spec.reaction:
        return np.zeros(ops.n)
    return ops.values_at_nodes.T @ (ops.weights * phi(ops.field_at_nodes(c)))


def manufactured_samples(spec, x, t):
    """
    f(t, x) for u_ex = exp(-r t) u_hat:
        f = -r u_ex + L_m u_ex + phi(u_ex),
    where L_m u = -u'' (m = 1) or gamma u'''' - beta u'' (m = 2).
    """
    forcing = spec.forcing
    reference = forcing.reference
    decay = np.exp(-forcing.rate * t)

    u_hat = reference.derivative(x, spec.L, 0)
    second = reference.derivative(x, spec.L, 2)
    if spec.m == 1:
        spatial = -second
    else:
        spatial = spec.gamma * reference.derivative(x, spec.L, 4) - spec.beta * second

    samples = decay * (-forcing.rate * u_hat + spatial)
    if spec.reaction:
        samples = samples + phi(decay * u_hat)
    return samples


def forcing_vector(ops, spec, t):
    """Projection of f(t, .) onto the basis."""
    if spec.forcing.is_zero:
        return np.zeros(ops.n)
    return ops.values_at_nodes.T @ (ops.weights * manufactured_samples(spec, ops.nodes, t))
