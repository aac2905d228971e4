# FILE: /backend/apps/spectral/utils/quadrature.py
"""
Composite Gauss-Legendre quadrature on (0, L).

All L2 inner products of the solver go through a QuadratureRule: the
orthogonal projection onto the span of the eigenbasis, the nonlinear term and
the norms reported by diagnostics.
"""
import logging
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from backend.core.conf import solver_setting
from backend.core.exceptions import InvalidArgumentError
from backend.core.validators import (
    validate_gauss_points,
    validate_in_domain,
    validate_positive_count,
    validate_positive_length,
)

logger = logging.getLogger(__name__)

# Relative tolerance used to merge panel edges and to match breakpoints.
EDGE_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    L: float
    nodes: np.ndarray
    weights: np.ndarray
    panels: int
    points_per_panel: int
    breakpoints: tuple
    edges: np.ndarray

    def integrate(self, values):
        """Weighted sum of samples taken at the nodes (last axis of values)."""
        return np.asarray(values) @ self.weights

    def inner(self, f_values, g_values):
        return self.integrate(np.asarray(f_values) * np.asarray(g_values))

    def has_edge(self, x):
        return bool(np.any(np.abs(self.edges - x) <= EDGE_TOLERANCE * self.L))


def gauss_rule(L, panels, points_per_panel=8, breakpoints=()):
    """
    Build a composite Gauss rule with `panels` uniform panels, split further so
    that every breakpoint is a panel edge.
    """
    validate_positive_length(L)
    validate_positive_count(panels, name='panels')
    points_per_panel = validate_gauss_points(points_per_panel)

    interior = []
    for point in breakpoints:
        validate_in_domain(point, L, name='breakpoint')
        if 0.0 < point < L:
            interior.append(float(point))

    edges = np.union1d(np.linspace(0.0, L, panels + 1), np.asarray(interior, dtype=float))
    # merge edges that coincide up to rounding (a breakpoint on a uniform edge)
    keep = np.concatenate(([True], np.diff(edges) > EDGE_TOLERANCE * L))
    edges = edges[keep]
    edges[-1] = L

    reference_nodes, reference_weights = leggauss(points_per_panel)
    left, right = edges[:-1], edges[1:]
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    nodes = (mid[:, None] + half[:, None] * reference_nodes[None, :]).ravel()
    weights = (half[:, None] * reference_weights[None, :]).ravel()

    nodes.flags.writeable = False
    weights.flags.writeable = False
    edges.flags.writeable = False
    return QuadratureRule(
        L=float(L),
        nodes=nodes,
        weights=weights,
        panels=int(left.size),
        points_per_panel=points_per_panel,
        breakpoints=tuple(sorted(interior)),
        edges=edges,
    )


def default_rule(L, n, breakpoints=(), panels=None, points_per_panel=None):
    """Module-default rule: 8 points per panel and max(2n, 16) panels unless overridden."""
    if panels is None:
        panels = max(2 * n, solver_setting('SOLVER_MIN_PANELS', 16))
    if points_per_panel is None:
        points_per_panel = solver_setting('SOLVER_GAUSS_POINTS', 8)
    return gauss_rule(L, panels, points_per_panel, breakpoints)


def project(basis, rule, profile, lifting=None):
    """
    Coefficients c_j = (profile - lifting, w_j) for j = 1..n, i.e. the
    L2-orthogonal projection onto the span of the basis.
    """
    if not np.isclose(basis.L, rule.L, rtol=1e-14, atol=0.0):
        raise InvalidArgumentError(
            f'Basis length {basis.L!r} and quadrature length {rule.L!r} differ.',
            code='length_mismatch'
        )
    profile.validate(rule.L)
    for point in profile.breakpoints(rule.L):
        if profile.kind == 'indicator' and not rule.has_edge(point):
            raise InvalidArgumentError(
                f'Indicator jump at x={point:g} is not a quadrature panel edge; '
                f'build the rule with breakpoints={profile.breakpoints(rule.L)}.',
                code='unaligned_breakpoint'
            )

    values_at_nodes = basis.evaluate_all(rule.nodes)
    if profile.kind == 'coefficients':
        coeffs = profile.coefficient_vector(basis.n)
        if lifting is not None:
            coeffs = coeffs - values_at_nodes.T @ (rule.weights * lifting(rule.nodes))
        return coeffs

    samples = profile.evaluate(rule.nodes, rule.L)
    if lifting is not None:
        samples = samples - lifting(rule.nodes)
    return values_at_nodes.T @ (rule.weights * samples)


def project_samples(basis, rule, samples):
    """Projection of a function already sampled at the rule's nodes."""
    return basis.evaluate_all(rule.nodes).T @ (rule.weights * np.asarray(samples))


def reconstruct(basis, coeffs, grid, deriv=0):
    """u_n^(deriv)(x) = sum_j c_j w_j^(deriv)(x) at each grid point."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (basis.n,):
        raise InvalidArgumentError(
            f'Expected {basis.n} coefficients, got shape {coeffs.shape}.',
            code='dimension_mismatch'
        )
    return basis.evaluate_all(grid, deriv) @ coeffs
