# FILE: /backend/apps/simulations/utils/finite_difference.py
"""
Brute-force finite-difference oracle on a uniform grid.

Centered second differences for -u'' and a five-point fourth difference whose
ghost values enforce u = u' = 0 (u_{-1} = u_1), stepped with the same IMEX
Euler splitting as the spectral solver: linear part implicit, phi explicit.
"""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from backend.apps.spectral.operators import manufactured_samples, phi
from backend.apps.spectral.utils.eigenbasis import build_basis
from backend.core.exceptions import BlowUpError, InvalidArgumentError
from backend.core.validators import validate_positive_count, validate_time_step

from ..integrator import time_grid

logger = logging.getLogger(__name__)

MIN_INTERIOR_POINTS = 8


@dataclass(frozen=True, eq=False)
class SampledTrajectory:
    x: np.ndarray
    times: np.ndarray
    values: tuple

    def at(self, t):
        index = int(np.argmin(np.abs(self.times - t)))
        return self.values[index]


class FiniteDifferenceOperators:

    @staticmethod
    def second_difference(size, h):
        """-u'' with homogeneous Dirichlet values folded out."""
        ones = np.ones(size)
        return sp.diags([-ones[1:], 2.0 * ones, -ones[1:]], [-1, 0, 1], format='csc') / h ** 2

    @staticmethod
    def clamped_fourth_difference(size, h):
        """u'''' with u = 0 on the boundary nodes and ghost values u_{-1} = u_1."""
        ones = np.ones(size)
        main = 6.0 * ones
        main[0] = main[-1] = 7.0
        matrix = sp.diags(
            [ones[2:], -4.0 * ones[1:], main, -4.0 * ones[1:], ones[2:]],
            [-2, -1, 0, 1, 2],
            format='csc',
        )
        return matrix / h ** 4


def fd_oracle(spec, grid_points, tau, store_every=1):
    """
    Nodal snapshots of the FD solution at multiples of store_every steps and at T.
    grid_points counts all nodes including both boundary nodes.
    """
    validate_positive_count(grid_points, name='grid_points')
    interior = grid_points - 2
    if interior < MIN_INTERIOR_POINTS:
        raise InvalidArgumentError(
            f'Grid too coarse: {interior} interior points (need at least {MIN_INTERIOR_POINTS}).',
            code='grid_too_coarse'
        )
    validate_time_step(tau, spec.T)

    x = np.linspace(0.0, spec.L, grid_points)
    h = x[1] - x[0]
    inner = x[1:-1]

    if spec.m == 1:
        stiffness = FiniteDifferenceOperators.second_difference(interior, h)
        boundary = np.zeros(interior)
        boundary[0] = spec.bc_left / h ** 2
        boundary[-1] = spec.bc_right / h ** 2
    else:
        stiffness = spec.gamma * FiniteDifferenceOperators.clamped_fourth_difference(interior, h)
        if spec.beta:
            stiffness = stiffness + spec.beta * FiniteDifferenceOperators.second_difference(interior, h)
        boundary = np.zeros(interior)

    solver = splu((sp.identity(interior, format='csc') + tau * stiffness).tocsc())
    last_solver = None

    u = _initial_values(spec, inner)
    u_left, u_right = (spec.bc_left, spec.bc_right) if spec.m == 1 else (0.0, 0.0)

    def full(values):
        return np.concatenate(([u_left], values, [u_right]))

    times, snapshots = [0.0], [full(u)]
    sizes = time_grid(spec.T, tau)
    t = 0.0
    for index, step in enumerate(sizes, start=1):
        if step != tau:
            last_solver = last_solver or splu((sp.identity(interior, format='csc') + step * stiffness).tocsc())
            active = last_solver
        else:
            active = solver
        t_next = spec.T if index == len(sizes) else t + step
        rhs = u + step * (boundary + _forcing_at(spec, inner, t_next))
        if spec.reaction:
            rhs = rhs - step * phi(u)
        u = active.solve(rhs)
        if not np.all(np.isfinite(u)):
            raise BlowUpError(t=t_next, max_abs=np.inf)
        t = t_next
        if index % store_every == 0 or index == len(sizes):
            times.append(t)
            snapshots.append(full(u))

    logger.debug(f'FD oracle finished: {grid_points} points, {len(sizes)} steps')
    return SampledTrajectory(x=x, times=np.array(times), values=tuple(snapshots))


def _initial_values(spec, nodes):
    profile = spec.u0
    if profile.kind == 'coefficients':
        basis = build_basis(spec.m, spec.L, len(profile.params))
        return profile.evaluate(nodes, spec.L, basis=basis)
    return profile.evaluate(nodes, spec.L)


def _forcing_at(spec, nodes, t):
    if spec.forcing.is_zero:
        return 0.0
    return manufactured_samples(spec, nodes, t)
