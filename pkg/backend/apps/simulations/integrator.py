# FILE: /backend/apps/simulations/integrator.py
"""
Time integration of the Galerkin system dc/dt = -A c - N(c) + F(t).

Two IMEX schemes share one stepper: the stiff linear part is implicit
(Cholesky factors cached per time step), the cubic term explicit.

- imex_euler:    (I + tau A) c+ = c + tau (F(t + tau) - N(c))
- imex_cn_ab2:   (I + tau/2 A) c+ = (I - tau/2 A) c
                                    - tau (3/2 N(c) - 1/2 N(c_prev)) + tau F(t + tau/2)
                 bootstrapped with one imex_euler step.

`integrate_with_halving` is the runner used by scenarios: it retries with a
halved tau on blow-up or on a discrete energy increase, at most
SOLVER_MAX_HALVINGS times.
"""
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from backend.apps.spectral.operators import assemble, forcing_vector, nonlinear_term
from backend.apps.spectral.utils.quadrature import project
from backend.core.conf import solver_setting
from backend.core.exceptions import (
    BlowUpError,
    EnergyIncreaseError,
    InternalError,
    InvalidArgumentError,
)
from backend.core.validators import validate_positive_count, validate_time_step

logger = logging.getLogger(__name__)

SCHEME_KINDS = ('imex_euler', 'imex_cn_ab2')


@dataclass(frozen=True, eq=False)
class SpectralState:
    t: float
    c: np.ndarray
    step_index: int = 0

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        c.flags.writeable = False
        object.__setattr__(self, 'c', c)


@dataclass(frozen=True)
class SchemeSpec:
    tau: float
    kind: str = 'imex_euler'
    store_every: int = 1

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise InvalidArgumentError(
                f'Unknown scheme {self.kind!r}; expected one of {", ".join(SCHEME_KINDS)}.',
                code='invalid_scheme'
            )
        validate_time_step(self.tau)
        validate_positive_count(self.store_every, name='store_every')

    def halved(self):
        return replace(self, tau=0.5 * self.tau, store_every=2 * self.store_every)


@dataclass
class Trajectory:
    """Stored snapshots plus everything diagnostics need about the run."""
    spec: object
    scheme: SchemeSpec
    n: int
    snapshots: list = field(default_factory=list)
    reports: list = field(default_factory=list)
    increments: list = field(default_factory=list)
    step_sizes: list = field(default_factory=list)
    halvings: int = 0
    basis: object = None
    rule: object = None
    ops: object = None

    @property
    def times(self):
        return np.array([state.t for state in self.snapshots])

    @property
    def final_state(self):
        return self.snapshots[-1]

    @property
    def final_tau(self):
        return self.scheme.tau

    @property
    def meta(self):
        return {'spec': self.spec, 'scheme': self.scheme, 'n': self.n}


def init_state(basis, rule, spec):
    """c = projection of (u0 - g) at t = 0."""
    lifting = spec.lifting if spec.has_lifting else None
    return SpectralState(t=0.0, c=project(basis, rule, spec.u0, lifting=lifting), step_index=0)


def _check_finite(c, t):
    if not np.all(np.isfinite(c)):
        finite = c[np.isfinite(c)]
        max_abs = np.inf if finite.size < c.size else float(np.max(np.abs(finite)))
        raise BlowUpError(t=t, max_abs=max_abs)


class ImexStepper:
    """
    Holds the assembled operators and a cache of Cholesky factors of
    (I + theta tau A), keyed by (theta, tau).
    """

    def __init__(self, ops):
        self.ops = ops
        self.identity = np.eye(ops.n)
        self._factors = {}
        self.last_nonlinear = None

    def factor(self, theta, tau):
        key = (theta, tau)
        if key not in self._factors:
            try:
                self._factors[key] = cho_factor(self.identity + theta * tau * self.ops.linear, lower=True)
            except LinAlgError as exc:
                raise InternalError(f'Cholesky factorization failed for tau={tau:g}: {exc}', code='factorization_failed')
            logger.debug(f'Factorized I + {theta:g}*tau*A for tau={tau:g}')
        return self._factors[key]

    def nonlinear(self, c):
        return nonlinear_term(self.ops, c)

    def euler(self, state, tau):
        nonlinear = self.nonlinear(state.c)
        self.last_nonlinear = nonlinear
        t_next = state.t + tau
        rhs = state.c + tau * (forcing_vector(self.ops, self.ops.spec, t_next) - nonlinear)
        _check_finite(rhs, t_next)
        c_next = cho_solve(self.factor(1.0, tau), rhs)
        _check_finite(c_next, t_next)
        return SpectralState(t=t_next, c=c_next, step_index=state.step_index + 1)

    def cn_ab2(self, state, prev_nonlinear, tau, prev_tau=None):
        nonlinear = self.nonlinear(state.c)
        self.last_nonlinear = nonlinear
        # extrapolate N to t + tau/2; reduces to 3/2 N_k - 1/2 N_{k-1} for equal steps
        ratio = 0.5 * tau / (prev_tau if prev_tau is not None else tau)
        extrapolated = (1.0 + ratio) * nonlinear - ratio * prev_nonlinear
        t_next = state.t + tau
        rhs = (
            state.c
            - 0.5 * tau * (self.ops.linear @ state.c)
            - tau * extrapolated
            + tau * forcing_vector(self.ops, self.ops.spec, state.t + 0.5 * tau)
        )
        _check_finite(rhs, t_next)
        c_next = cho_solve(self.factor(0.5, tau), rhs)
        _check_finite(c_next, t_next)
        return SpectralState(t=t_next, c=c_next, step_index=state.step_index + 1)


def imex_euler_step(state, ops, spec, tau, stepper=None):
    """One IMEX Euler step; pass a stepper to reuse its factorization cache."""
    stepper = stepper or ImexStepper(ops)
    return stepper.euler(state, tau)


def imex_cn_ab2_step(state, prev_nonlinear, ops, spec, tau, stepper=None):
    """One Crank-Nicolson / Adams-Bashforth-2 step given N(c^{k-1})."""
    stepper = stepper or ImexStepper(ops)
    return stepper.cn_ab2(state, np.asarray(prev_nonlinear, dtype=float), tau)


def time_grid(T, tau):
    """Uniform steps of size tau with a shortened last step landing exactly on T."""
    if T == 0:
        return []
    steps = max(1, math.ceil(T / tau - 1e-9))
    sizes = [tau] * (steps - 1)
    sizes.append(T - tau * (steps - 1))
    return sizes


def integrate(basis, rule, spec, scheme, observers=(), initial=None, check_energy=None, ops=None):
    """
    Advance from t = 0 to t = T.

    observers are called as observer(state, report) at every stored snapshot.
    With check_energy (default: whenever the forcing is zero) every step must
    satisfy E(c+) <= E(c) + SOLVER_ENERGY_TOLERANCE * max(1, |E(c)|).
    """
    from .diagnostics import energy_report

    validate_time_step(scheme.tau, spec.T)
    ops = ops or assemble(basis, rule, spec)
    stepper = ImexStepper(ops)
    if check_energy is None:
        check_energy = spec.forcing.is_zero
    energy_tolerance = solver_setting('SOLVER_ENERGY_TOLERANCE', 1e-9)

    state = initial if initial is not None else init_state(basis, rule, spec)
    trajectory = Trajectory(spec=spec, scheme=scheme, n=basis.n, basis=basis, rule=rule, ops=ops)

    def store(current, totals):
        report = energy_report(basis, rule, current, ops, *totals)
        trajectory.snapshots.append(current)
        trajectory.reports.append(report)
        for observer in observers:
            observer(current, report)

    dissipation = vnorm_cum = l4_cum = l2_cum = 0.0
    store(state, (dissipation, vnorm_cum, l4_cum, l2_cum))
    energy = ops.energy(state.c) if check_energy else None

    sizes = time_grid(spec.T, scheme.tau)
    prev_nonlinear, prev_tau = None, None
    for index, tau in enumerate(sizes, start=1):
        if scheme.kind == 'imex_cn_ab2' and prev_nonlinear is not None:
            next_state = stepper.cn_ab2(state, prev_nonlinear, tau, prev_tau)
        else:
            next_state = stepper.euler(state, tau)
        prev_nonlinear, prev_tau = stepper.last_nonlinear, tau

        if index == len(sizes):
            # land exactly on T regardless of accumulated rounding
            next_state = SpectralState(t=float(spec.T), c=next_state.c, step_index=next_state.step_index)

        increment = float(np.linalg.norm(next_state.c - state.c)) / tau
        dissipation += tau * increment ** 2
        vnorm_cum += tau * ops.vnorm_sq(next_state.c)
        l4_cum += tau * ops.l4_4(next_state.c)
        l2_cum += tau * ops.l2_sq(next_state.c)
        trajectory.increments.append(increment)
        trajectory.step_sizes.append(tau)

        if check_energy:
            next_energy = ops.energy(next_state.c)
            allowed = energy_tolerance * max(1.0, abs(energy))
            if next_energy > energy + allowed:
                raise EnergyIncreaseError(t=next_state.t, increase=next_energy - energy)
            energy = next_energy

        state = next_state
        if index % scheme.store_every == 0 or index == len(sizes):
            store(state, (dissipation, vnorm_cum, l4_cum, l2_cum))

    return trajectory


def integrate_with_halving(basis, rule, spec, scheme, observers=(), initial=None, check_energy=None, max_halvings=None):
    """
    integrate(), retried with tau halved on blow-up or energy increase.
    Observers see the accepted attempt only, replayed once it has finished.
    """
    if max_halvings is None:
        max_halvings = solver_setting('SOLVER_MAX_HALVINGS', 8)
    ops = assemble(basis, rule, spec)

    attempt = scheme
    for halvings in range(max_halvings + 1):
        try:
            trajectory = integrate(basis, rule, spec, attempt, initial=initial, check_energy=check_energy, ops=ops)
        except (BlowUpError, EnergyIncreaseError) as exc:
            if halvings == max_halvings:
                logger.error(f'Giving up after {max_halvings} halvings (tau={attempt.tau:g}): {exc.detail}')
                raise
            logger.warning(f'{exc.detail}; retrying with tau={0.5 * attempt.tau:g}')
            attempt = attempt.halved()
            continue
        trajectory.halvings = halvings
        if halvings:
            logger.info(f'Run completed with tau={attempt.tau:g} after {halvings} halving(s)')
        for state, report in zip(trajectory.snapshots, trajectory.reports):
            for observer in observers:
                observer(state, report)
        return trajectory
