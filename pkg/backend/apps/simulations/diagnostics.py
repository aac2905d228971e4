# FILE: /backend/apps/simulations/diagnostics.py
"""
Energy reports, audits of the discrete energy laws, the Gronwall separation
bound, the Galerkin Cauchy ladder and profile shape metrics.

Audit records are plain values; writing them is the writers' job.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from backend.apps.spectral.operators import double_well
from backend.apps.spectral.utils.eigenbasis import build_basis
from backend.apps.spectral.utils.quadrature import default_rule, gauss_rule, project, reconstruct
from backend.core.conf import solver_setting
from backend.core.exceptions import InvalidArgumentError

from .integrator import integrate_with_halving

logger = logging.getLogger(__name__)

# Below this biharmonic coefficient EFK transition layers lose their oscillatory character.
GAMMA_CRITICAL = 0.125

PARSEVAL_TOLERANCE = 1e-8


def is_oscillatory_regime(gamma):
    return gamma > GAMMA_CRITICAL


@dataclass(frozen=True)
class EnergyReport:
    t: float
    l2: float
    vnorm_sq: float
    l4_4: float
    potential: float
    energy: float
    dissipation_cum: float
    vnorm_cum: float = 0.0
    l4_cum: float = 0.0
    l2_cum: float = 0.0


@dataclass(frozen=True)
class AuditRecord:
    check: str
    lhs: float
    rhs: float
    margin: float
    passed: bool
    enforced: bool = True
    detail: str = ''


@dataclass(frozen=True)
class SeparationRecord(AuditRecord):
    realized_ratio: float = 0.0


@dataclass(frozen=True)
class OvershootMetric:
    amplitude: float
    oscillations: int


@dataclass
class ConvergenceTable:
    rows: list = field(default_factory=list)

    @property
    def differences(self):
        return [d for _, d in self.rows]

    @property
    def strictly_decreasing(self):
        d = self.differences
        return all(b < a for a, b in zip(d, d[1:]))


def energy_report(basis, rule, state, ops, dissipation_cum=0.0, vnorm_cum=0.0, l4_cum=0.0, l2_cum=0.0):
    """Norms of u_n + g by quadrature at the state's time."""
    spec = ops.spec
    c = state.c
    u = ops.field_at_nodes(c)
    slope = ops.slopes_at_nodes @ c
    if ops.lifting_at_nodes is not None:
        slope = slope + spec.lifting_slope
    weights = rule.weights

    l2_sq = float(weights @ (u * u))
    gradient_sq = float(weights @ (slope * slope))
    if spec.m == 1:
        vnorm_sq = gradient_sq
    else:
        curvature = ops.curvatures_at_nodes @ c
        vnorm_sq = spec.gamma * float(weights @ (curvature * curvature)) + spec.beta * gradient_sq
    l4_4 = float(weights @ u ** 4)
    potential = float(weights @ double_well(u))
    energy = 0.5 * vnorm_sq + (potential if spec.reaction else 0.0)

    if ops.lifting_at_nodes is None:
        parseval = float(c @ c)
        if abs(l2_sq - parseval) > PARSEVAL_TOLERANCE * max(parseval, 1e-300):
            logger.warning(f'Parseval mismatch at t={state.t:g}: quadrature {l2_sq:.12g} vs coefficients {parseval:.12g}')

    return EnergyReport(
        t=float(state.t),
        l2=math.sqrt(l2_sq),
        vnorm_sq=vnorm_sq,
        l4_4=l4_4,
        potential=potential,
        energy=energy,
        dissipation_cum=float(dissipation_cum),
        vnorm_cum=float(vnorm_cum),
        l4_cum=float(l4_cum),
        l2_cum=float(l2_cum),
    )


def _require_unforced(traj, audit):
    if not traj.spec.forcing.is_zero:
        raise InvalidArgumentError(f'{audit} is defined for forcing-free runs only.', code='forced_run')


def smooth_energy_audit(traj, slack=None):
    """
    dissipation_cum(t_k) + energy(t_k) <= energy(0) + slack for every stored t_k.
    Reports the worst time.
    """
    _require_unforced(traj, 'smooth_energy_audit')
    if slack is None:
        slack = solver_setting('SOLVER_AUDIT_SLACK', 1e-6)

    initial = traj.reports[0].energy
    totals = np.array([report.dissipation_cum + report.energy for report in traj.reports])
    worst = int(np.argmax(totals - initial))
    lhs, rhs = float(totals[worst]), initial + slack
    margin = rhs - lhs
    record = AuditRecord(
        check='smooth_energy_law',
        lhs=lhs,
        rhs=rhs,
        margin=margin,
        passed=margin >= 0,
        detail=f'max violation {float(totals[worst]) - initial:.3e} at t={traj.reports[worst].t:g}',
    )
    _log_record(record)
    return record


def energy_monotonicity(traj, tolerance=None):
    """energy(t_k) non-increasing within tolerance over the stored snapshots."""
    if tolerance is None:
        tolerance = solver_setting('SOLVER_ENERGY_TOLERANCE', 1e-9)
    energies = np.array([report.energy for report in traj.reports])
    increase = float(np.max(np.diff(energies))) if energies.size > 1 else 0.0
    increase = max(increase, 0.0)
    record = AuditRecord(
        check='energy_monotone',
        lhs=increase,
        rhs=tolerance,
        margin=tolerance - increase,
        passed=increase <= tolerance,
    )
    _log_record(record)
    return record


def _require_homogeneous(traj, audit):
    _require_unforced(traj, audit)
    if traj.spec.has_lifting:
        raise InvalidArgumentError(f'{audit} needs homogeneous boundary values.', code='lifted_run')


def rough_energy_audit(traj, slack=None):
    """
    Integrated estimate obtained by testing with u_n, all sums at right endpoints:
        1/2 |u(T)|^2 + sum tau (|u|_V^2 + |u|_4^4) <= 1/2 |u(0)|^2 + sum tau |u|^2
    Without the reaction term both quartic and L2 sums drop out.
    """
    _require_homogeneous(traj, 'rough_energy_audit')
    if slack is None:
        slack = solver_setting('SOLVER_AUDIT_SLACK', 1e-6)

    first, last = traj.reports[0], traj.reports[-1]
    reaction = traj.spec.reaction
    lhs = 0.5 * last.l2 ** 2 + last.vnorm_cum + (last.l4_cum if reaction else 0.0)
    rhs = 0.5 * first.l2 ** 2 + (last.l2_cum if reaction else 0.0)
    margin = rhs - lhs
    record = AuditRecord(
        check='rough_energy_bound',
        lhs=lhs,
        rhs=rhs,
        margin=margin,
        passed=margin >= -slack,
        detail=f'integral |u|_V^2 dt = {last.vnorm_cum:.6g}; integral |u|^2 dt = {last.l2_cum:.6g}',
    )
    _log_record(record)
    return record


def rough_energy_young_audit(traj, epsilon=0.5, eta=0.5):
    """
    The same estimate with |u|^2 <= eta/2 |u|_4^4 + L/(2 eta) folded in:
        1/2 |u(T)|^2 + sum tau (|u|_V^2 + (1 - eta/2) |u|_4^4)
            <= 1/2 |u(0)|^2 + T L / (2 eta)
    epsilon only weighs the forcing term, which vanishes here.
    """
    _require_homogeneous(traj, 'rough_energy_young_audit')

    first, last = traj.reports[0], traj.reports[-1]
    lhs = 0.5 * last.l2 ** 2 + last.vnorm_cum + (1.0 - 0.5 * eta) * last.l4_cum
    rhs = 0.5 * first.l2 ** 2 + last.t * traj.spec.L / (2.0 * eta)
    margin = rhs - lhs
    record = AuditRecord(
        check='rough_energy_bound_young',
        lhs=lhs,
        rhs=rhs,
        margin=margin,
        passed=margin > 0,
        detail=f'epsilon={epsilon:g} eta={eta:g}',
    )
    _log_record(record)
    return record


def gronwall_separation(traj_a, traj_b, slack=None):
    """|z_k|^2 <= |z_0|^2 exp(2 t_k) (1 + slack) with z_k = c_a^k - c_b^k."""
    if slack is None:
        slack = solver_setting('SOLVER_GRONWALL_SLACK', 0.05)
    if traj_a.n != traj_b.n or traj_a.scheme != traj_b.scheme:
        raise InvalidArgumentError('Trajectories use different discretizations.', code='discretization_mismatch')
    spec_a, spec_b = traj_a.spec, traj_b.spec
    if spec_a.with_changes(u0=spec_b.u0) != spec_b:
        raise InvalidArgumentError('Trajectories solve different problems.', code='problem_mismatch')
    times_a, times_b = traj_a.times, traj_b.times
    if times_a.shape != times_b.shape or not np.allclose(times_a, times_b, rtol=0.0, atol=1e-12):
        raise InvalidArgumentError('Trajectories were stored at different times.', code='time_mismatch')

    z_sq = np.array([float(np.sum((a.c - b.c) ** 2)) for a, b in zip(traj_a.snapshots, traj_b.snapshots)])
    bound = z_sq[0] * np.exp(2.0 * times_a) * (1.0 + slack)
    margins = bound - z_sq
    worst = int(np.argmin(margins))
    realized = math.sqrt(z_sq[-1] / z_sq[0]) if z_sq[0] > 0 else 0.0
    record = SeparationRecord(
        check='gronwall_bound',
        lhs=float(z_sq[worst]),
        rhs=float(bound[worst]),
        margin=float(margins[worst]),
        passed=bool(margins[worst] >= 0),
        detail=f'|z(T)|/|z(0)| = {realized:.6g}, exp(T) = {math.exp(times_a[-1]):.6g}',
        realized_ratio=realized,
    )
    _log_record(record)
    return record


def cauchy_ladder(spec, scheme, n_list, run=None):
    """
    Runs the problem at each basis size and reports
    d_i = max_k |u_{n_{i+1}}(t_k) - u_{n_i}(t_k)| on a common fine Gauss grid.
    """
    n_list = list(n_list)
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise InvalidArgumentError('n_list must be strictly ascending.', code='invalid_ladder')
    run = run or _run_at_size

    trajectories = [run(spec, scheme, n) for n in n_list]
    fine = gauss_rule(spec.L, panels=max(4 * n_list[-1], 32), points_per_panel=8)

    table = ConvergenceTable()
    for coarse, refined in zip(trajectories, trajectories[1:]):
        common = _common_times(coarse.times, refined.times)
        difference = 0.0
        for i, j in common:
            u_coarse = reconstruct(coarse.basis, coarse.snapshots[i].c, fine.nodes)
            u_refined = reconstruct(refined.basis, refined.snapshots[j].c, fine.nodes)
            difference = max(difference, math.sqrt(fine.integrate((u_refined - u_coarse) ** 2)))
        table.rows.append((coarse.n, difference))
        logger.info(f'Cauchy ladder n={coarse.n}->{refined.n}: d={difference:.6e}')
    return table


def _run_at_size(spec, scheme, n):
    basis = build_basis(spec.m, spec.L, n)
    rule = default_rule(spec.L, n, breakpoints=spec.u0.breakpoints(spec.L))
    return integrate_with_halving(basis, rule, spec, scheme)


def _common_times(times_a, times_b):
    pairs = []
    for i, t in enumerate(times_a):
        matches = np.flatnonzero(np.abs(times_b - t) <= 1e-9 * max(1.0, abs(t)))
        if matches.size:
            pairs.append((i, int(matches[0])))
    return pairs


def overshoot_metric(values, lo, hi):
    """
    Excursion outside [lo, hi] plus the number of sign changes of the discrete
    derivative (zero differences are skipped).
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return OvershootMetric(amplitude=0.0, oscillations=0)
    amplitude = max(0.0, float(values.max()) - hi) + max(0.0, lo - float(values.min()))
    slopes = np.sign(np.diff(values))
    slopes = slopes[slopes != 0]
    oscillations = int(np.count_nonzero(slopes[1:] != slopes[:-1]))
    return OvershootMetric(amplitude=amplitude, oscillations=oscillations)


def oscillations_near(values, level=0.0, band=0.5, flat=1e-9):
    """
    Sign changes of the discrete derivative while the profile stays within band
    of level. Differences below flat * max|values| count as zero and are skipped;
    leaving the band breaks the chain.
    """
    values = np.asarray(values, dtype=float)
    if values.size < 3:
        return 0
    threshold = flat * float(np.max(np.abs(values)))
    slopes = np.diff(values)
    signs = np.where(np.abs(slopes) > threshold, np.sign(slopes), 0.0)
    inside = np.abs(0.5 * (values[1:] + values[:-1]) - level) < band

    count, previous = 0, 0.0
    for sign, near in zip(signs, inside):
        if not near:
            previous = 0.0
            continue
        if sign == 0.0:
            continue
        if previous and sign != previous:
            count += 1
        previous = sign
    return count


def manufactured_error(traj):
    """max_k |c^k - pi_n u_ex(t_k)|, i.e. the L2 error against the projected exact solution."""
    forcing = traj.spec.forcing
    if forcing.is_zero:
        raise InvalidArgumentError('manufactured_error needs a manufactured run.', code='unforced_run')
    reference = project(traj.basis, traj.rule, forcing.reference)
    errors = [
        float(np.linalg.norm(state.c - math.exp(-forcing.rate * state.t) * reference))
        for state in traj.snapshots
    ]
    return max(errors)


@dataclass(frozen=True)
class RegularitySummary:
    sup_l2: float
    sup_vnorm_sq: float
    vnorm_integral: float
    l4_integral: float
    first_finite_vnorm_time: float

    def records(self):
        values = (
            ('sup_l2', self.sup_l2),
            ('sup_vnorm_sq', self.sup_vnorm_sq),
            ('vnorm_sq_time_integral', self.vnorm_integral),
            ('l4_4_time_integral', self.l4_integral),
            ('first_finite_vnorm_time', self.first_finite_vnorm_time),
        )
        return [
            AuditRecord(check=f'regularity_{name}', lhs=value, rhs=math.inf, margin=math.inf,
                        passed=math.isfinite(value), enforced=False)
            for name, value in values
        ]


def regularity_summary(traj):
    """Sup-in-time and time-integrated norms; sup is a max over snapshots only."""
    reports = traj.reports
    later = [report.t for report in reports[1:] if math.isfinite(report.vnorm_sq)]
    return RegularitySummary(
        sup_l2=max(report.l2 for report in reports),
        sup_vnorm_sq=max(report.vnorm_sq for report in reports),
        vnorm_integral=reports[-1].vnorm_cum,
        l4_integral=reports[-1].l4_cum,
        first_finite_vnorm_time=later[0] if later else 0.0,
    )


def _log_record(record):
    if record.passed:
        logger.info(f'{record.check}: pass (margin {record.margin:.3e})')
    else:
        logger.warning(f'{record.check}: FAIL (margin {record.margin:.3e}) {record.detail}')
