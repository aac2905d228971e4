# FILE: backend/apps/simulations/scenarios.py
"""
Named, reproducible runs. Every scenario writes its files under one output
directory and returns a ScenarioResult whose enforced audit rows decide the
process exit code.

Parameter provenance is noted next to each configuration: values marked
"reference" reproduce the classic front/kink experiments, values marked
"chosen" were picked here to keep runs short and stable.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from backend.apps.spectral.operators import Forcing, ProblemSpec
from backend.apps.spectral.profiles import Profile
from backend.apps.spectral.utils.quadrature import project
from backend.core.exceptions import InvalidArgumentError

from .config_parser import RunConfig
from .diagnostics import (
    AuditRecord,
    cauchy_ladder,
    gronwall_separation,
    is_oscillatory_regime,
    manufactured_error,
    oscillations_near,
    overshoot_metric,
)
from .integrator import SchemeSpec, SpectralState, integrate_with_halving
from .services import SimulationService
from .utils.finite_difference import fd_oracle
from .writers import RunPaths, physical_profile, plot_grid, write_audit, write_metadata, write_table

logger = logging.getLogger(__name__)

FRONT_OVERSHOOT_LIMIT = 1e-3
KINK_OVERSHOOT_THRESHOLD = 1e-2
KINK_MIN_OSCILLATIONS = 2
KINK_BAND = 0.5
HEAT_ORDER_TOLERANCE = 0.15
MMS_ORDER_TOLERANCE = 0.2
FD_DISCREPANCY_LIMIT = 1e-2
FD_GRID_POINTS = 400
GRONWALL_PERTURBATION = 1e-6
LADDER = (4, 8, 16, 32)
SWEEP_GAMMAS = (0.1, 0.01, 0.001)
MMS_STEPS = (0.02, 0.01, 0.005)
HEAT_STEPS = (1e-2, 5e-3)
SCHEME_ORDERS = {'imex_euler': 1, 'imex_cn_ab2': 2}


@dataclass
class ScenarioResult:
    name: str
    records: list = field(default_factory=list)
    files: list = field(default_factory=list)
    final_tau: dict = field(default_factory=dict)

    @property
    def failed_checks(self):
        return [record.check for record in self.records if record.enforced and not record.passed]

    @property
    def passed(self):
        return not self.failed_checks

    def summary(self):
        return {
            'scenario': self.name,
            'passed': self.passed,
            'failed_checks': self.failed_checks,
            'final_tau': self.final_tau,
            'checks': [
                {'check': record.check, 'passed': record.passed, 'enforced': record.enforced}
                for record in self.records
            ],
            'files': [str(path) for path in self.files],
        }


@dataclass
class ScenarioContext:
    name: str
    out_dir: Path
    overrides: dict = field(default_factory=dict)

    def accepted(self, allowed=()):
        """Overrides this scenario honours; the rest are logged and dropped."""
        ignored = sorted(key for key, value in self.overrides.items() if value is not None and key not in allowed)
        if ignored:
            logger.warning(f'Scenario {self.name} ignores overrides: {", ".join(ignored)}')
        return {key: value for key, value in self.overrides.items() if key in allowed and value is not None}

    def configure(self, config, allowed=('n', 'tau', 'gamma', 'svg')):
        return config.with_overrides(**self.accepted(allowed))

    def subdir(self, label):
        return self.out_dir / label


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    runner: object
    config: object = None


SCENARIOS = {}


def register(name, description, config=None):
    def decorator(runner):
        SCENARIOS[name] = Scenario(name=name, description=description, runner=runner, config=config)
        return runner
    return decorator


def base_config(name):
    """The full configuration behind a single-run scenario, or None for composite ones."""
    scenario = SCENARIOS.get(name)
    if scenario is None or scenario.config is None:
        return None
    return replace(scenario.config(), scenario=name)


# ----------------------------------------------------------------------
# Base configurations
# ----------------------------------------------------------------------
def fk_front_config(T=10.0, store_every=100):
    # reference: L, u0, boundary values. chosen: T, n, tau
    return RunConfig(
        problem=ProblemSpec(m=1, L=20.0, T=T, u0=Profile.gaussian(0.0, 1.0), bc_left=1.0, bc_right=0.0),
        n=64,
        scheme=SchemeSpec(tau=0.01, store_every=store_every),
        snapshot_every=store_every,
    )


def efk_kink_config(gamma=1.0, T=0.5):
    # reference: gamma, beta, clamped ends, T. chosen: L, u0, n, tau
    # plateau at the stable state u = 1; its edges form kinks oscillating about u = 0
    return RunConfig(
        problem=ProblemSpec(
            m=2, L=30.0, T=T, u0=Profile.table([10.5, 11.0, 19.0, 19.5], [0.0, 1.0, 1.0, 0.0]),
            gamma=gamma, beta=1.0,
        ),
        n=128,
        scheme=SchemeSpec(tau=1e-3, store_every=50),
        snapshot_every=50,
    )


def efk_bump_config():
    # reference: L, gamma, beta, u0. chosen: T, n, tau
    return RunConfig(
        problem=ProblemSpec(m=2, L=1.0, T=0.5, u0=Profile.poly_bump(), gamma=1.0, beta=1.0),
        n=32,
        scheme=SchemeSpec(tau=1e-3, store_every=50),
        snapshot_every=50,
    )


def rough_fk_config():
    # reference: u0, T. chosen: L, n, tau
    return RunConfig(
        problem=ProblemSpec(m=1, L=1.0, T=2.0, u0=Profile.indicator(0.25, 0.75)),
        n=64,
        scheme=SchemeSpec(tau=1e-3, store_every=100),
        snapshot_every=100,
    )


def rough_efk_config():
    # reference: u0. chosen: L, T, n, tau
    return RunConfig(
        problem=ProblemSpec(m=2, L=1.0, T=0.05, u0=Profile.indicator(0.25, 0.75), gamma=1.0, beta=1.0),
        n=32,
        scheme=SchemeSpec(tau=1e-4, store_every=50),
        snapshot_every=50,
    )


def heat_config(kind, tau):
    # chosen: exact solution exp(-t) sin(x) on (0, pi)
    return RunConfig(
        problem=ProblemSpec(m=1, L=math.pi, T=1.0, u0=Profile.sine_mode(1), reaction=False),
        n=4,
        scheme=SchemeSpec(tau=tau, kind=kind),
    )


def mms_cases():
    """(label, problem, n): exact solutions exp(-t) sin and exp(-t) times the clamped bump."""
    sine, bump = Profile.sine_mode(1), Profile.poly_bump()
    return (
        ('m1', ProblemSpec(m=1, L=math.pi, T=1.0, u0=sine, forcing=Forcing.manufactured(sine, 1.0)), 4),
        ('m2', ProblemSpec(m=2, L=4.0, T=1.0, u0=bump, gamma=1.0, beta=0.0,
                           forcing=Forcing.manufactured(bump, 1.0)), 16),
    )


# ----------------------------------------------------------------------
# Checks on finished trajectories
# ----------------------------------------------------------------------
def _final_profile(trajectory, points=None):
    grid = plot_grid(trajectory.spec.L, points)
    return grid, physical_profile(trajectory, trajectory.final_state, grid)


def front_shape_checks(trajectory):
    """Final FK profile: monotone within the overshoot limit, pinned to 1 and 0 at the ends."""
    grid, values = _final_profile(trajectory)
    metric = overshoot_metric(values, 0.0, 1.0)
    endpoint_gap = max(abs(values[0] - 1.0), abs(values[-1]))
    return [
        AuditRecord(
            check='fk_front_monotone',
            lhs=metric.amplitude,
            rhs=FRONT_OVERSHOOT_LIMIT,
            margin=FRONT_OVERSHOOT_LIMIT - metric.amplitude,
            passed=metric.amplitude < FRONT_OVERSHOOT_LIMIT,
            detail=f'{metric.oscillations} slope sign changes',
        ),
        AuditRecord(
            check='fk_front_endpoints',
            lhs=float(endpoint_gap),
            rhs=1e-9,
            margin=1e-9 - float(endpoint_gap),
            passed=endpoint_gap <= 1e-9,
        ),
    ]


def kink_overshoot(trajectory):
    grid, values = _final_profile(trajectory)
    initial = trajectory.spec.u0.evaluate(grid, trajectory.spec.L)
    return overshoot_metric(values, 0.0, float(initial.max()))


def kink_shape_checks(trajectory):
    """Final EFK profile: overshoots [0, max u0] and oscillates about the unstable state u = 0."""
    grid, values = _final_profile(trajectory)
    initial = trajectory.spec.u0.evaluate(grid, trajectory.spec.L)
    metric = overshoot_metric(values, 0.0, float(initial.max()))
    oscillations = oscillations_near(values, level=0.0, band=KINK_BAND)
    return [
        AuditRecord(
            check='efk_kink_overshoot',
            lhs=metric.amplitude,
            rhs=KINK_OVERSHOOT_THRESHOLD,
            margin=metric.amplitude - KINK_OVERSHOOT_THRESHOLD,
            passed=metric.amplitude > KINK_OVERSHOOT_THRESHOLD,
            detail=f'gamma={trajectory.spec.gamma:g}, {metric.oscillations} slope sign changes',
        ),
        AuditRecord(
            check='efk_kink_oscillates_about_zero',
            lhs=float(oscillations),
            rhs=float(KINK_MIN_OSCILLATIONS),
            margin=float(oscillations - KINK_MIN_OSCILLATIONS),
            passed=oscillations >= KINK_MIN_OSCILLATIONS,
            detail=f'slope sign changes where |u| < {KINK_BAND:g}',
        ),
    ]


def vnorm_finite_checks(trajectory):
    later = [report.vnorm_sq for report in trajectory.reports[1:]]
    worst = max(later) if later else 0.0
    return [AuditRecord(
        check='vnorm_finite_after_start',
        lhs=float(worst),
        rhs=math.inf,
        margin=math.inf,
        passed=all(math.isfinite(value) for value in later),
    )]


def _prefixed(records, label):
    return [replace(record, check=f'{label}/{record.check}') for record in records]


def _order_record(check, errors, order, tolerance):
    """Successive error ratios must sit within tolerance of 2**order."""
    target = 2.0 ** order
    ratios = [a / b if b > 0 else math.inf for a, b in zip(errors, errors[1:])]
    deviation = max(abs(ratio / target - 1.0) for ratio in ratios)
    return AuditRecord(
        check=check,
        lhs=deviation,
        rhs=tolerance,
        margin=tolerance - deviation,
        passed=deviation <= tolerance,
        detail='ratios ' + ', '.join(f'{ratio:.4g}' for ratio in ratios),
    ), ratios


# ----------------------------------------------------------------------
# Single-run scenarios
# ----------------------------------------------------------------------
def _single(context, config, checks=()):
    config = context.configure(config)
    outcome = SimulationService.run_config(config, out_dir=context.out_dir, checks=checks, scenario=context.name)
    return ScenarioResult(
        name=context.name,
        records=outcome.records,
        files=outcome.files,
        final_tau={context.name: outcome.trajectory.final_tau},
    )


@register('fk_front', 'Fisher-Kolmogorov front invading u = 0 from the left boundary', config=fk_front_config)
def fk_front(context):
    return _single(context, fk_front_config(), checks=(front_shape_checks,))


@register('efk_kink', 'Extended Fisher-Kolmogorov kinks at the edges of a plateau', config=efk_kink_config)
def efk_kink(context):
    return _single(context, efk_kink_config(), checks=(kink_shape_checks,))


@register('efk_bump', 'Extended Fisher-Kolmogorov flow from the clamped polynomial bump', config=efk_bump_config)
def efk_bump(context):
    return _single(context, efk_bump_config())


@register('rough_fk', 'Second-order flow from indicator data', config=rough_fk_config)
def rough_fk(context):
    return _single(context, rough_fk_config(), checks=(vnorm_finite_checks,))


@register('rough_efk', 'Fourth-order flow from indicator data', config=rough_efk_config)
def rough_efk(context):
    return _single(context, rough_efk_config(), checks=(vnorm_finite_checks,))


# ----------------------------------------------------------------------
# Composite scenarios
# ----------------------------------------------------------------------
@register('gamma_sweep', 'Kink overshoot as the biharmonic coefficient shrinks')
def gamma_sweep(context):
    result = ScenarioResult(name=context.name)
    rows, amplitudes = [], []
    for gamma in SWEEP_GAMMAS:
        label = f'gamma_{gamma:g}'
        config = context.configure(efk_kink_config(gamma=gamma), allowed=('n', 'tau', 'svg'))
        outcome = SimulationService.run_config(config, out_dir=context.subdir(label), scenario=context.name)
        metric = kink_overshoot(outcome.trajectory)
        amplitudes.append(metric.amplitude)
        rows.append((gamma, metric.amplitude, metric.oscillations, is_oscillatory_regime(gamma)))
        result.records.extend(_prefixed(outcome.records, label))
        result.files.extend(outcome.files)
        result.final_tau[label] = outcome.trajectory.final_tau

    gaps = [a - b for a, b in zip(amplitudes, amplitudes[1:])]
    result.records.append(AuditRecord(
        check='gamma_sweep_ordering',
        lhs=float(amplitudes[-1]),
        rhs=float(amplitudes[0]),
        margin=float(min(gaps)),
        passed=all(gap > 0 for gap in gaps),
        detail='overshoot ' + ', '.join(f'{a:.3e}' for a in amplitudes),
    ))
    result.files.append(write_table(
        rows, ['gamma', 'overshoot', 'oscillations', 'oscillatory_regime'], context.out_dir / 'sweep.csv'
    ))
    return result


@register('energy_law', 'Smooth energy law for the front and the kink')
def energy_law(context):
    result = ScenarioResult(name=context.name)
    for label, config in (('fk_front', fk_front_config()), ('efk_kink', efk_kink_config())):
        outcome = SimulationService.run_config(context.configure(config), out_dir=context.subdir(label),
                                               scenario=context.name)
        result.records.extend(_prefixed(outcome.records, label))
        result.files.extend(outcome.files)
        result.final_tau[label] = outcome.trajectory.final_tau
    return result


@register('gronwall', 'Separation of two front runs started 1e-6 apart')
def gronwall(context):
    config = context.configure(fk_front_config(T=2.0, store_every=10))
    reference = SimulationService.simulate(config)

    start = reference.snapshots[0]
    bump = np.zeros(reference.n)
    bump[0] = GRONWALL_PERTURBATION
    perturbed_start = SpectralState(t=0.0, c=start.c + bump)
    # the perturbed run must see exactly the reference time grid
    perturbed = integrate_with_halving(
        reference.basis, reference.rule, reference.spec, reference.scheme,
        initial=perturbed_start, max_halvings=0,
    )
    record = gronwall_separation(reference, perturbed)

    rows = []
    z0 = float(np.linalg.norm(perturbed.snapshots[0].c - start.c))
    for a, b in zip(reference.snapshots, perturbed.snapshots):
        rows.append((a.t, float(np.linalg.norm(b.c - a.c)), z0 * math.exp(a.t)))

    paths = RunPaths.under(context.out_dir).ensure()
    return ScenarioResult(
        name=context.name,
        records=[record],
        files=[write_table(rows, ['t', 'separation', 'bound'], paths.root / 'gronwall.csv')],
        final_tau={context.name: reference.final_tau},
    )


def convergence_study(label, config, n_list=LADDER, enforced=True):
    """Cauchy ladder on one configuration; returns (records, table rows)."""
    if len(n_list) < 2:
        raise InvalidArgumentError('A Cauchy ladder needs at least two basis sizes.', code='invalid_ladder')
    table = cauchy_ladder(config.problem, config.scheme, n_list)
    d = table.differences
    rows = [(label, n, value) for n, value in table.rows]
    records = [
        AuditRecord(
            check=f'{label}_cauchy_decreasing',
            lhs=float(d[-1]),
            rhs=float(d[0]),
            margin=float(d[0] - d[-1]),
            passed=table.strictly_decreasing,
            enforced=enforced,
            detail='d ' + ', '.join(f'{value:.3e}' for value in d),
        ),
        AuditRecord(
            check=f'{label}_cauchy_reduction',
            lhs=float(d[-1]),
            rhs=float(d[0]) / 10.0,
            margin=float(d[0]) / 10.0 - float(d[-1]),
            passed=d[-1] < d[0] / 10.0,
            enforced=enforced,
        ),
    ]
    return records, rows


@register('converge', 'Galerkin Cauchy ladder n = 4, 8, 16, 32 for the clamped bump and for rough data')
def converge(context):
    result = ScenarioResult(name=context.name)
    rows = []
    for label, config, enforced in (('efk_bump', efk_bump_config(), True), ('rough_fk', rough_fk_config(), False)):
        records, table_rows = convergence_study(label, context.configure(config, allowed=('tau',)), enforced=enforced)
        result.records.extend(records)
        rows.extend(table_rows)
    RunPaths.under(context.out_dir).ensure()
    result.files.append(write_table(rows, ['problem', 'n', 'difference'], context.out_dir / 'convergence.csv'))
    return result


@register('mms', 'Temporal order of both schemes against manufactured solutions')
def mms(context):
    context.accepted()
    result = ScenarioResult(name=context.name)
    rows = []
    for label, problem, n in mms_cases():
        for kind, order in SCHEME_ORDERS.items():
            errors = []
            for tau in MMS_STEPS:
                config = RunConfig(problem=problem, n=n, scheme=SchemeSpec(tau=tau, kind=kind))
                errors.append(manufactured_error(SimulationService.simulate(config)))
            record, ratios = _order_record(f'mms_{label}_{kind}_order', errors, order, MMS_ORDER_TOLERANCE)
            result.records.append(record)
            for tau, error, ratio in zip(MMS_STEPS, errors, [math.nan] + ratios):
                rows.append((label, kind, tau, error, ratio))
    RunPaths.under(context.out_dir).ensure()
    result.files.append(write_table(rows, ['case', 'scheme', 'tau', 'error', 'ratio'], context.out_dir / 'mms.csv'))
    return result


@register('heat_oracle', 'Linear heat equation with the reaction switched off against exp(-t) sin(x)')
def heat_oracle(context):
    context.accepted()
    result = ScenarioResult(name=context.name)
    rows = []
    for kind, order in SCHEME_ORDERS.items():
        errors = []
        for tau in HEAT_STEPS:
            trajectory = SimulationService.simulate(heat_config(kind, tau))
            exact = math.exp(-trajectory.spec.T) * project(trajectory.basis, trajectory.rule, trajectory.spec.u0)
            error = float(np.linalg.norm(trajectory.final_state.c - exact))
            errors.append(error)
            rows.append((kind, tau, error))
            limit = 2.0 * tau
            result.records.append(AuditRecord(
                check=f'heat_{kind}_accuracy_tau_{tau:g}',
                lhs=error,
                rhs=limit,
                margin=limit - error,
                passed=error < limit,
            ))
        record, _ = _order_record(f'heat_{kind}_order', errors, order, HEAT_ORDER_TOLERANCE)
        result.records.append(record)
    RunPaths.under(context.out_dir).ensure()
    result.files.append(write_table(rows, ['scheme', 'tau', 'error'], context.out_dir / 'heat.csv'))
    return result


def fd_comparison(config, grid_points=FD_GRID_POINTS):
    """Spectral and finite-difference profiles at T on the FD nodes, plus their max discrepancy."""
    trajectory = SimulationService.simulate(config)
    oracle = fd_oracle(config.problem, grid_points, trajectory.final_tau)
    spectral = physical_profile(trajectory, trajectory.final_state, oracle.x)
    nodal = oracle.at(config.problem.T)
    return oracle.x, spectral, nodal, float(np.max(np.abs(spectral - nodal)))


@register('fd_crosscheck', 'Spectral front and kink against a 400-point finite-difference solution')
def fd_crosscheck(context):
    result = ScenarioResult(name=context.name)
    rows = []
    cases = (
        ('fk_front', replace(fk_front_config(T=1.0), n=32), True),
        ('efk_kink', efk_kink_config(), False),
    )
    for label, config, enforced in cases:
        config = context.configure(config, allowed=('n', 'tau'))
        x, spectral, nodal, discrepancy = fd_comparison(config)
        rows.extend((label, xi, si, ni) for xi, si, ni in zip(x, spectral, nodal))
        result.records.append(AuditRecord(
            check=f'fd_max_discrepancy_{label}',
            lhs=discrepancy,
            rhs=FD_DISCREPANCY_LIMIT,
            margin=FD_DISCREPANCY_LIMIT - discrepancy,
            passed=discrepancy < FD_DISCREPANCY_LIMIT,
            enforced=enforced,
        ))
        result.final_tau[label] = config.scheme.tau
    RunPaths.under(context.out_dir).ensure()
    result.files.append(write_table(rows, ['problem', 'x', 'spectral', 'fd'], context.out_dir / 'fd_crosscheck.csv'))
    return result


# ----------------------------------------------------------------------
# Entry point
# ----------------------------------------------------------------------
def run_scenario(name, out_dir, **overrides):
    """Run a registered scenario and write its audit table and summary under out_dir."""
    if name not in SCENARIOS:
        raise InvalidArgumentError(
            f'Unknown scenario {name!r}; available: {", ".join(sorted(SCENARIOS))}.',
            code='unknown_scenario'
        )
    context = ScenarioContext(name=name, out_dir=Path(out_dir), overrides=overrides)
    logger.info(f'Scenario {name} -> {context.out_dir}')
    result = SCENARIOS[name].runner(context)

    paths = RunPaths.under(context.out_dir).ensure()
    if paths.audit not in result.files:
        result.files.append(write_audit(result.records, paths.audit))
    if paths.metadata not in result.files:
        result.files.append(write_metadata(result.summary(), paths.metadata))

    if result.passed:
        logger.info(f'Scenario {name} passed ({len(result.records)} checks)')
    else:
        logger.warning(f'Scenario {name} failed: {", ".join(result.failed_checks)}')
    return result
