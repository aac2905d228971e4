# FILE: backend/apps/simulations/services.py
import logging
import math
from dataclasses import dataclass, field

from backend.apps.spectral.utils.eigenbasis import build_basis
from backend.apps.spectral.utils.quadrature import default_rule
from backend.core.exceptions import InvalidArgumentError
from backend.core.validators import validate_gauss_points

from .diagnostics import (
    AuditRecord,
    energy_monotonicity,
    manufactured_error,
    regularity_summary,
    rough_energy_audit,
    rough_energy_young_audit,
    smooth_energy_audit,
)
from .integrator import integrate_with_halving
from .writers import write_run

logger = logging.getLogger(__name__)


@dataclass
class RunOutcome:
    trajectory: object
    records: list = field(default_factory=list)
    files: list = field(default_factory=list)

    @property
    def failed_checks(self):
        return [record.check for record in self.records if record.enforced and not record.passed]

    @property
    def passed(self):
        return not self.failed_checks


class SimulationService:
    """
    One configured run from discretization to files on disk.
    Usage:
        outcome = SimulationService.run_config(config, out_dir='results/fk')
        outcome.passed, outcome.files
    """

    @classmethod
    def discretize(cls, problem, n, panels=None, gauss_points=None):
        """Eigenbasis plus a Gauss rule aligned to the initial datum's breakpoints."""
        if gauss_points is not None:
            validate_gauss_points(gauss_points)
        basis = build_basis(problem.m, problem.L, n)
        rule = default_rule(
            problem.L, n,
            breakpoints=problem.u0.breakpoints(problem.L),
            panels=panels,
            points_per_panel=gauss_points,
        )
        return basis, rule

    @classmethod
    def simulate(cls, config, initial=None, max_halvings=None):
        if config.problem is None or config.n is None or config.scheme is None:
            raise InvalidArgumentError('Run configuration is incomplete.', code='incomplete_config')
        basis, rule = cls.discretize(config.problem, config.n, config.panels, config.gauss_points)
        logger.info(
            f'Running m={config.problem.m} L={config.problem.L:g} T={config.problem.T:g} '
            f'n={config.n} {config.scheme.kind} tau={config.scheme.tau:g}'
        )
        return integrate_with_halving(basis, rule, config.problem, config.scheme,
                                      initial=initial, max_halvings=max_halvings)

    @classmethod
    def standard_audits(cls, trajectory):
        """Energy-law audits for unforced runs, error against the exact solution for manufactured ones."""
        spec = trajectory.spec
        records = []
        if spec.forcing.is_zero:
            records.append(smooth_energy_audit(trajectory))
            records.append(energy_monotonicity(trajectory))
            if not spec.has_lifting:
                records.append(rough_energy_audit(trajectory))
                records.append(rough_energy_young_audit(trajectory))
        else:
            error = manufactured_error(trajectory)
            records.append(AuditRecord(
                check='manufactured_error', lhs=error, rhs=math.inf, margin=math.inf,
                passed=math.isfinite(error), enforced=False,
            ))
        records.extend(regularity_summary(trajectory).records())
        return records

    @classmethod
    def run_config(cls, config, out_dir=None, checks=(), initial=None, **metadata):
        """
        Simulate, audit and (when an output directory is known) write all files.
        checks are extra callables trajectory -> list of AuditRecord.
        """
        trajectory = cls.simulate(config, initial=initial)
        records = cls.standard_audits(trajectory)
        for check in checks:
            records.extend(check(trajectory))

        outcome = RunOutcome(trajectory=trajectory, records=records)
        out_dir = out_dir or config.out_dir
        if out_dir:
            outcome.files = write_run(
                trajectory, out_dir, records,
                svg=config.svg, plot_points=config.plot_points, **metadata,
            )
        if not outcome.passed:
            logger.warning(f'Run finished with failing checks: {", ".join(outcome.failed_checks)}')
        return outcome
