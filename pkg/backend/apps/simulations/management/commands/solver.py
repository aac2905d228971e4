# FILE: /backend/apps/simulations/management/commands/solver.py
"""
    python manage.py solver run fk_front --out results/fk --svg
    python manage.py solver run --config runs/front.cfg
    python manage.py solver converge efk_bump --n-list 4,8,16,32
    python manage.py solver basis --m 2 --L 1 --n 8
    python manage.py solver batch fk_front efk_kink rough_fk

Exit codes: 0 success, 1 invalid input or internal error,
2 numerical blow-up, 3 audit failure.
"""
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from backend.apps.spectral.utils.eigenbasis import build_basis
from backend.core.conf import solver_setting
from backend.core.exceptions import AuditFailure, InvalidArgumentError, SolverError, solver_exception_payload

from ...config_parser import parse_config
from ...scenarios import SCENARIOS, base_config, convergence_study, run_scenario
from ...services import SimulationService
from ...tasks import run_scenario_batch
from ...writers import RunPaths, table_csv, write_audit, write_table

ACTIONS = ('run', 'converge', 'basis', 'batch')


class Command(BaseCommand):
    help = 'Spectral Galerkin solver for second- and fourth-order reaction-diffusion problems'

    def add_arguments(self, parser):
        parser.add_argument('action', choices=ACTIONS, help='What to do')
        parser.add_argument('targets', nargs='*', help='Scenario name(s)')
        parser.add_argument('--config', type=str, help='Run configuration file (run only)')
        parser.add_argument('--out', type=str, help='Output directory (default: SOLVER_OUTPUT_DIR/<name>)')
        parser.add_argument('--n', type=int, help='Override the number of modes')
        parser.add_argument('--tau', type=float, help='Override the time step')
        parser.add_argument('--gamma', type=float, help='Override the biharmonic coefficient (m = 2)')
        parser.add_argument('--svg', action='store_true', help='Also write plot.svg')
        parser.add_argument('--n-list', type=str, default='4,8,16,32', help='Basis sizes for converge')
        parser.add_argument('--m', type=int, default=1, help='Operator order for basis (1 or 2)')
        parser.add_argument('--L', type=float, default=1.0, help='Domain length for basis')

    def handle(self, *args, **options):
        handler = getattr(self, f'handle_{options["action"]}')
        try:
            handler(options)
        except SolverError as exc:
            payload = solver_exception_payload(exc)
            raise CommandError(payload['message'], returncode=payload['code'])

    # ------------------------------------------------------------------
    def _overrides(self, options):
        return {
            'n': options['n'],
            'tau': options['tau'],
            'gamma': options['gamma'],
            'svg': True if options['svg'] else None,
        }

    def _out_dir(self, options, name):
        if options['out']:
            return Path(options['out'])
        return Path(solver_setting('SOLVER_OUTPUT_DIR', 'results')) / name

    def _single_target(self, options, action):
        targets = options['targets']
        if len(targets) != 1:
            raise InvalidArgumentError(f'{action} takes exactly one scenario name, got {len(targets)}.',
                                       code='invalid_arguments')
        return targets[0]

    def _report(self, records):
        for record in records:
            status = 'pass' if record.passed else 'FAIL'
            tag = '' if record.enforced else ' (info)'
            line = f'  {record.check}{tag}: {status}  lhs={record.lhs:.6g} rhs={record.rhs:.6g}'
            if record.passed or not record.enforced:
                self.stdout.write(line)
            else:
                self.stdout.write(self.style.ERROR(line))

    def _finish(self, label, records, out_dir):
        self._report(records)
        failed = [record.check for record in records if record.enforced and not record.passed]
        if failed:
            raise AuditFailure(failed)
        self.stdout.write(self.style.SUCCESS(f'{label}: all checks passed, results in {out_dir}'))

    # ------------------------------------------------------------------
    def handle_run(self, options):
        if options['config']:
            if options['targets']:
                raise InvalidArgumentError('Give either a scenario name or --config, not both.',
                                           code='invalid_arguments')
            try:
                text = Path(options['config']).read_text(encoding='utf-8')
            except OSError as exc:
                raise InvalidArgumentError(f'Cannot read {options["config"]}: {exc.strerror}', code='unreadable_config')
            config = parse_config(text)
            if config.scenario is None:
                out_dir = Path(options['out'] or config.out_dir or self._out_dir(options, 'run'))
                config = config.with_overrides(**self._overrides(options))
                outcome = SimulationService.run_config(config, out_dir=out_dir)
                self._finish('run', outcome.records, out_dir)
                return
            name = config.scenario
            out_dir = Path(options['out'] or config.out_dir or self._out_dir(options, name))
            overrides = self._overrides(options)
            if config.svg:
                overrides['svg'] = True
        else:
            name = self._single_target(options, 'run')
            out_dir = self._out_dir(options, name)
            overrides = self._overrides(options)

        self.stdout.write(f'Running scenario {name} -> {out_dir}')
        result = run_scenario(name, out_dir, **overrides)
        self._finish(name, result.records, out_dir)

    def handle_converge(self, options):
        name = self._single_target(options, 'converge')
        config = base_config(name)
        if config is None:
            raise InvalidArgumentError(
                f'converge needs a single-run scenario, not {name!r}; '
                f'choose one of {", ".join(sorted(k for k in SCENARIOS if base_config(k)))}.',
                code='invalid_arguments'
            )
        try:
            n_list = [int(value) for value in options['n_list'].split(',')]
        except ValueError:
            raise InvalidArgumentError(f'Malformed --n-list {options["n_list"]!r}.', code='invalid_arguments')

        out_dir = self._out_dir(options, f'{name}_converge')
        config = config.with_overrides(tau=options['tau'], gamma=options['gamma'])
        records, rows = convergence_study(name, config, n_list)
        paths = RunPaths.under(out_dir).ensure()
        write_table(rows, ['problem', 'n', 'difference'], paths.root / 'convergence.csv')
        write_audit(records, paths.audit)
        for _, n, difference in rows:
            self.stdout.write(f'  n={n}: d={difference:.6e}')
        self._finish(f'converge {name}', records, out_dir)

    def handle_basis(self, options):
        basis = build_basis(options['m'], options['L'], options['n'] or 8)
        residuals = basis.eigenresidual()
        rows = [(j, lam, kappa, float(residual)) for (j, lam, kappa), residual in zip(basis.eigen_table(), residuals)]
        # stdout carries only the CSV
        self.stdout.write(table_csv([row[:3] for row in rows], ['j', 'lambda', 'kappa']), ending='')
        if options['out']:
            paths = RunPaths.under(options['out']).ensure()
            write_table(rows, ['j', 'lambda', 'kappa', 'residual'], paths.root / 'basis.csv')
        self.stderr.write(
            f'Basis m={basis.m} L={basis.L:g} n={basis.n}, max eigenresidual {max(row[3] for row in rows):.2e}'
        )

    def handle_batch(self, options):
        names = options['targets'] or sorted(SCENARIOS)
        unknown = [name for name in names if name not in SCENARIOS]
        if unknown:
            raise InvalidArgumentError(
                f'Unknown scenario(s) {", ".join(unknown)}; available: {", ".join(sorted(SCENARIOS))}.',
                code='unknown_scenario'
            )
        out_dir = self._out_dir(options, 'batch')
        summaries = run_scenario_batch(names, str(out_dir), self._overrides(options))

        worst = 0
        for summary in summaries:
            code = summary.get('code', 1)
            worst = max(worst, code)
            message = summary.get('message') or ('passed' if code == 0 else 'failed: ' + ', '.join(summary['failed_checks']))
            line = f'  {summary["scenario"]}: {message}'
            self.stdout.write(self.style.SUCCESS(line) if code == 0 else self.style.ERROR(line))
        if worst:
            raise CommandError(f'{sum(1 for s in summaries if s.get("code"))} scenario(s) failed', returncode=worst)
        self.stdout.write(self.style.SUCCESS(f'Batch of {len(summaries)} scenario(s) passed, results in {out_dir}'))
