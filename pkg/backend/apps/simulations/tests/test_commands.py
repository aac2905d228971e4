# FILE: /backend/apps/simulations/tests/test_commands.py
import math
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

HEAT_CONFIG = """\
[problem]
m = 1
L = 3.141592653589793
T = 0.1
u0 = sine_mode 1

[discretization]
n = 4
tau = 0.01

[output]
snapshot_every = 5
plot_points = 11
"""


class SolverCommandTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.root = Path(self.tmp.name)

    def call(self, *args):
        out = StringIO()
        call_command('solver', *args, stdout=out)
        return out.getvalue()

    def test_run_scenario(self):
        output = self.call('run', 'heat_oracle', '--out', str(self.root / 'heat'))
        self.assertIn('heat_oracle: all checks passed', output)
        self.assertTrue((self.root / 'heat' / 'audit.csv').exists())
        print("✅ Solver run command test passed")

    def test_run_config_file(self):
        config = self.root / 'heat.cfg'
        config.write_text(HEAT_CONFIG)
        output = self.call('run', '--config', str(config), '--out', str(self.root / 'direct'), '--svg')
        self.assertIn('all checks passed', output)
        for name in ('snapshots.csv', 'timeseries.csv', 'audit.csv', 'run.json', 'plot.svg'):
            self.assertTrue((self.root / 'direct' / name).exists(), name)

    def test_unknown_scenario_exits_with_one(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('run', 'nope', '--out', str(self.root / 'nope'))
        self.assertEqual(ctx.exception.returncode, 1)

    def test_config_errors_carry_the_line(self):
        config = self.root / 'bad.cfg'
        config.write_text(HEAT_CONFIG.replace('T = 0.1', 'T = soon'))
        with self.assertRaises(CommandError) as ctx:
            self.call('run', '--config', str(config))
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn('line 4', str(ctx.exception))

    def test_run_needs_exactly_one_target(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('run', 'fk_front', 'efk_kink')
        self.assertEqual(ctx.exception.returncode, 1)

    def test_basis_table(self):
        output = self.call('basis', '--m', '2', '--L', '1', '--n', '3', '--out', str(self.root / 'basis'))
        self.assertIn('4.7300407448627', output)
        rows = (self.root / 'basis' / 'basis.csv').read_text().splitlines()
        self.assertEqual(rows[0], 'j,lambda,kappa,residual')
        self.assertEqual(len(rows), 4)

    def test_basis_stdout_is_csv(self):
        output = self.call('basis', '--m', '1', '--L', '1', '--n', '2')
        lines = output.splitlines()
        self.assertEqual(lines[0], 'j,lambda,kappa')
        self.assertEqual(len(lines), 3)
        j, lam, kappa = (float(value) for value in lines[2].split(','))
        self.assertEqual(j, 2.0)
        self.assertAlmostEqual(lam, (2 * math.pi) ** 2, places=10)
        self.assertAlmostEqual(kappa, 2 * math.pi, places=10)

    def test_converge_rejects_composite_scenarios(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('converge', 'mms')
        self.assertEqual(ctx.exception.returncode, 1)

    def test_converge_rejects_malformed_ladder(self):
        with self.assertRaises(CommandError):
            self.call('converge', 'rough_fk', '--n-list', '4,eight')

    def test_batch(self):
        output = self.call('batch', 'heat_oracle', '--out', str(self.root / 'batch'))
        self.assertIn('heat_oracle: passed', output)
        self.assertTrue((self.root / 'batch' / 'heat_oracle' / 'heat.csv').exists())

    def test_batch_rejects_unknown_names(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('batch', 'heat_oracle', 'nope')
        self.assertEqual(ctx.exception.returncode, 1)
