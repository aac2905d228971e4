# FILE: tests/smoke/test_scenarios.py
import json
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from backend.apps.simulations.scenarios import SCENARIOS, run_scenario


class ScenarioSmokeTests(SimpleTestCase):
    """Every registered scenario runs end to end and its enforced checks pass."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def test_all_scenarios(self):
        for name in sorted(SCENARIOS):
            with self.subTest(scenario=name):
                out_dir = Path(self.tmp.name) / name
                result = run_scenario(name, out_dir)
                self.assertTrue(result.passed, f'{name}: {result.failed_checks}')

                audit = (out_dir / 'audit.csv').read_text().splitlines()
                self.assertEqual(audit[0], 'check,lhs,rhs,margin,pass')
                self.assertEqual(len(audit), 1 + len(result.records))
                self.assertTrue((out_dir / 'run.json').exists())

    def test_front_files(self):
        out_dir = Path(self.tmp.name) / 'fk_front'
        result = run_scenario('fk_front', out_dir, svg=True)
        names = {path.name for path in result.files}
        self.assertTrue({'snapshots.csv', 'timeseries.csv', 'audit.csv', 'run.json', 'plot.svg'} <= names)
        metadata = json.loads((out_dir / 'run.json').read_text())
        self.assertEqual(metadata['scenario'], 'fk_front')
        self.assertEqual(metadata['problem']['L'], 20.0)
        print("✅ Front scenario smoke test passed")
