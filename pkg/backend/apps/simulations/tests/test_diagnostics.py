# FILE: /backend/apps/simulations/tests/test_diagnostics.py
import math
from types import SimpleNamespace

import numpy as np
from django.test import SimpleTestCase

from backend.apps.spectral.operators import Forcing
from backend.apps.spectral.profiles import Profile
from backend.apps.spectral.utils.eigenbasis import build_basis
from backend.apps.spectral.utils.quadrature import default_rule
from backend.core.exceptions import InvalidArgumentError
from tests.factories import ProblemSpecFactory, SchemeSpecFactory

from ..diagnostics import (
    ConvergenceTable,
    EnergyReport,
    cauchy_ladder,
    energy_monotonicity,
    gronwall_separation,
    is_oscillatory_regime,
    manufactured_error,
    oscillations_near,
    overshoot_metric,
    regularity_summary,
    rough_energy_audit,
    rough_energy_young_audit,
    smooth_energy_audit,
)
from ..integrator import SpectralState, integrate


def run(spec, scheme, n=4, initial=None):
    basis = build_basis(spec.m, spec.L, n)
    rule = default_rule(spec.L, n, breakpoints=spec.u0.breakpoints(spec.L))
    return integrate(basis, rule, spec, scheme, initial=initial)


def report(t, energy, dissipation_cum=0.0):
    return EnergyReport(t=t, l2=1.0, vnorm_sq=1.0, l4_4=1.0, potential=0.0,
                        energy=energy, dissipation_cum=dissipation_cum)


class EnergyAuditTests(SimpleTestCase):

    def setUp(self):
        self.spec = ProblemSpecFactory(rough=True, T=0.2)
        self.traj = run(self.spec, SchemeSpecFactory(tau=1e-3, store_every=20), n=16)

    def test_smooth_energy_law_holds(self):
        record = smooth_energy_audit(self.traj)
        self.assertTrue(record.passed)
        self.assertEqual(record.check, 'smooth_energy_law')
        self.assertGreaterEqual(record.margin, 0.0)

    def test_smooth_energy_law_violation(self):
        traj = SimpleNamespace(spec=self.spec, reports=[report(0.0, 1.0), report(0.1, 0.8, 0.3)])
        record = smooth_energy_audit(traj)
        self.assertFalse(record.passed)
        self.assertAlmostEqual(record.lhs, 1.1)
        print("✅ Smooth energy audit test passed")

    def test_monotonicity(self):
        self.assertTrue(energy_monotonicity(self.traj).passed)
        traj = SimpleNamespace(reports=[report(0.0, 1.0), report(0.1, 1.5)])
        record = energy_monotonicity(traj)
        self.assertFalse(record.passed)
        self.assertAlmostEqual(record.lhs, 0.5)

    def test_rough_bound_holds(self):
        record = rough_energy_audit(self.traj)
        self.assertTrue(record.passed)
        self.assertEqual(record.check, 'rough_energy_bound')
        first, last = self.traj.reports[0], self.traj.reports[-1]
        self.assertGreater(last.l2_cum, 0.0)
        self.assertAlmostEqual(record.rhs, 0.5 * first.l2 ** 2 + last.l2_cum, places=12)

    def test_rough_bound_keeps_the_l2_integral(self):
        spec = ProblemSpecFactory(rough=True)
        final = EnergyReport(t=1.0, l2=1.0, vnorm_sq=1.0, l4_4=1.0, potential=0.0, energy=0.0,
                             dissipation_cum=0.0, vnorm_cum=0.2, l4_cum=0.1, l2_cum=0.25)
        traj = SimpleNamespace(spec=spec, reports=[report(0.0, 0.0), final])
        record = rough_energy_audit(traj)
        self.assertFalse(record.passed)
        self.assertAlmostEqual(record.lhs, 0.8)
        self.assertAlmostEqual(record.rhs, 0.75)
        # the Young form trades the L2 integral for T L / (2 eta) and hides the violation
        self.assertTrue(rough_energy_young_audit(traj).passed)
        print("✅ Rough energy audit test passed")

    def test_rough_bound_without_reaction(self):
        spec = ProblemSpecFactory(heat=True, T=0.5)
        traj = run(spec, SchemeSpecFactory(store_every=10))
        record = rough_energy_audit(traj)
        self.assertTrue(record.passed)
        self.assertGreater(record.margin, 0.0)
        self.assertAlmostEqual(record.rhs, 0.5 * traj.reports[0].l2 ** 2, places=12)

    def test_young_bound_holds_with_room(self):
        record = rough_energy_young_audit(self.traj)
        self.assertTrue(record.passed)
        self.assertEqual(record.check, 'rough_energy_bound_young')
        # the source term T L / (2 eta) dominates
        self.assertGreater(record.rhs, 0.5 * self.traj.reports[0].l2 ** 2 + 0.19)

    def test_rough_bound_rejects_lifted_runs(self):
        spec = ProblemSpecFactory(L=20.0, u0=Profile.gaussian(0.0, 1.0), bc_left=1.0)
        traj = SimpleNamespace(spec=spec, reports=[])
        for audit in (rough_energy_audit, rough_energy_young_audit):
            with self.subTest(audit=audit.__name__):
                with self.assertRaises(InvalidArgumentError) as ctx:
                    audit(traj)
                self.assertEqual(ctx.exception.code, 'lifted_run')

    def test_audits_reject_forced_runs(self):
        mode = Profile.sine_mode(1)
        spec = ProblemSpecFactory(forcing=Forcing.manufactured(mode, 1.0))
        traj = SimpleNamespace(spec=spec, reports=[])
        for audit in (smooth_energy_audit, rough_energy_audit, rough_energy_young_audit):
            with self.subTest(audit=audit.__name__):
                with self.assertRaises(InvalidArgumentError) as ctx:
                    audit(traj)
                self.assertEqual(ctx.exception.code, 'forced_run')


class GronwallTests(SimpleTestCase):

    def setUp(self):
        self.spec = ProblemSpecFactory(T=0.5)
        self.scheme = SchemeSpecFactory(store_every=5)
        self.reference = run(self.spec, self.scheme)

    def test_perturbed_run_stays_within_bound(self):
        start = self.reference.snapshots[0]
        perturbed = run(self.spec, self.scheme, initial=SpectralState(t=0.0, c=start.c + 1e-6))
        record = gronwall_separation(self.reference, perturbed)
        self.assertTrue(record.passed)
        self.assertLess(record.realized_ratio, math.exp(0.5))
        print("✅ Gronwall separation test passed")

    def test_rejects_different_discretizations(self):
        other = run(self.spec, self.scheme, n=6)
        with self.assertRaises(InvalidArgumentError) as ctx:
            gronwall_separation(self.reference, other)
        self.assertEqual(ctx.exception.code, 'discretization_mismatch')

    def test_rejects_different_problems(self):
        other = run(self.spec.with_changes(reaction=False), self.scheme)
        with self.assertRaises(InvalidArgumentError) as ctx:
            gronwall_separation(self.reference, other)
        self.assertEqual(ctx.exception.code, 'problem_mismatch')


class CauchyLadderTests(SimpleTestCase):

    def test_indicator_ladder(self):
        spec = ProblemSpecFactory(rough=True, T=0.02)
        scheme = SchemeSpecFactory(tau=1e-3, store_every=5)
        table = cauchy_ladder(spec, scheme, [4, 8, 16])
        self.assertEqual([n for n, _ in table.rows], [4, 8])
        self.assertTrue(table.strictly_decreasing)
        # the first difference is the initial tail over modes 5 and 7
        tail = 2.0 / math.pi * math.sqrt(1 / 25 + 1 / 49)
        self.assertAlmostEqual(table.differences[0], tail, delta=1e-9)

    def test_rejects_unsorted_sizes(self):
        with self.assertRaises(InvalidArgumentError) as ctx:
            cauchy_ladder(ProblemSpecFactory(), SchemeSpecFactory(), [8, 4])
        self.assertEqual(ctx.exception.code, 'invalid_ladder')

    def test_table_properties(self):
        table = ConvergenceTable(rows=[(4, 0.1), (8, 0.05), (16, 0.06)])
        self.assertEqual(table.differences, [0.1, 0.05, 0.06])
        self.assertFalse(table.strictly_decreasing)


class ShapeMetricTests(SimpleTestCase):

    def test_overshoot_and_oscillations(self):
        metric = overshoot_metric([0.0, 0.5, 1.02, 0.99, 1.0], 0.0, 1.0)
        self.assertAlmostEqual(metric.amplitude, 0.02)
        self.assertEqual(metric.oscillations, 2)

    def test_flat_and_empty_profiles(self):
        self.assertEqual(overshoot_metric([1.0, 1.0, 1.0], 0.0, 1.0).oscillations, 0)
        self.assertEqual(overshoot_metric([], 0.0, 1.0).amplitude, 0.0)

    def test_oscillatory_regime(self):
        self.assertTrue(is_oscillatory_regime(0.2))
        self.assertFalse(is_oscillatory_regime(0.1))

    def test_oscillations_near_zero(self):
        kink = [0.0, 0.0, -0.03, -0.01, 0.3, 0.8, 1.02, 1.0, 1.0, 0.8, 0.3, -0.01, -0.03, 0.0, 0.0]
        # the turn at 1.02 lies outside the band and the plateau breaks the chain
        self.assertEqual(oscillations_near(kink), 2)
        self.assertEqual(oscillations_near([1.0, 0.8, 0.4, 0.1, 0.0, 0.0]), 0)

    def test_rounding_noise_is_not_an_oscillation(self):
        self.assertEqual(oscillations_near([0.0, 1e-12, -1e-12, 1e-12, 0.5, 1.0]), 0)
        self.assertEqual(oscillations_near([0.0, 0.1]), 0)


class ManufacturedErrorTests(SimpleTestCase):

    def test_first_order_error_is_small(self):
        mode = Profile.sine_mode(1)
        spec = ProblemSpecFactory(T=0.5, forcing=Forcing.manufactured(mode, 1.0))
        traj = run(spec, SchemeSpecFactory(tau=0.01, store_every=10))
        error = manufactured_error(traj)
        self.assertGreater(error, 0.0)
        self.assertLess(error, 2e-2)

    def test_rejects_unforced_runs(self):
        traj = run(ProblemSpecFactory(), SchemeSpecFactory())
        with self.assertRaises(InvalidArgumentError) as ctx:
            manufactured_error(traj)
        self.assertEqual(ctx.exception.code, 'unforced_run')


class RegularityTests(SimpleTestCase):

    def test_summary_records(self):
        traj = run(ProblemSpecFactory(rough=True, T=0.05), SchemeSpecFactory(tau=1e-3, store_every=10), n=16)
        summary = regularity_summary(traj)
        self.assertAlmostEqual(summary.sup_l2, traj.reports[0].l2)
        self.assertAlmostEqual(summary.first_finite_vnorm_time, 0.01)
        records = summary.records()
        self.assertEqual(len(records), 5)
        self.assertTrue(all(not record.enforced and record.passed for record in records))
        self.assertTrue(np.isfinite(summary.vnorm_integral))
