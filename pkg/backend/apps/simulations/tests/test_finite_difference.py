# FILE: /backend/apps/simulations/tests/test_finite_difference.py
import math

import numpy as np
from django.test import SimpleTestCase

from backend.apps.spectral.profiles import Profile
from backend.core.exceptions import InvalidArgumentError
from tests.factories import ProblemSpecFactory

from ..utils.finite_difference import FiniteDifferenceOperators, fd_oracle


class StencilTests(SimpleTestCase):

    def test_second_difference_of_sine(self):
        points = 201
        x = np.linspace(0.0, math.pi, points)
        h = x[1] - x[0]
        inner = np.sin(x[1:-1])
        result = FiniteDifferenceOperators.second_difference(points - 2, h) @ inner
        np.testing.assert_allclose(result, inner, atol=1e-4)

    def test_fourth_difference_of_quartic(self):
        points = 41
        x = np.linspace(0.0, 1.0, points)
        h = x[1] - x[0]
        inner = (x * (1.0 - x)) ** 2
        result = FiniteDifferenceOperators.clamped_fourth_difference(points - 2, h) @ inner[1:-1]
        # away from the ghost rows the five-point stencil is exact for quartics
        np.testing.assert_allclose(result[2:-2], 24.0, atol=1e-6)
        print("✅ Fourth difference stencil test passed")


class OracleTests(SimpleTestCase):

    def test_rejects_coarse_grid(self):
        with self.assertRaises(InvalidArgumentError) as ctx:
            fd_oracle(ProblemSpecFactory(), grid_points=9, tau=0.01)
        self.assertEqual(ctx.exception.code, 'grid_too_coarse')

    def test_heat_mode_decay(self):
        spec = ProblemSpecFactory(heat=True)
        result = fd_oracle(spec, grid_points=101, tau=0.01, store_every=25)
        np.testing.assert_allclose(result.times, [0.0, 0.25, 0.5, 0.75, 1.0], atol=1e-12)
        middle = result.at(1.0)[50]
        self.assertAlmostEqual(middle, math.sqrt(2.0 / math.pi) * 1.01 ** -100, delta=1e-3)

    def test_boundary_values_are_imposed(self):
        spec = ProblemSpecFactory(L=20.0, T=0.05, u0=Profile.gaussian(0.0, 1.0), bc_left=1.0)
        result = fd_oracle(spec, grid_points=41, tau=0.01)
        for snapshot in result.values:
            self.assertEqual(snapshot[0], 1.0)
            self.assertEqual(snapshot[-1], 0.0)
        self.assertEqual(len(result.values), 6)

    def test_clamped_run_stays_bounded(self):
        spec = ProblemSpecFactory(fourth_order=True, T=0.01)
        result = fd_oracle(spec, grid_points=41, tau=1e-3)
        self.assertLess(float(np.max(np.abs(result.at(0.01)))), float(np.max(result.values[0])) + 1e-12)
