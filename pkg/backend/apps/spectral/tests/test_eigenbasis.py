# FILE: /backend/apps/spectral/tests/test_eigenbasis.py
import math

import numpy as np
from django.test import SimpleTestCase

from backend.core.exceptions import InvalidArgumentError

from ..utils.eigenbasis import beam_basis, beam_roots, build_basis, evaluate, sine_basis
from ..utils.quadrature import gauss_rule


class BeamRootTests(SimpleTestCase):

    def test_first_roots(self):
        roots = beam_roots(2)
        self.assertAlmostEqual(roots[0], 4.730040744862704, delta=1e-12)
        self.assertAlmostEqual(roots[1], 7.853204624095838, delta=1e-12)
        print("✅ Beam root test passed")

    def test_high_roots_approach_half_integer_multiples(self):
        roots = beam_roots(40)
        for j, kappa in enumerate(roots, start=1):
            self.assertGreater(kappa, j * math.pi)
            self.assertLess(kappa, (j + 1) * math.pi)
        self.assertAlmostEqual(roots[-1], 40.5 * math.pi, delta=1e-10)
        self.assertTrue(np.all(np.diff(roots) > 0))

    def test_residuals_are_tiny(self):
        basis = beam_basis(1.0, 16)
        self.assertLess(float(basis.eigenresidual().max()), 1e-12)


class SineBasisTests(SimpleTestCase):

    def test_eigenvalues(self):
        basis = sine_basis(2.0, 5)
        expected = [(j * math.pi / 2.0) ** 2 for j in range(1, 6)]
        np.testing.assert_allclose(basis.lambdas, expected, rtol=1e-14)
        np.testing.assert_allclose(basis.kappas, [j * math.pi for j in range(1, 6)], rtol=1e-14)

    def test_orthonormal(self):
        basis = sine_basis(math.pi, 12)
        rule = gauss_rule(math.pi, 48)
        values = basis.evaluate_all(rule.nodes)
        gram = values.T @ (rule.weights[:, None] * values)
        np.testing.assert_allclose(gram, np.eye(12), atol=1e-12)

    def test_point_values_and_derivatives(self):
        basis = sine_basis(math.pi, 3)
        self.assertAlmostEqual(evaluate(basis, 1, math.pi / 2), math.sqrt(2 / math.pi), places=14)
        self.assertAlmostEqual(evaluate(basis, 2, 0.0, deriv=1), 2 * math.sqrt(2 / math.pi), places=13)
        self.assertAlmostEqual(evaluate(basis, 1, math.pi / 2, deriv=2), -math.sqrt(2 / math.pi), places=13)
        print("✅ Sine basis evaluation test passed")


class ClampedBeamBasisTests(SimpleTestCase):

    def setUp(self):
        self.basis = beam_basis(1.0, 8)

    def test_first_eigenvalue(self):
        self.assertAlmostEqual(self.basis.lambdas[0], 4.730040744862704 ** 4, delta=1e-9)
        self.assertAlmostEqual(self.basis.lambdas[0], 500.5639, delta=1e-3)

    def test_eigenvalues_scale_with_length(self):
        stretched = beam_basis(2.0, 3)
        np.testing.assert_allclose(stretched.lambdas, self.basis.lambdas[:3] / 16.0, rtol=1e-13)

    def test_orthonormal(self):
        rule = gauss_rule(1.0, 64, points_per_panel=16)
        values = self.basis.evaluate_all(rule.nodes)
        gram = values.T @ (rule.weights[:, None] * values)
        np.testing.assert_allclose(gram, np.eye(8), atol=1e-10)

    def test_clamped_boundary(self):
        ends = np.array([0.0, 1.0])
        values = self.basis.evaluate_all(ends, 0)
        slopes = self.basis.evaluate_all(ends, 1)
        np.testing.assert_allclose(values, 0.0, atol=1e-9)
        np.testing.assert_allclose(slopes, 0.0, atol=1e-7)
        print("✅ Clamped boundary test passed")

    def test_gradient_gram_first_entry(self):
        rule = gauss_rule(1.0, 64, points_per_panel=16)
        slopes = self.basis.evaluate_all(rule.nodes, 1)
        self.assertAlmostEqual(float(rule.weights @ slopes[:, 0] ** 2), 12.3026, delta=1e-3)

    def test_curvature_norm_matches_eigenvalue(self):
        rule = gauss_rule(1.0, 64, points_per_panel=16)
        curvatures = self.basis.evaluate_all(rule.nodes, 2)
        norms = rule.weights @ curvatures ** 2
        np.testing.assert_allclose(norms, self.basis.lambdas, rtol=1e-9)

    def test_curvature_gram_is_diagonal(self):
        # (w_i'', w_j'') = lambda_j delta_ij for clamped modes
        rule = gauss_rule(1.0, 64, points_per_panel=16)
        curvatures = self.basis.evaluate_all(rule.nodes, 2)
        gram = curvatures.T @ (rule.weights[:, None] * curvatures)
        scale = np.sqrt(np.outer(self.basis.lambdas, self.basis.lambdas))
        np.testing.assert_allclose(gram / scale, np.eye(8), atol=1e-8)

    def test_large_modes_stay_finite(self):
        basis = beam_basis(1.0, 64)
        rule = gauss_rule(1.0, 256, points_per_panel=8)
        values = basis.evaluate_all(rule.nodes)
        self.assertTrue(np.all(np.isfinite(values)))
        self.assertAlmostEqual(float(rule.weights @ values[:, -1] ** 2), 1.0, delta=1e-9)


class BasisValidationTests(SimpleTestCase):

    def test_rejects_bad_arguments(self):
        with self.assertRaises(InvalidArgumentError):
            build_basis(3, 1.0, 4)
        with self.assertRaises(InvalidArgumentError):
            build_basis(1, -1.0, 4)
        with self.assertRaises(InvalidArgumentError):
            build_basis(2, 1.0, 0)

    def test_rejects_points_outside_domain(self):
        basis = sine_basis(1.0, 4)
        with self.assertRaises(InvalidArgumentError) as ctx:
            basis.evaluate_all([0.5, 1.5])
        self.assertEqual(ctx.exception.code, 'outside_domain')

    def test_rejects_bad_mode_index(self):
        basis = sine_basis(1.0, 4)
        with self.assertRaises(InvalidArgumentError):
            evaluate(basis, 5, 0.5)
