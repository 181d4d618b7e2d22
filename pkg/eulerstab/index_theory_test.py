# Copyright 2021 The EulerStab Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

# Lint as: python3
"""Tests for eulerstab.index_theory."""

import math

from absl.testing import absltest
from absl.testing import parameterized
from eulerstab import index_theory
from eulerstab import monodromy
from eulerstab import test_utils
from eulerstab import utils
import numpy as np

BasicNormalForm = index_theory.BasicNormalForm
NormalFormTag = index_theory.NormalFormTag

I2 = np.eye(2)
N1_PLUS = np.array([[1.0, 1.0], [0.0, 1.0]])


class ThresholdTest(parameterized.TestCase):

  def test_beta_hat(self):
    self.assertEqual(index_theory.beta_hat(1), 0.0)
    self.assertAlmostEqual(index_theory.beta_hat(2), test_utils.BETA_HAT_2,
                           places=14)
    self.assertAlmostEqual(index_theory.beta_hat(3), test_utils.BETA_HAT_3,
                           places=13)
    self.assertAlmostEqual(test_utils.BETA_HAT_3_2, 1.013086, places=5)
    self.assertAlmostEqual(test_utils.BETA_HAT_5_2, 4.94362, places=4)

  @parameterized.parameters(1.0, 1.5, 2.0, 3.7)
  def test_theta_inverts_beta_theta(self, theta):
    self.assertAlmostEqual(
        index_theory.theta_of_beta(index_theory.beta_theta(theta)), theta,
        places=12)

  @parameterized.parameters((1.0, 0.0), (-1.0, 0.5), (1j, 0.25), (-1j, 0.75))
  def test_varsigma(self, omega, expected):
    self.assertAlmostEqual(index_theory.varsigma_of(omega), expected)

  @parameterized.parameters(
      (0.0, 1.0, (0, 3)),
      (0.0, -1.0, (2, 0)),
      (1.4, 1.0, (3, 0)),
      (1.4, -1.0, (4, 0)),
      (test_utils.BETA_HAT_2, 1.0, (3, 2)),
      (test_utils.BETA_HAT_3_2, -1.0, (2, 2)),
  )
  def test_e0_index(self, beta, omega, expected):
    self.assertEqual(index_theory.e0_index(beta, omega), expected)

  def test_e0_index_rejects_negative_beta(self):
    with self.assertRaises(utils.InputError):
      index_theory.e0_index(-0.5)


class NormalFormTest(parameterized.TestCase):

  def test_diamond(self):
    m = index_theory.diamond(test_utils.rotation_block(0.3),
                             test_utils.hyperbolic_block(2.0))
    self.assertEqual(m.shape, (4, 4))
    np.testing.assert_allclose(m[np.ix_([0, 2], [0, 2])],
                               test_utils.rotation_block(0.3))
    np.testing.assert_allclose(np.diag(m)[[1, 3]], [2.0, 0.5])
    test_utils.assert_symplectic(m, tol=1e-14)

  def test_class_labels(self):
    self.assertEqual(BasicNormalForm(index_theory.D, -3.0).class_label,
                     "D(-2)")
    self.assertEqual(
        BasicNormalForm(index_theory.R, np.exp(4j)).class_label, "R(pi,2pi)")
    self.assertEqual(BasicNormalForm(index_theory.N1, -1.0).class_label, "-I2")
    self.assertEqual(
        BasicNormalForm(index_theory.N1, 1.0, -1).class_label, "N1(1,-1)")
    self.assertEqual(
        BasicNormalForm(index_theory.N2, 1j, -1).class_label, "N2(trivial)")

  @parameterized.named_parameters(
      ("rotation_saddle", 1.0, 3.0, "R(0,pi)<>D(2)"),
      ("retrograde_saddle", 4.0, 3.0, "R(pi,2pi)<>D(2)"),
      ("negative_saddle", 2.0, -3.0, "R(0,pi)<>D(-2)"),
  )
  def test_classify_conjugated(self, theta, lam, label):
    m = test_utils.random_symplectic_conjugate(
        index_theory.diamond(test_utils.rotation_block(theta),
                             test_utils.hyperbolic_block(lam)), seed=3)
    tag = index_theory.classify(m)
    self.assertEqual(tag.class_label, label)
    self.assertAlmostEqual(tag.blocks[0].theta, theta, places=8)

  def test_classify_identity_blocks(self):
    tag = index_theory.classify(
        index_theory.diamond(-I2, test_utils.hyperbolic_block(2.0)))
    self.assertEqual(tag.class_label, "-I2<>D(2)")
    tag = index_theory.classify(index_theory.diamond(I2, N1_PLUS))
    self.assertEqual(tag.class_label, "I2<>N1(1,1)")
    tag = index_theory.classify(index_theory.diamond(I2, N1_PLUS.T))
    self.assertEqual(tag.class_label, "I2<>N1(1,-1)")

  def test_classify_hyperbolic_pair(self):
    tag = index_theory.classify(
        index_theory.diamond(test_utils.hyperbolic_block(2.0),
                             test_utils.hyperbolic_block(-5.0)))
    self.assertEqual(tag.class_label, "D(-2)<>D(2)")

  def test_ambiguous_near_circle(self):
    m = index_theory.normal_form_matrix(
        BasicNormalForm(index_theory.COMPLEX_SADDLE, 1.0000005j))
    with self.assertRaises(utils.AmbiguousClassificationError):
      index_theory.classify(m)

  @parameterized.parameters(0.5, 1.4, 2.0)
  def test_circular_monodromy(self, beta):
    tag = index_theory.classify(monodromy.monodromy_e0_exact(beta))
    self.assertEqual(tag.class_label,
                     index_theory.analytic_e0_tables(beta).normal_form)
    expected = index_theory.expected_tag_e0(beta)
    test_utils.assert_spectrum_close(tag.eigenvalues(), expected.eigenvalues(),
                                     rtol=1e-6)

  def test_tag_matrix_round_trips(self):
    tag = NormalFormTag((BasicNormalForm(index_theory.R, np.exp(2j)),
                         BasicNormalForm(index_theory.D, 4.0)))
    self.assertEqual(index_theory.classify(index_theory.tag_matrix(tag)).class_label,
                     tag.class_label)


class NullityTest(parameterized.TestCase):

  @parameterized.parameters(
      (I2, 1.0, 2),
      (N1_PLUS, 1.0, 1),
      (-I2, 1.0, 0),
      (-I2, -1.0, 2),
  )
  def test_nullity(self, block, omega, expected):
    m = index_theory.diamond(block, test_utils.hyperbolic_block(2.0))
    self.assertEqual(index_theory.nullity(m, omega), expected)

  def test_rotation_nullity(self):
    m = index_theory.diamond(test_utils.rotation_block(1.0),
                             test_utils.hyperbolic_block(2.0))
    self.assertEqual(index_theory.nullity(m, np.exp(1j)), 1)
    self.assertEqual(index_theory.nullity(m, np.exp(-1j)), 1)
    self.assertEqual(index_theory.nullity(m, 1.0), 0)


class SplittingTest(parameterized.TestCase):

  def test_rotation(self):
    tag = NormalFormTag((BasicNormalForm(index_theory.R, np.exp(1j)),))
    self.assertEqual(index_theory.splitting_numbers(tag, np.exp(1j)),
                     index_theory.SplittingPair(0, 1))
    self.assertEqual(index_theory.splitting_numbers(tag, np.exp(-1j)),
                     index_theory.SplittingPair(1, 0))
    self.assertEqual(index_theory.splitting_numbers(tag, 1.0),
                     index_theory.SplittingPair(0, 0))

  @parameterized.parameters(
      (1.0, 0, (1, 1)),
      (1.0, 1, (1, 1)),
      (1.0, -1, (0, 0)),
      (-1.0, -1, (1, 1)),
      (-1.0, 1, (0, 0)),
  )
  def test_n1(self, lam, b, expected):
    tag = NormalFormTag((BasicNormalForm(index_theory.N1, lam, b),))
    self.assertEqual(index_theory.splitting_numbers(tag, lam),
                     index_theory.SplittingPair(*expected))

  def test_propagate_circular(self):
    tag = index_theory.expected_tag_e0(1.4)
    self.assertEqual(index_theory.propagate_index(3, tag, -1.0), 4)
    self.assertEqual(index_theory.propagate_index(3, tag, 1.0), 3)

  @parameterized.parameters(0.5, 2.0, 3.5, 6.0)
  def test_propagate_matches_tables(self, beta):
    tables = index_theory.analytic_e0_tables(beta)
    tag = index_theory.expected_tag_e0(beta)
    self.assertEqual(index_theory.propagate_index(tables.i_1, tag, -1.0),
                     tables.i_minus1)


class E0TablesTest(parameterized.TestCase):

  @parameterized.named_parameters(
      ("boundary", 0.0, (0, 3, 2, 0), "I2<>N1(1,1)"),
      ("below_half", 0.5, (3, 0, 2, 0), "R(0,pi)<>D(2)"),
      ("equal_masses", 1.4, (3, 0, 4, 0), "R(pi,2pi)<>D(2)"),
      ("gamma_start", test_utils.BETA_HAT_2, (3, 2, 4, 0), "I2<>D(2)"),
      ("xi_start", test_utils.BETA_HAT_3_2, (3, 0, 2, 2), "-I2<>D(2)"),
  )
  def test_tables(self, beta, indices, label):
    tables = index_theory.analytic_e0_tables(beta)
    self.assertEqual(
        (tables.i_1, tables.nu_1, tables.i_minus1, tables.nu_minus1), indices)
    self.assertEqual(tables.normal_form, label)

  def test_brackets(self):
    tables = index_theory.analytic_e0_tables(1.4)
    self.assertEqual(tables.integer_bracket, (0.0, test_utils.BETA_HAT_2))
    self.assertAlmostEqual(tables.half_bracket[0], test_utils.BETA_HAT_3_2)
    self.assertAlmostEqual(tables.half_bracket[1], test_utils.BETA_HAT_5_2)

  def test_theta(self):
    self.assertAlmostEqual(index_theory.analytic_e0_tables(1.4).theta,
                           1.6299, places=4)
    self.assertEqual(index_theory.analytic_e0_tables(0.0).theta, 1.0)
    self.assertAlmostEqual(
        index_theory.analytic_e0_tables(1.4).rotation_angle,
        (2 * math.pi * 1.6299) % (2 * math.pi), places=3)

  def test_no_expected_tag_on_degenerate_points(self):
    self.assertIsNone(index_theory.expected_tag_e0(test_utils.BETA_HAT_2))


if __name__ == "__main__":
  absltest.main()
