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
"""Tests for eulerstab.atlas."""

import json
import os

from absl.testing import absltest
from absl.testing import parameterized
from eulerstab import atlas
from eulerstab import index_theory
from eulerstab import test_utils
from eulerstab import utils

mock = absltest.mock
make_slice = test_utils.make_slice

B2 = test_utils.BETA_HAT_2
B3 = test_utils.BETA_HAT_3
B3_2 = test_utils.BETA_HAT_3_2
B5_2 = test_utils.BETA_HAT_5_2

PLUS = make_slice(1.0, 0.3, [[2.5, 2.5], [7.0, 7.0]])
MINUS = make_slice(-1.0, 0.3, [[1.0], [1.2], [4.0], [4.5]])


def _circular_slices():
  plus = [make_slice(1.0, 0.0, [[B2, B2]]),
          make_slice(1.0, 0.1, [[2.6, 2.6]])]
  minus = [make_slice(-1.0, 0.0, [[B3_2, B3_2], [B5_2, B5_2]]),
           make_slice(-1.0, 0.1, [[0.95], [1.05], [4.8], [5.1]])]
  return plus, minus


def _predicted_region(beta, ecc, plus, minus, tolerances):
  case = atlas.theorem_case(beta, ecc, plus, minus, tolerances)
  return atlas.RegionRecord(
      beta=beta, ecc=ecc, predicted=case, i_1=case.i_1, nu_1=case.nu_1,
      i_minus1=case.i_minus1, nu_minus1=case.nu_minus1,
      normal_form=case.normal_form)


class DegenerateBetasTest(parameterized.TestCase):

  def test_circular_periodic(self):
    roots = atlas.degenerate_betas(1.0, 0.0, beta_max=8.0)
    self.assertLen(roots, 2)
    for root, expected, ordinals in zip(roots, (B2, B3), ((1, 2), (3, 4))):
      self.assertAlmostEqual(root.beta, expected, delta=1e-7)
      self.assertEqual(root.multiplicity, 2)
      self.assertEqual(root.ordinals, ordinals)

  def test_circular_antiperiodic(self):
    roots = atlas.degenerate_betas(-1.0, 0.0, beta_max=6.0)
    self.assertEqual([r.multiplicity for r in roots], [2, 2])
    self.assertAlmostEqual(roots[0].beta, B3_2, delta=1e-7)
    self.assertAlmostEqual(roots[1].beta, B5_2, delta=1e-7)

  def test_eccentric_gamma_stays_double(self):
    roots = atlas.degenerate_betas(1.0, 0.3, beta_max=8.0)
    self.assertNotEmpty(roots)
    self.assertEqual(roots[0].multiplicity, 2)
    self.assertEqual(roots[0].ordinals, (1, 2))
    self.assertGreater(roots[0].truncation, 16)

  def test_no_crossings(self):
    self.assertEmpty(atlas.degenerate_betas(1.0, 0.0, beta_max=1.0))

  @parameterized.parameters(0.0, -1.0, 51.0)
  def test_bad_window(self, beta_max):
    with self.assertRaises(utils.InputError):
      atlas.degenerate_betas(1.0, 0.0, beta_max=beta_max)

  def test_compute_slice_records_failure(self):
    with mock.patch.object(atlas, "degenerate_betas",
                           side_effect=utils.ConvergenceError("stuck")):
      s = atlas.compute_slice(-1.0, 0.4, 8.0)
    self.assertEqual(s.error, "stuck")
    self.assertEqual(s.roots, ())
    self.assertEqual(s.omega, -1.0)

  def test_compute_slices_keeps_order(self):
    def fake(omega, ecc, beta_max, tolerances):
      del beta_max, tolerances  # Unused.
      return make_slice(omega, ecc, [[ecc + 1]])

    with mock.patch.object(atlas, "compute_slice", side_effect=fake):
      slices = atlas.compute_slices(1.0, [0.0, 0.1, 0.2, 0.3], 4.0,
                                    max_workers=3)
    self.assertEqual([s.ecc for s in slices], [0.0, 0.1, 0.2, 0.3])


class SliceTest(absltest.TestCase):

  def test_lookup(self):
    self.assertEqual(PLUS.count, 4)
    self.assertEqual(PLUS.beta_at(2), 2.5)
    self.assertEqual(PLUS.root_at(3).ordinals, (3, 4))
    self.assertIsNone(PLUS.beta_at(5))


class CurveTest(parameterized.TestCase):

  @parameterized.parameters(
      (1.0, 1, "Gamma_1", 1),
      (1.0, 3, "Gamma_2", 2),
      (-1.0, 1, "Xi_1^-", 1),
      (-1.0, 2, "Xi_1^+", 1),
      (-1.0, 3, "Xi_2^-", 2),
  )
  def test_curve_label(self, omega, ordinal, label, n):
    self.assertEqual(atlas.curve_label(omega, ordinal), (label, n))

  def test_curve_label_needs_real_omega(self):
    with self.assertRaises(utils.InputError):
      atlas.curve_label(1j, 1)

  def test_trace(self):
    _, minus = _circular_slices()
    curves = atlas.trace_curves(-1.0, minus)
    self.assertEqual([c.label for c in curves],
                     ["Xi_1^-", "Xi_1^+", "Xi_2^-", "Xi_2^+"])
    for c in curves:
      self.assertEmpty(c.diagnostics)
      self.assertLen(c.samples, 2)
    self.assertEqual(curves[1].sample_at(0.1).beta, 1.05)
    self.assertAlmostEqual(curves[2].expected_start, B5_2)

  def test_failed_slice_truncates(self):
    plus, _ = _circular_slices()
    plus.append(atlas.AtlasSlice(omega=1.0, ecc=0.2, roots=(), error="boom"))
    (curve,) = atlas.trace_curves(1.0, plus)
    self.assertLen(curve.samples, 2)
    self.assertRegex(curve.diagnostics[0], "slice failed: boom")

  def test_missing_point_truncates(self):
    plus = [make_slice(1.0, 0.0, [[B2, B2], [B3, B3]]),
            make_slice(1.0, 0.1, [[2.6, 2.6]])]
    curves = atlas.trace_curves(1.0, plus)
    self.assertEqual([c.label for c in curves], ["Gamma_1", "Gamma_2"])
    self.assertEmpty(curves[0].diagnostics)
    self.assertRegex(curves[1].diagnostics[0], "no degenerate point")

  def test_slope_cap(self):
    plus = [make_slice(1.0, 0.0, [[B2, B2]]),
            make_slice(1.0, 0.01, [[B2 + 1.0, B2 + 1.0]])]
    (curve,) = atlas.trace_curves(1.0, plus)
    self.assertLen(curve.samples, 1)
    self.assertRegex(curve.diagnostics[0], "slope")

  def test_start_mismatch(self):
    (curve,) = atlas.trace_curves(1.0, [make_slice(1.0, 0.0, [[3.0, 3.0]])])
    self.assertRegex(curve.diagnostics[0], "differs")
    self.assertEqual(curve.to_json_dict()["start_beta"], 3.0)

  def test_bad_grids(self):
    plus, _ = _circular_slices()
    with self.assertRaises(utils.InputError):
      atlas.trace_curves(1.0, plus[1:])
    with self.assertRaises(utils.InputError):
      atlas.trace_curves(1.0, [plus[0], plus[0]])
    with self.assertRaises(utils.ConvergenceError):
      atlas.trace_curves(
          1.0, [atlas.AtlasSlice(omega=1.0, ecc=0.0, roots=(), error="x")])


class OrderTest(absltest.TestCase):

  def _curves(self):
    plus, minus = _circular_slices()
    return atlas.trace_curves(-1.0, minus) + atlas.trace_curves(1.0, plus)

  def test_ordered(self):
    curves = self._curves()
    for ecc in (0.0, 0.1):
      report = atlas.order_check(curves, ecc)
      self.assertTrue(report.passed, msg=report.violations)
    self.assertEqual([label for label, _ in atlas.order_check(curves,
                                                              0.1).sequence],
                     ["Xi_1^-", "Xi_1^+", "Gamma_1", "Xi_2^-", "Xi_2^+"])

  def test_violations(self):
    curves = self._curves()
    gamma = [c for c in curves if c.label == "Gamma_1"][0]
    gamma.samples[1] = atlas.CurveSample(ecc=0.1, beta=4.9, multiplicity=1,
                                         truncation=32)
    report = atlas.order_check(curves, 0.1)
    self.assertFalse(report.passed)
    kinds = sorted(v["kind"] for v in report.violations)
    self.assertEqual(kinds, ["gamma_split", "order"])

  def test_xi_separations(self):
    _, minus = _circular_slices()
    separations = atlas.xi_separations(minus)
    self.assertLen(separations, 2)
    self.assertEqual([s["n"] for s in separations], [1, 2])
    self.assertAlmostEqual(separations[0]["width"], 0.1)


class TheoremCaseTest(parameterized.TestCase):

  @parameterized.parameters(
      (0.0, "i", (0, 3, 2, 0), "I2<>N1(1,1)"),
      (0.5, "ii", (3, 0, 2, 0), "R(0,pi)<>D(2)"),
      (1.0, "iv", (3, 0, 2, 1), "N1(-1,-1)<>D(2)"),
      (1.1, "v", (3, 0, 3, 0), "D(-2)<>D(2)"),
      (1.2, "vi", (3, 0, 3, 1), "N1(-1,1)<>D(2)"),
      (2.0, "vii", (3, 0, 4, 0), "R(pi,2pi)<>D(2)"),
      (2.5, "viii", (3, 2, 4, 0), "I2<>D(2)"),
      (3.0, "ix", (5, 0, 4, 0), "R(0,pi)<>D(2)"),
      (4.2, "xii", (5, 0, 5, 0), "D(-2)<>D(2)"),
      (5.0, "xiv", (5, 0, 6, 0), "R(pi,2pi)<>D(2)"),
      (7.0, "viii", (5, 2, 6, 0), "I2<>D(2)"),
      (9.0, "ix", (7, 0, 6, 0), "R(0,pi)<>D(2)"),
  )
  def test_cases(self, beta, case, indices, label):
    predicted = atlas.theorem_case(beta, 0.3, PLUS, MINUS)
    self.assertEqual(predicted.case, case)
    self.assertEqual(predicted.indices, indices)
    self.assertEqual(predicted.normal_form, label)

  def test_coinciding_xi(self):
    predicted = atlas.theorem_case(
        B3_2, 0.0, make_slice(1.0, 0.0, [[B2, B2]]),
        make_slice(-1.0, 0.0, [[B3_2, B3_2]]))
    self.assertEqual(predicted.case, "iii")
    self.assertEqual(predicted.indices, (3, 0, 2, 2))
    self.assertEqual(predicted.normal_form, "-I2<>D(2)")

  def test_bad_inputs(self):
    with self.assertRaises(utils.InputError):
      atlas.theorem_case(-1.0, 0.3, PLUS, MINUS)
    with self.assertRaises(utils.InputError):
      atlas.theorem_case(1.0, 0.4, PLUS, MINUS)
    failed = atlas.AtlasSlice(omega=1.0, ecc=0.3, roots=(), error="x")
    with self.assertRaises(utils.ConvergenceError):
      atlas.theorem_case(1.0, 0.3, failed, MINUS)


class RegionTest(parameterized.TestCase):

  def test_record_conflict(self):
    record = _predicted_region(2.0, 0.3, PLUS, MINUS, utils.DEFAULT_TOLERANCES)
    self.assertFalse(record.conflict)
    self.assertTrue(
        atlas.RegionRecord(**dict(vars(record), i_1=1)).conflict)
    self.assertTrue(
        atlas.RegionRecord(**dict(vars(record), normal_form="CS")).conflict)
    self.assertFalse(
        atlas.RegionRecord(**dict(vars(record), normal_form=None)).conflict)

  def test_region_classify_raises_on_conflict(self):
    record = _predicted_region(2.0, 0.3, PLUS, MINUS, utils.DEFAULT_TOLERANCES)
    with mock.patch.object(
        atlas, "compute_region",
        return_value=atlas.RegionRecord(**dict(vars(record), i_minus1=2))):
      with self.assertRaises(utils.ClassificationConflictError) as cm:
        atlas.region_classify(2.0, 0.3, PLUS, MINUS)
    self.assertEqual(cm.exception.details["computed"]["indices"], [3, 0, 2, 0])

  def test_region_classify_raises_on_ambiguity(self):
    record = _predicted_region(2.0, 0.3, PLUS, MINUS, utils.DEFAULT_TOLERANCES)
    with mock.patch.object(
        atlas, "compute_region",
        return_value=atlas.RegionRecord(**dict(vars(record), normal_form=None,
                                               note="close to 1"))):
      with self.assertRaises(utils.AmbiguousClassificationError):
        atlas.region_classify(2.0, 0.3, PLUS, MINUS)

  @parameterized.parameters(0.5, 1.4)
  def test_circular_region(self, beta):
    plus = make_slice(1.0, 0.0, [[B2, B2]])
    minus = make_slice(-1.0, 0.0, [[B3_2, B3_2], [B5_2, B5_2]])
    record = atlas.region_classify(beta, 0.0, plus, minus)
    tables = index_theory.analytic_e0_tables(beta)
    self.assertEqual(record.indices, (tables.i_1, tables.nu_1, tables.i_minus1,
                                      tables.nu_minus1))
    self.assertEqual(record.normal_form, tables.normal_form)


class AtlasTest(absltest.TestCase):

  def _config(self):
    return atlas.AtlasConfig(beta_max=6.0, e_max=0.1, e_steps=2,
                             grid_beta_steps=4, grid_e_stride=1, max_workers=1)

  def _build(self):
    plus, minus = _circular_slices()
    with mock.patch.object(atlas, "compute_slices",
                           side_effect=[plus, minus]):
      with mock.patch.object(atlas, "compute_region",
                             side_effect=_predicted_region):
        return atlas.build_atlas(self._config())

  def test_config_validation(self):
    with self.assertRaises(utils.InputError):
      atlas.AtlasConfig(beta_max=60.0)
    with self.assertRaises(utils.InputError):
      atlas.AtlasConfig(e_steps=1)
    with self.assertRaises(utils.InputError):
      atlas.AtlasConfig(e_max=1.0)
    config = atlas.AtlasConfig()
    self.assertLen(config.e_grid, 91)
    self.assertEqual(config.e_grid[0], 0.0)
    self.assertAlmostEqual(config.e_grid[10], 0.1)
    self.assertLen(config.grid_betas, 26)

  def test_build(self):
    result = self._build()
    self.assertEqual([c.label for c in result.curves],
                     ["Xi_1^-", "Xi_1^+", "Gamma_1", "Xi_2^-", "Xi_2^+"])
    self.assertTrue(all(r.passed for r in result.order_reports))
    self.assertLen(result.grid, 10)
    self.assertEmpty(result.conflicts)
    self.assertTrue(result.e0_row_matches())
    self.assertEqual(result.nondegenerate_band(), [(0.0, B2), (0.1, 2.6)])
    self.assertLen(result.separations, 2)

  def test_write_is_deterministic(self):
    result = self._build()
    first = atlas.write_atlas(result, self.create_tempdir().full_path)
    second = atlas.write_atlas(result, self.create_tempdir().full_path)
    for key in ("curves", "grid", "summary"):
      with open(first[key]) as f1, open(second[key]) as f2:
        self.assertEqual(f1.read(), f2.read())
    with open(first["curves"]) as f:
      lines = f.read().splitlines()
    self.assertEqual(lines[0], ",".join(atlas.CURVES_HEADER))
    self.assertLen(lines, 1 + 10)
    self.assertTrue(lines[1].startswith("Xi_1^-,0,"))
    with open(first["grid"]) as f:
      self.assertEqual(f.readline().strip(), ",".join(atlas.GRID_HEADER))
    with open(first["summary"]) as f:
      summary = json.load(f)
    self.assertEqual(summary["grid_conflicts"], 0)
    self.assertTrue(summary["e0_row_matches"])
    self.assertEqual(os.path.basename(first["summary"]),
                     atlas.SUMMARY_FILENAME)


if __name__ == "__main__":
  absltest.main()
