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
"""Tests for eulerstab.scripts.stability_main."""

import contextlib
import io
import json
import os

from absl import flags
from absl.testing import absltest
from absl.testing import flagsaver
from eulerstab import atlas
from eulerstab import spectral
from eulerstab import test_utils
from eulerstab import utils
from eulerstab import validation
from eulerstab.scripts import stability_main

FLAGS = flags.FLAGS
mock = absltest.mock


class StabilityMainTest(absltest.TestCase):

  def setUp(self):
    super().setUp()
    if not FLAGS.is_parsed():
      FLAGS.mark_as_parsed()
    self.enter_context(flagsaver.flagsaver())

  def _run(self, *argv):
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
      code = stability_main.main(["eulerstab"] + list(argv))
    text = out.getvalue()
    return code, json.loads(text) if text else None

  def _write_config(self, text):
    path = os.path.join(self.create_tempdir().full_path, "run.cfg")
    with open(path, "w") as f:
      f.write(text)
    return path

  def test_e0_tables(self):
    FLAGS.beta_grid = ["0", "1.4"]
    code, obj = self._run("e0-tables")
    self.assertEqual(code, 0)
    self.assertLen(obj, 2)
    self.assertEqual(obj[0]["normal_form"], "I2<>N1(1,1)")
    self.assertEqual([obj[1]["i_1"], obj[1]["i_minus1"]], [3, 4])

  def test_masses(self):
    FLAGS.masses = "1,1,1"
    code, obj = self._run("masses")
    self.assertEqual(code, 0)
    self.assertAlmostEqual(obj["central_config"]["beta"], 1.4, places=12)
    self.assertLen(obj["pair_distances"], 3)

  def test_degenerate_masses(self):
    FLAGS.masses = "0,1,0"
    code, obj = self._run("masses")
    self.assertEqual(code, 0)
    self.assertEqual(obj["central_config"]["alpha"], "inf")
    self.assertNotIn("positions", obj)

  def test_point_equal_masses(self):
    FLAGS.masses = "1,1,1"
    code, obj = self._run("point")
    self.assertEqual(code, 0)
    self.assertAlmostEqual(obj["beta"], 1.4, places=12)
    indices = [(i["index"], i["nullity"]) for i in obj["indices"]]
    self.assertEqual(indices, [(3, 0), (4, 0)])
    self.assertTrue(all(i["nullity_agreement"] for i in obj["indices"]))
    self.assertEqual(obj["case"]["case"], "vii")
    self.assertEqual(obj["case"]["normal_form"], "R(pi,2pi)<>D(2)")
    self.assertEqual(obj["normal_form"], "R(pi,2pi)<>D(2)")
    self.assertEqual(obj["e0_tables"]["i_minus1"], 4)

  def test_point_beta_zero(self):
    FLAGS.beta = 0.0
    FLAGS.ecc = 0.3
    code, obj = self._run("point")
    self.assertEqual(code, 0)
    indices = [(i["index"], i["nullity"]) for i in obj["indices"]]
    self.assertEqual(indices, [(0, 3), (2, 0)])
    self.assertEqual(obj["case"]["case"], "i")
    self.assertNotIn("e0_tables", obj)

  def test_point_on_first_curve(self):
    FLAGS.beta = test_utils.BETA_HAT_2
    code, obj = self._run("point")
    self.assertEqual(code, 0)
    self.assertEqual((obj["indices"][0]["index"], obj["indices"][0]["nullity"]),
                     (3, 2))
    self.assertEqual(obj["indices"][0]["monodromy_nullity"], 2)
    self.assertEqual(obj["case"]["case"], "viii")
    self.assertEqual(obj["case"]["normal_form"], "I2<>D(2)")

  def test_point_flags_nullity_disagreement(self):
    FLAGS.beta = 1.4
    fake = spectral.IndexPair(3, 1, truncation=32)
    with mock.patch.object(stability_main.spectral, "index_pair",
                           return_value=fake):
      with mock.patch.object(stability_main.logging, "warning") as warning:
        code, obj = self._run("point")
    self.assertEqual(code, 0)
    self.assertEqual([i["nullity_agreement"] for i in obj["indices"]],
                     [False, False])
    messages = [c[0][0] for c in warning.call_args_list]
    self.assertLen([m for m in messages if m.startswith("Nullity")], 2)

  def test_atlas(self):
    out_dir = self.create_tempdir().full_path
    FLAGS.beta_max = 3.0
    FLAGS.e_max = 0.1
    FLAGS.e_steps = 2
    FLAGS.grid_beta_steps = 2
    FLAGS.grid_e_stride = 1
    FLAGS.max_workers = 1
    FLAGS.out = out_dir
    code, obj = self._run("atlas")
    self.assertEqual(code, 0)
    self.assertGreater(obj["num_curves"], 0)
    for name in ("curves.csv", "grid.csv", "atlas.json"):
      self.assertTrue(os.path.exists(os.path.join(out_dir, name)), name)
    with open(os.path.join(out_dir, "grid.csv")) as f:
      lines = f.read().splitlines()
    self.assertEqual(lines[0], ",".join(atlas.GRID_HEADER))
    self.assertLen(lines, 1 + 2 * 3)
    with open(os.path.join(out_dir, "atlas.json")) as f:
      self.assertIn("curves", json.load(f))

  def test_bad_verb(self):
    code, obj = self._run("plot")
    self.assertEqual(code, utils.EXIT_INPUT)
    self.assertEqual(obj["error"]["type"], "InputError")
    code, _ = self._run()
    self.assertEqual(code, utils.EXIT_INPUT)

  def test_missing_beta(self):
    code, obj = self._run("e0-tables")
    self.assertEqual(code, utils.EXIT_INPUT)
    self.assertRegex(obj["error"]["message"], "--beta")

  def test_bad_eccentricity(self):
    FLAGS.beta = 1.0
    FLAGS.ecc = 1.5
    code, obj = self._run("point")
    self.assertEqual(code, utils.EXIT_INPUT)
    self.assertEqual(obj["error"]["details"]["ecc"], 1.5)

  def test_convergence_exit_code(self):

    def stuck(tolerances):
      raise utils.ConvergenceError("stuck", last_values=[1])

    with mock.patch.dict(stability_main._VERBS, {"point": stuck}):
      code, obj = self._run("point")
    self.assertEqual(code, utils.EXIT_CONVERGENCE)
    self.assertEqual(obj["error"]["details"]["last_values"], [1])

  def test_validate_failure_exit_code(self):
    result = validation.CheckResult(name="x", passed=False, observed=None,
                                    expected=None, failures=({"a": 1},),
                                    seconds=0.0)
    with mock.patch.object(validation, "run_checks",
                           return_value=validation.ValidationSummary((result,))):
      code, obj = self._run("validate")
    self.assertEqual(code, 1)
    self.assertFalse(obj["passed"])

  def test_out_file(self):
    path = os.path.join(self.create_tempdir().full_path, "sub", "t.json")
    FLAGS.beta = 1.4
    FLAGS.out = path
    code, obj = self._run("e0-tables")
    self.assertEqual(code, 0)
    self.assertIsNone(obj)
    with open(path) as f:
      self.assertEqual(json.load(f)[0]["i_1"], 3)

  def test_flagfile_and_tolerance_file(self):
    flagfile = self._write_config("--beta=3.0\n--beta_grid=0,2\n")
    argv = FLAGS(["eulerstab", "--flagfile=" + flagfile, "--beta=1.0"])
    self.assertEqual(argv, ["eulerstab"])
    self.assertEqual(FLAGS.beta, 1.0)
    self.assertEqual(FLAGS.beta_grid, ["0", "2"])
    path = self._write_config("scan_step = 0.05\nmax_truncation = 64\n")
    entries = stability_main.read_tolerance_file(path)
    self.assertEqual(entries, {"scan_step": "0.05", "max_truncation": "64"})
    tolerances = stability_main.build_tolerances(entries)
    self.assertEqual(tolerances.scan_step, 0.05)
    self.assertEqual(tolerances.max_truncation, 64)
    self.assertIsInstance(tolerances.max_truncation, int)

  def test_integrator_rtol_flag(self):
    FLAGS.integrator_rtol = 1e-9
    self.assertEqual(stability_main.build_tolerances({}).integrator_rtol, 1e-9)

  def test_config_file_errors(self):
    FLAGS.config = self._write_config("colour = blue\n")
    FLAGS.beta = 1.4
    code, obj = self._run("e0-tables")
    self.assertEqual(code, utils.EXIT_INPUT)
    self.assertEqual(obj["error"]["type"], "ConfigurationError")
    with self.assertRaisesRegex(utils.ConfigurationError, "--flagfile"):
      stability_main.read_tolerance_file(self._write_config("e_steps = 3\n"))
    with self.assertRaises(utils.ConfigurationError):
      stability_main.build_tolerances({"scan_step": "small"})

  def test_parse_omega(self):
    self.assertAlmostEqual(stability_main.parse_omega("0,1"), 1j)
    self.assertEqual(stability_main.parse_omega("-1"), -1)
    for text in ("2", "a", "1,0,0"):
      with self.assertRaises(utils.InputError):
        stability_main.parse_omega(text)


if __name__ == "__main__":
  absltest.main()
