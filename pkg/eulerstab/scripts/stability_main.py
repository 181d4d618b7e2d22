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
r"""Stability reports, atlases and validation for elliptic Euler solutions.

Usage:
====================
eulerstab point --beta=1.4 --ecc=0.3 --omega=0,1
eulerstab point --masses=0.3333333,0.3333333,0.3333334 --ecc=0
eulerstab atlas --beta_max=12 --e_max=0.9 --e_steps=91 --out=/tmp/atlas
eulerstab e0-tables --beta_grid=0,1.4,2.71221
eulerstab masses --masses=1,2,3
eulerstab validate --checks=delta_identity,e0_index_tables

Every verb prints one JSON document. Module errors are printed as
{"error": {...}} and turn into exit code 2 (input), 3 (convergence) or
4 (classification).
"""

import dataclasses
import os
from typing import Any, Callable, List, Mapping

from absl import app
from absl import flags
from absl import logging
from eulerstab import atlas
from eulerstab import central_config
from eulerstab import index_theory
from eulerstab import monodromy as monodromy_lib
from eulerstab import spectral
from eulerstab import utils
from eulerstab import validation

FLAGS = flags.FLAGS

flags.DEFINE_float("beta", None, "Mass parameter beta.")
flags.DEFINE_float("ecc", 0.0, "Eccentricity e in [0, 1).")
flags.DEFINE_string(
    "masses", None,
    "Comma-separated masses m1,m2,m3; beta is computed from them.")
flags.DEFINE_multi_string(
    "omega", [],
    "Additional unit-circle points for `point`, as 're,im' or a real +-1.")
flags.DEFINE_float("beta_max", 12.0, "Upper end of the atlas beta window.")
flags.DEFINE_float("e_max", 0.9, "Largest atlas eccentricity.")
flags.DEFINE_integer("e_steps", 91, "Number of atlas e slices, including 0.")
flags.DEFINE_integer("grid_beta_steps", 25,
                     "Number of beta intervals of the region grid.")
flags.DEFINE_integer("grid_e_stride", 10,
                     "Every this many e slices carries a region-grid row.")
flags.DEFINE_list("beta_grid", None, "Betas for `e0-tables`.")
flags.DEFINE_float("p", 1.0, "Semi-latus rectum used for sigma in `masses`.")
flags.DEFINE_string(
    "out", None,
    "Output file for JSON reports, or output directory for `atlas`.")
flags.DEFINE_string(
    "config", None,
    "Optional 'key = value' file of tolerance overrides. Preset other flags "
    "with --flagfile.")
flags.DEFINE_list("checks", None,
                  "Checks to run in `validate`. Runs all if not specified.")
flags.DEFINE_float("integrator_rtol", None,
                   "Overrides the relative tolerance of the ODE integrator.")
flags.DEFINE_boolean("allow_high_ecc", False,
                     "Allow eccentricities above %s." % utils.DEFAULT_ECC_CAP)
flags.DEFINE_integer(
    "max_workers", None,
    "Worker pool size; defaults to $%s or the CPU count." %
    utils.MAX_WORKERS_ENV)

_EXIT_FAILED = 1
_TOLERANCE_FIELDS = {f.name: f for f in dataclasses.fields(utils.Tolerances)}


def read_tolerance_file(path: str) -> Mapping[str, str]:
  """Reads tolerance overrides from a config file.

  Args:
    path: the config file.

  Returns:
    the entries, left for `build_tolerances`.

  Raises:
    ConfigurationError: on keys that are not tolerances.
  """
  entries = utils.load_config_file(path)
  for key in entries:
    if key in _TOLERANCE_FIELDS:
      continue
    if key in FLAGS:
      raise utils.ConfigurationError(
          f"{path}: {key!r} is a flag; preset flags with --flagfile.")
    raise utils.ConfigurationError(f"{path}: unknown tolerance {key!r}.")
  return entries


def build_tolerances(entries: Mapping[str, str]) -> utils.Tolerances:
  changes = {}
  for key, value in entries.items():
    kind = type(_TOLERANCE_FIELDS[key].default)
    try:
      changes[key] = kind(float(value)) if kind is int else kind(value)
    except ValueError as e:
      raise utils.ConfigurationError(
          f"Bad value {value!r} for tolerance {key}.") from e
  if FLAGS.integrator_rtol is not None:
    changes["integrator_rtol"] = FLAGS.integrator_rtol
  return utils.DEFAULT_TOLERANCES.replace(**changes)


def parse_omega(text: str) -> complex:
  parts = [p.strip() for p in text.split(",")]
  try:
    if len(parts) == 1:
      omega = complex(float(parts[0]), 0.0)
    elif len(parts) == 2:
      omega = complex(float(parts[0]), float(parts[1]))
    else:
      raise ValueError(text)
  except ValueError as e:
    raise utils.InputError(f"Cannot parse omega {text!r}.") from e
  utils.check_unit(omega, tol=1e-9)
  return omega / abs(omega)


def _ecc() -> float:
  return utils.check_eccentricity(FLAGS.ecc, allow_high=FLAGS.allow_high_ecc)


def _beta_and_config():
  """Resolves beta from --masses or --beta."""
  if FLAGS.masses:
    config = central_config.central_config(
        central_config.MassTriple.parse(FLAGS.masses), FLAGS.p)
    return config.beta, config
  if FLAGS.beta is None:
    raise utils.InputError("Either --beta or --masses is required.")
  return FLAGS.beta, None


# ------------------------------------------------------------------ verbs ----


def cmd_point(tolerances: utils.Tolerances) -> Mapping[str, Any]:
  """Monodromy, indices, normal form and case of one (beta, e)."""
  beta, config = _beta_and_config()
  ecc = _ecc()
  system = monodromy_lib.EssentialSystem(beta, ecc)
  m = monodromy_lib.monodromy(system, tolerances)
  tag = index_theory.classify(m, tolerances)

  omegas = [1.0 + 0j, -1.0 + 0j] + [parse_omega(o) for o in FLAGS.omega]
  indices = []
  for omega in omegas:
    pair = spectral.index_pair(beta, ecc, omega, tolerances)
    matrix_nullity = index_theory.nullity(m, omega, tolerances)
    if matrix_nullity != pair.nullity:
      logging.warning(
          "Nullity at omega=%s: operator %d, monodromy %d; the point is "
          "within tolerance of a degenerate point.", omega, pair.nullity,
          matrix_nullity)
    indices.append({
        "omega": omega,
        "index": pair.index,
        "nullity": pair.nullity,
        "truncation": pair.truncation,
        "monodromy_nullity": matrix_nullity,
        "nullity_agreement": matrix_nullity == pair.nullity,
    })
  i_1 = indices[0]["index"]

  window = min(atlas.MAX_BETA, beta + 1.0)
  case = None
  if beta + 1.0 <= atlas.MAX_BETA:
    plus = atlas.compute_slice(1.0, ecc, window, tolerances)
    minus = atlas.compute_slice(-1.0, ecc, window, tolerances)
    case = atlas.theorem_case(beta, ecc, plus, minus, tolerances)

  report = {
      "beta": beta,
      "ecc": ecc,
      "monodromy": m,
      "backward_residual": monodromy_lib.backward_residual(system, m,
                                                           tolerances),
      "stability": monodromy_lib.stability_summary(m),
      "indices": indices,
      "propagated_i_minus1": index_theory.propagate_index(i_1, tag, -1.0),
      "normal_form": tag,
      "case": case,
  }
  if config is not None:
    report["central_config"] = config
  if ecc == 0.0:
    report["e0_tables"] = index_theory.analytic_e0_tables(beta)
  return report


def cmd_atlas(tolerances: utils.Tolerances) -> Mapping[str, Any]:
  """Traces the curves, fills the grid and writes the atlas files."""
  utils.check_eccentricity(FLAGS.e_max, allow_high=FLAGS.allow_high_ecc)
  config = atlas.AtlasConfig(
      beta_max=FLAGS.beta_max, e_max=FLAGS.e_max, e_steps=FLAGS.e_steps,
      grid_beta_steps=FLAGS.grid_beta_steps,
      grid_e_stride=FLAGS.grid_e_stride, tolerances=tolerances,
      max_workers=FLAGS.max_workers)
  result = atlas.build_atlas(config)
  out_dir = FLAGS.out or "atlas_out"
  paths = atlas.write_atlas(result, out_dir)
  summary = result.summary()
  return {
      "files": paths,
      "num_curves": len(result.curves),
      "curves": [c["label"] for c in summary["curves"]],
      "grid_conflicts": summary["grid_conflicts"],
      "e0_row_matches": summary["e0_row_matches"],
      "diagnostics": summary["diagnostics"],
  }


def cmd_e0_tables(tolerances: utils.Tolerances) -> List[Any]:
  """Closed-form circular-orbit tables for --beta or --beta_grid."""
  del tolerances  # Unused.
  if FLAGS.beta_grid:
    try:
      betas = [float(b) for b in FLAGS.beta_grid]
    except ValueError as e:
      raise utils.InputError(f"Bad --beta_grid: {FLAGS.beta_grid}") from e
  elif FLAGS.beta is not None:
    betas = [FLAGS.beta]
  else:
    raise utils.InputError("Either --beta or --beta_grid is required.")
  return [index_theory.analytic_e0_tables(b) for b in betas]


def cmd_masses(tolerances: utils.Tolerances) -> Mapping[str, Any]:
  """Central-configuration report of --masses."""
  del tolerances  # Unused.
  if not FLAGS.masses:
    raise utils.InputError("--masses is required.")
  masses = central_config.MassTriple.parse(FLAGS.masses)
  config = central_config.central_config(masses, FLAGS.p)
  report = {
      "central_config": config,
      "delta_closed_form": central_config.delta_closed_form(masses, config.x),
      "symmetry": central_config.symmetry_report(masses),
  }
  if not masses.is_degenerate:
    report["positions"] = central_config.positions(masses, config.x,
                                                   config.alpha)
    report["pair_distances"] = central_config.pair_distances(
        masses, config.x, config.alpha)
    report["continuity"] = central_config.continuity_report(masses)
  return report


def cmd_validate(tolerances: utils.Tolerances):
  """Runs the registered checks."""
  return validation.run_checks(FLAGS.checks, tolerances)


_VERBS: Mapping[str, Callable[[utils.Tolerances], Any]] = {
    "point": cmd_point,
    "atlas": cmd_atlas,
    "e0-tables": cmd_e0_tables,
    "masses": cmd_masses,
    "validate": cmd_validate,
}


def _emit(obj: Any, to_file: bool):
  text = utils.dumps_json(obj)
  if to_file and FLAGS.out:
    directory = os.path.dirname(FLAGS.out)
    if directory:
      os.makedirs(directory, exist_ok=True)
    with open(FLAGS.out, "w") as f:
      f.write(text + "\n")
    logging.info("Wrote %s", FLAGS.out)
  else:
    print(text)


def main(argv):
  if len(argv) != 2 or argv[1] not in _VERBS:
    _emit(utils.InputError(
        "Expected exactly one verb out of %s, got %s." %
        (sorted(_VERBS), argv[1:])).to_json_dict(), to_file=False)
    return utils.EXIT_INPUT
  verb = argv[1]
  try:
    entries = read_tolerance_file(FLAGS.config) if FLAGS.config else {}
    tolerances = build_tolerances(entries)
    logging.info("Running %s", verb)
    result = _VERBS[verb](tolerances)
  except utils.EulerStabError as e:
    logging.error("%s failed: %s", verb, e)
    _emit(e.to_json_dict(), to_file=False)
    return e.exit_code
  _emit(result, to_file=verb != "atlas")
  if verb == "validate" and not result.passed:
    return _EXIT_FAILED
  return utils.EXIT_OK


def console_entry_point():
  app.run(main)


if __name__ == "__main__":
  console_entry_point()
