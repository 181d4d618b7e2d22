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
"""Registry of end-to-end checks run by `eulerstab validate`."""

import dataclasses
import math
import time
from typing import Any, Callable, List, Mapping, MutableMapping, Optional, Sequence

from absl import logging
from eulerstab import atlas
from eulerstab import central_config
from eulerstab import index_theory
from eulerstab import monodromy as monodromy_lib
from eulerstab import spectral
from eulerstab import utils
import numpy as np

_SEED = 20210
_CHECK_BETA_MAX = 8.0
_E0_LAW_BETAS = tuple(np.linspace(0.0, 7.0, 50))
_BOUNDARY_ECCS = (0.0, 0.3, 0.6, 0.9)
_MONOTONICITY_ECCS = (0.2, 0.5)
_MONOTONICITY_SAMPLES = 41


@dataclasses.dataclass
class CheckOutcome:
  """What a check function reports; any failure fails the check."""
  observed: Any = None
  expected: Any = None
  failures: List[Mapping[str, Any]] = dataclasses.field(default_factory=list)

  def fail(self, **record):
    self.failures.append(record)


@dataclasses.dataclass(frozen=True)
class Check:
  name: str
  fn: Callable[[utils.Tolerances], CheckOutcome]
  description: str = ""


@dataclasses.dataclass(frozen=True)
class CheckResult:
  name: str
  passed: bool
  observed: Any
  expected: Any
  failures: Sequence[Mapping[str, Any]]
  seconds: float
  error: Optional[Mapping[str, Any]] = None


class CheckRegistry(object):
  """Registry of named validation checks."""
  _REGISTRY: MutableMapping[str, Check] = {}

  @classmethod
  def add(cls, name: str, fn: Callable[[utils.Tolerances], CheckOutcome],
          description: str = "") -> Check:
    """Adds a check function to the registry."""
    if name in cls._REGISTRY:
      raise ValueError("Attempting to register duplicate check: %s" % name)
    check = Check(name, fn, description)
    cls._REGISTRY[name] = check
    return check

  @classmethod
  def remove(cls, name):
    """Remove check from the registry, if it exists."""
    if name in cls._REGISTRY:
      del cls._REGISTRY[name]

  @classmethod
  def get(cls, name) -> Check:
    if name not in cls._REGISTRY:
      raise ValueError("Check name not registered: %s" % name)
    return cls._REGISTRY[name]

  @classmethod
  def names(cls):
    return cls._REGISTRY.keys()

  @classmethod
  def reset(cls):
    """Removes all of the registered checks."""
    cls._REGISTRY = {}


# -------------------------------------------------------------- helpers ------


def cluster_mean_error(computed: Sequence[complex], expected: Sequence[complex],
                       cluster_tol: float = 1e-6) -> float:
  """Largest relative error between matched eigenvalue clusters.

  Coinciding expected eigenvalues are compared through the mean of their
  computed counterparts, which stays accurate when a Jordan block splits them.
  """
  computed = list(np.asarray(computed, dtype=complex))
  expected = np.asarray(expected, dtype=complex)
  worst = 0.0
  used = np.zeros(len(expected), dtype=bool)
  for i, z in enumerate(expected):
    if used[i]:
      continue
    group = np.abs(expected - z) <= cluster_tol
    used |= group
    size = int(np.sum(group))
    target = complex(np.mean(expected[group]))
    computed.sort(key=lambda w: abs(w - target))
    mean = complex(np.mean(computed[:size]))
    del computed[:size]
    worst = max(worst, abs(mean - target) / max(1.0, abs(target)))
  return worst


def _index(beta, ecc, omega, tolerances) -> spectral.IndexPair:
  return spectral.index_pair(beta, ecc, omega, tolerances)


def _slices(ecc, tolerances, beta_max=_CHECK_BETA_MAX):
  return (atlas.compute_slice(1.0, ecc, beta_max, tolerances),
          atlas.compute_slice(-1.0, ecc, beta_max, tolerances))


# --------------------------------------------------------------- checks ------


def check_e0_eigenvalue_law(tolerances: utils.Tolerances) -> CheckOutcome:
  out = CheckOutcome(expected="relative error < 1e-7")
  worst = 0.0
  for beta in _E0_LAW_BETAS:
    m = monodromy_lib.monodromy(monodromy_lib.EssentialSystem(beta, 0.0),
                                tolerances)
    err = cluster_mean_error(monodromy_lib.spectrum(m),
                             monodromy_lib.e0_eigenvalues(beta))
    worst = max(worst, err)
    if err >= 1e-7:
      out.fail(beta=beta, error=err)
  out.observed = worst
  return out


def check_e0_index_tables(tolerances: utils.Tolerances) -> CheckOutcome:
  betas = list(np.linspace(0.0, 7.0, 100)) + [
      index_theory.beta_hat(n) for n in (2, 3, 1.5, 2.5)]
  out = CheckOutcome(observed=len(betas), expected="closed-form tables")
  for beta in betas:
    for omega in (1.0, -1.0):
      got = _index(beta, 0.0, omega, tolerances)
      want = index_theory.e0_index(beta, omega)
      if (got.index, got.nullity) != want:
        out.fail(beta=beta, omega=omega, got=[got.index, got.nullity],
                 want=list(want))
  return out


def check_beta_zero_boundary(tolerances: utils.Tolerances) -> CheckOutcome:
  out = CheckOutcome(expected={"1": [0, 3], "other": [2, 0]})
  observed = []
  for ecc in _BOUNDARY_ECCS:
    for omega, want in ((1.0, (0, 3)), (-1.0, (2, 0)),
                        (np.exp(1j * math.pi / 3), (2, 0))):
      got = _index(0.0, ecc, omega, tolerances)
      observed.append([ecc, got.index, got.nullity])
      if (got.index, got.nullity) != want:
        out.fail(ecc=ecc, omega=complex(omega), got=[got.index, got.nullity],
                 want=list(want))
  out.observed = observed
  return out


def check_nullity_agreement(tolerances: utils.Tolerances) -> CheckOutcome:
  rng = np.random.default_rng(_SEED)
  triples = [(float(rng.uniform(0.05, 7.0)), float(rng.uniform(0.0, 0.7)),
              float(rng.choice([1.0, -1.0]))) for _ in range(30)]
  triples += [(index_theory.beta_hat(2), 0.0, 1.0),
              (index_theory.beta_hat(1.5), 0.0, -1.0), (0.0, 0.3, 1.0)]
  out = CheckOutcome(observed=len(triples), expected="equal nullities")
  for beta, ecc, omega in triples:
    operator = _index(beta, ecc, omega, tolerances).nullity
    m = monodromy_lib.monodromy(monodromy_lib.EssentialSystem(beta, ecc),
                                tolerances)
    matrix = index_theory.nullity(m, omega, tolerances)
    if operator != matrix:
      out.fail(beta=beta, ecc=ecc, omega=omega, operator=operator,
               monodromy=matrix)
  return out


def check_delta_identity(tolerances: utils.Tolerances) -> CheckOutcome:
  del tolerances  # Unused.
  rng = np.random.default_rng(_SEED + 1)
  out = CheckOutcome(expected="|delta - (beta + 1)| < 1e-10")
  worst = 0.0
  for values in rng.uniform(0.01, 1.0, size=(1000, 3)):
    masses = central_config.MassTriple(*values)
    x = central_config.solve_euler_quintic(masses)
    beta = central_config.mass_parameter(masses, x)
    err = abs(central_config.delta_from_geometry(masses, x) - (beta + 1))
    worst = max(worst, err)
    if err >= 1e-10:
      out.fail(masses=list(masses.values), error=err)
  out.observed = worst
  return out


def check_parity_and_multiplicity(tolerances: utils.Tolerances
                                  ) -> CheckOutcome:
  out = CheckOutcome(expected="odd i_1; kernel dimension 2")
  for ecc in (0.2, 0.5, 0.8):
    for beta in np.linspace(0.25, 7.0, 10):
      got = _index(beta, ecc, 1.0, tolerances)
      if got.index % 2 != 1:
        out.fail(kind="parity", beta=beta, ecc=ecc, i_1=got.index)
    for root in atlas.degenerate_betas(1.0, ecc, _CHECK_BETA_MAX, tolerances):
      kernel = spectral.kernel_by_recurrence(root.beta, ecc, "both",
                                             tolerances)
      if root.multiplicity != 2 or kernel.dimension != 2:
        out.fail(kind="multiplicity", beta=root.beta, ecc=ecc,
                 multiplicity=root.multiplicity, kernel=kernel.dimension)
  return out


def check_curve_starts(tolerances: utils.Tolerances) -> CheckOutcome:
  step = 1e-3
  curves = []
  for omega in (1.0, -1.0):
    slices = [atlas.compute_slice(omega, e, _CHECK_BETA_MAX, tolerances)
              for e in (0.0, step)]
    curves += atlas.trace_curves(omega, slices, tolerances)
  wanted = ("Gamma_1", "Gamma_2", "Xi_1^-", "Xi_1^+", "Xi_2^-", "Xi_2^+")
  out = CheckOutcome(expected={"start": 1e-6, "slope": 0.05})
  observed = {}
  for label in wanted:
    curve = next((c for c in curves if c.label == label), None)
    if curve is None or len(curve.samples) < 2:
      out.fail(label=label, reason="not traced to e=%s" % step)
      continue
    start_err = abs(curve.start_beta - curve.expected_start)
    slope = (curve.samples[1].beta - curve.samples[0].beta) / step
    observed[label] = {"start_error": start_err, "slope": slope}
    if start_err >= 1e-6 or abs(slope) >= 0.05:
      out.fail(label=label, start_error=start_err, slope=slope)
  out.observed = observed
  return out


def check_ordering(tolerances: utils.Tolerances) -> CheckOutcome:
  e_grid = (0.0, 0.1, 0.3, 0.5, 0.7)
  curves = []
  for omega in (1.0, -1.0):
    slices = [atlas.compute_slice(omega, e, _CHECK_BETA_MAX, tolerances)
              for e in e_grid]
    curves += atlas.trace_curves(omega, slices, tolerances)
  out = CheckOutcome(expected="no violations")
  observed = {}
  for ecc in e_grid[1:]:
    report = atlas.order_check(curves, ecc, tolerances)
    observed[str(ecc)] = list(report.sequence)
    for v in report.violations:
      out.fail(ecc=ecc, **v)
  out.observed = observed
  return out


def check_region_normal_forms(tolerances: utils.Tolerances) -> CheckOutcome:
  ecc = 0.3
  plus, minus = _slices(ecc, tolerances)
  xi_lo, xi_hi, gamma = minus.beta_at(1), minus.beta_at(2), plus.beta_at(1)
  out = CheckOutcome(expected=["ii", "v", "vii", "viii"])
  if None in (xi_lo, xi_hi, gamma):
    out.fail(reason="missing degenerate points at e=%s" % ecc)
    return out
  samples = {"ii": xi_lo / 2, "v": (xi_lo + xi_hi) / 2,
            "vii": (xi_hi + gamma) / 2, "viii": gamma}
  observed = {}
  for case, beta in samples.items():
    predicted = atlas.theorem_case(beta, ecc, plus, minus, tolerances)
    if predicted.case != case:
      out.fail(case=case, beta=beta, reason="region is empty",
               located=predicted.case)
      continue
    try:
      record = atlas.region_classify(beta, ecc, plus, minus, tolerances)
    except (utils.ClassificationConflictError,
            utils.AmbiguousClassificationError) as e:
      out.fail(case=case, beta=beta, error=str(e))
      continue
    observed[case] = {"beta": beta, "indices": list(record.indices),
                      "normal_form": record.normal_form}
  out.observed = observed
  return out


def check_index_bound(tolerances: utils.Tolerances) -> CheckOutcome:
  out = CheckOutcome(expected="i_1 <= 4n + 2")
  count = 0
  for n in (1, 2, 3):
    for ecc in (0.0, 0.2, 0.4, 0.6):
      threshold = spectral.index_bound_threshold(n, ecc)
      if threshold <= 0:
        continue
      for beta in np.linspace(0.0, threshold, 6)[:-1]:
        count += 1
        got = _index(beta, ecc, 1.0, tolerances)
        if got.index > 4 * n + 2:
          out.fail(n=n, ecc=ecc, beta=beta, i_1=got.index)
  out.observed = count
  return out


def check_monotonicity(tolerances: utils.Tolerances) -> CheckOutcome:
  out = CheckOutcome(expected="non-decreasing; jump equals multiplicity")
  delta = 1e-3
  for ecc in _MONOTONICITY_ECCS:
    for omega in (1.0, -1.0):
      previous = -1
      for beta in np.linspace(0.0, _CHECK_BETA_MAX, _MONOTONICITY_SAMPLES):
        got = _index(beta, ecc, omega, tolerances).index
        if got < previous:
          out.fail(kind="decrease", ecc=ecc, omega=omega, beta=beta)
        previous = got
      roots = atlas.degenerate_betas(omega, ecc, _CHECK_BETA_MAX, tolerances)
      betas = [r.beta for r in roots]
      for root in roots:
        if any(0 < abs(b - root.beta) < 2 * delta for b in betas):
          continue
        before = _index(root.beta - delta, ecc, omega, tolerances).index
        after = _index(root.beta + delta, ecc, omega, tolerances).index
        if after - before != root.multiplicity:
          out.fail(kind="jump", ecc=ecc, omega=omega, beta=root.beta,
                   jump=after - before, multiplicity=root.multiplicity)
  return out


def check_numerical_hygiene(tolerances: utils.Tolerances) -> CheckOutcome:
  out = CheckOutcome(expected={"symplectic": tolerances.symplectic_tol,
                               "backward": tolerances.backward_tol})
  worst = [0.0, 0.0]
  for beta in (0.0, 1.4, 3.0, 7.0):
    for ecc in (0.0, 0.3, 0.6, 0.9):
      system = monodromy_lib.EssentialSystem(beta, ecc)
      m = monodromy_lib.monodromy(system, tolerances)
      back = monodromy_lib.backward_residual(system, m, tolerances)
      worst = [max(worst[0], m.symplectic_defect), max(worst[1], back)]
      if (m.symplectic_defect >= tolerances.symplectic_tol or
          back >= tolerances.backward_tol):
        out.fail(beta=beta, ecc=ecc, symplectic=m.symplectic_defect,
                 backward=back)
  out.observed = {"symplectic": worst[0], "backward": worst[1]}
  return out


def check_positivity(tolerances: utils.Tolerances) -> CheckOutcome:
  out = CheckOutcome(expected="A(-1, e) >= 0, > 0 off omega = 1")
  for ecc in (0.0, 0.5, 0.8):
    for omega in (1.0, -1.0, np.exp(1j * math.pi / 3)):
      report = spectral.positivity_check_A_minus1(ecc, omega,
                                                  tolerances=tolerances)
      if not report.passed:
        out.fail(ecc=ecc, omega=complex(omega), smallest=report.smallest,
                 near_null=report.near_null,
                 kernel_residual=report.kernel_residual)
  return out


def check_integrator_vs_expm(tolerances: utils.Tolerances) -> CheckOutcome:
  out = CheckOutcome(expected="relative difference < 1e-8")
  worst = 0.0
  for beta in (0.5, 1.4, 3.0, 7.0):
    m = monodromy_lib.monodromy(monodromy_lib.EssentialSystem(beta, 0.0),
                                tolerances)
    exact = monodromy_lib.monodromy_e0_exact(beta)
    err = utils.max_norm(m.entries - exact.entries) / max(1.0, exact.norm)
    worst = max(worst, err)
    if err >= 1e-8:
      out.fail(beta=beta, error=err)
  out.observed = worst
  return out


def check_region_constancy(tolerances: utils.Tolerances) -> CheckOutcome:
  out = CheckOutcome(expected="constant indices on 5x5 sample points")
  fractions = np.linspace(0.2, 0.8, 5)
  regions = {"ii": [], "vii": []}
  for ecc in np.linspace(0.1, 0.3, 5):
    plus, minus = _slices(ecc, tolerances, beta_max=4.0)
    xi_lo, xi_hi, gamma = minus.beta_at(1), minus.beta_at(2), plus.beta_at(1)
    if None in (xi_lo, xi_hi, gamma):
      out.fail(ecc=ecc, reason="missing degenerate points")
      continue
    for f in fractions:
      regions["ii"].append((ecc, f * xi_lo))
      regions["vii"].append((ecc, xi_hi + f * (gamma - xi_hi)))
  observed = {}
  for name, points in regions.items():
    seen = set()
    for ecc, beta in points:
      seen.add((_index(beta, ecc, 1.0, tolerances).index,
                _index(beta, ecc, -1.0, tolerances).index))
    observed[name] = sorted(seen)
    if len(seen) != 1:
      out.fail(region=name, values=sorted(seen))
  out.observed = observed
  return out


_DEFAULT_CHECKS = (
    ("e0_eigenvalue_law", check_e0_eigenvalue_law,
     "Circular-orbit multipliers match the closed form."),
    ("e0_index_tables", check_e0_index_tables,
     "Galerkin indices at e = 0 match the closed-form tables."),
    ("beta_zero_boundary", check_beta_zero_boundary,
     "Indices on the beta = 0 axis."),
    ("nullity_agreement", check_nullity_agreement,
     "Operator and monodromy nullities agree."),
    ("delta_identity", check_delta_identity,
     "delta equals beta + 1 for random masses."),
    ("parity_and_multiplicity", check_parity_and_multiplicity,
     "i_1 is odd and 1-degenerate points have multiplicity 2."),
    ("curve_starts", check_curve_starts,
     "Curves start at the circular thresholds and leave them flat."),
    ("ordering", check_ordering,
     "Degenerate curves keep their order and never cross."),
    ("region_normal_forms", check_region_normal_forms,
     "Computed indices and normal forms follow the case list at e = 0.3."),
    ("index_bound", check_index_bound, "Upper bound on i_1."),
    ("monotonicity", check_monotonicity,
     "Indices grow with beta by the nullity at each degenerate point."),
    ("numerical_hygiene", check_numerical_hygiene,
     "Symplectic defect and backward residual of monodromies."),
    ("positivity", check_positivity,
     "The comparison operator A(-1, e) is non-negative."),
    ("integrator_vs_expm", check_integrator_vs_expm,
     "Integrated circular monodromy matches the matrix exponential."),
    ("region_constancy", check_region_constancy,
     "Indices are constant inside a region."),
)


def register_default_checks():
  for name, fn, description in _DEFAULT_CHECKS:
    if name not in CheckRegistry.names():
      CheckRegistry.add(name, fn, description)


register_default_checks()


# --------------------------------------------------------------- running -----


def run_check(name: str,
              tolerances: utils.Tolerances = utils.DEFAULT_TOLERANCES
              ) -> CheckResult:
  check = CheckRegistry.get(name)
  start = time.monotonic()
  error = None
  try:
    outcome = check.fn(tolerances)
  except utils.EulerStabError as e:
    outcome = CheckOutcome()
    error = e.to_json_dict()["error"]
  seconds = time.monotonic() - start
  passed = error is None and not outcome.failures
  logging.info("Check %s %s in %.1fs", name, "passed" if passed else "FAILED",
               seconds)
  return CheckResult(name=name, passed=passed, observed=outcome.observed,
                     expected=outcome.expected,
                     failures=tuple(outcome.failures), seconds=seconds,
                     error=error)


@dataclasses.dataclass(frozen=True)
class ValidationSummary:
  results: Sequence[CheckResult]

  @property
  def passed(self) -> bool:
    return all(r.passed for r in self.results)

  def to_json_dict(self) -> Mapping[str, Any]:
    return {
        "passed": self.passed,
        "num_checks": len(self.results),
        "num_failed": sum(1 for r in self.results if not r.passed),
        "checks": [dataclasses.asdict(r) for r in self.results],
    }


def run_checks(names: Optional[Sequence[str]] = None,
               tolerances: utils.Tolerances = utils.DEFAULT_TOLERANCES
               ) -> ValidationSummary:
  """Runs the named checks, or all registered ones, in registration order."""
  if not names:
    names = list(CheckRegistry.names())
  unknown = [n for n in names if n not in CheckRegistry.names()]
  if unknown:
    raise utils.InputError(
        "Unknown checks %s; registered: %s" %
        (unknown, sorted(CheckRegistry.names())), unknown=unknown)
  return ValidationSummary(tuple(run_check(n, tolerances) for n in names))
