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
"""Degenerate curves and the region atlas of the (beta, e) rectangle.

For fixed e and omega, the k-th smallest eigenvalue of A(beta, e) / (beta + 1)
is continuous and non-increasing in beta, so each one crosses zero at most
once. Degenerate points are the crossings; counted with multiplicity and in
increasing beta they define the curves

  Gamma_n = beta_{2n-1}(1, e) = beta_{2n}(1, e),
  Xi_n^-  = beta_{2n-1}(-1, e),  Xi_n^+ = beta_{2n}(-1, e).

Between consecutive curves the indices and the normal form of the monodromy
are constant and follow a fixed case list, which `theorem_case` encodes.
"""

import concurrent.futures
import csv
import dataclasses
import math
import os
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from absl import logging
from eulerstab import index_theory
from eulerstab import monodromy as monodromy_lib
from eulerstab import spectral
from eulerstab import utils
import numpy as np
from scipy import optimize

MAX_BETA = 50.0
CURVES_FILENAME = "curves.csv"
GRID_FILENAME = "grid.csv"
SUMMARY_FILENAME = "atlas.json"
CURVES_HEADER = ("label", "e", "beta", "multiplicity", "N_used")
GRID_HEADER = ("e", "beta", "i_1", "nu_1", "i_minus1", "nu_minus1",
               "normal_form", "case", "conflict")


# ----------------------------------- degenerate points -----------------------


@dataclasses.dataclass(frozen=True)
class DegenerateRoot:
  """A degenerate point of one slice.

  Attributes:
    beta: the root.
    multiplicity: number of eigenvalues crossing zero there.
    ordinals: 1-based positions of the root counted with multiplicity.
    truncation: Galerkin N at which the root was certified.
  """
  beta: float
  multiplicity: int
  ordinals: Tuple[int, ...]
  truncation: int


@dataclasses.dataclass(frozen=True)
class AtlasSlice:
  """All degenerate points at one eccentricity, or the reason there are none."""
  omega: complex
  ecc: float
  roots: Tuple[DegenerateRoot, ...]
  error: Optional[str] = None

  def root_at(self, ordinal: int) -> Optional[DegenerateRoot]:
    for root in self.roots:
      if ordinal in root.ordinals:
        return root
    return None

  def beta_at(self, ordinal: int) -> Optional[float]:
    root = self.root_at(ordinal)
    return None if root is None else root.beta

  @property
  def count(self) -> int:
    return sum(r.multiplicity for r in self.roots)


def _scan_grid(beta_max: float, step: float) -> np.ndarray:
  return np.linspace(0.0, beta_max, int(math.ceil(beta_max / step)) + 1)


def _crossing(family: spectral.OperatorFamily, k: int, lo: float, hi: float,
              xtol: float) -> float:
  """Zero of the k-th smallest rescaled eigenvalue in [lo, hi]."""

  def f(beta):
    return float(family.smallest(beta, k + 1)[k])

  f_lo, f_hi = f(lo), f(hi)
  if f_hi == 0.0:
    return hi
  if f_lo < 0.0 or f_hi > 0.0:
    raise utils.ConvergenceError(
        f"Eigenvalue {k} does not change sign on [{lo}, {hi}].",
        last_values=[f_lo, f_hi])
  return optimize.brentq(f, lo, hi, xtol=xtol)


def _refine(ecc: float, twist: spectral.BoundaryTwist, k: int, beta: float,
            truncation: int, tolerances: utils.Tolerances
            ) -> Tuple[float, int]:
  """Re-solves a crossing at doubled truncations until it stops moving."""
  half_width = tolerances.scan_step
  while True:
    finer = 2 * truncation
    if finer > tolerances.max_truncation:
      raise utils.ConvergenceError(
          f"Degenerate point near beta={beta}, e={ecc} still moves at "
          f"N={truncation}.", last_values=[beta], truncation=truncation)
    family = spectral.operator_family(ecc, twist, finer)
    lo, hi = max(0.0, beta - half_width), beta + half_width
    refined = _crossing(family, k, lo, hi, tolerances.root_xtol)
    shift = abs(refined - beta)
    logging.debug("Crossing %d at e=%s: N=%d -> %d moved %.3g", k, ecc,
                  truncation, finer, shift)
    if shift <= tolerances.refine_tol:
      return refined, finer
    beta, truncation = refined, finer


def degenerate_betas(omega, ecc: float, beta_max: float = 12.0,
                     tolerances: utils.Tolerances = utils.DEFAULT_TOLERANCES,
                     truncation: Optional[int] = None) -> List[DegenerateRoot]:
  """All beta in (0, beta_max] where nu_omega(beta, e) >= 1.

  The smallest rescaled Galerkin eigenvalues are scanned on a grid of step
  `tolerances.scan_step`; each eigenvalue that changes sign is solved with
  Brent's method, the root is re-solved at doubled truncation, and roots
  closer than `tolerances.merge_tol` are merged with their multiplicities
  summed.

  Args:
    omega: a unit complex number or BoundaryTwist.
    ecc: eccentricity in [0, 1).
    beta_max: upper end of the window, at most 50.
    tolerances: scan, root and merge tolerances.
    truncation: starting Galerkin N; defaults to `default_truncation`.

  Returns:
    roots ordered by beta.

  Raises:
    InputError: if beta_max is out of range.
    ConvergenceError: if a root keeps moving under refinement.
  """
  if not 0 < beta_max <= MAX_BETA:
    raise utils.InputError(
        f"beta_max must lie in (0, {MAX_BETA}], got {beta_max}.")
  ecc = utils.check_eccentricity(ecc)
  twist = spectral.as_twist(omega)
  if truncation is None:
    truncation = spectral.default_truncation(ecc, beta_max)
  family = spectral.operator_family(ecc, twist, truncation)

  start = family.problem(0.0).eigenvalues()
  null_tol = spectral.null_tolerance(family.problem(0.0), tolerances)
  baseline = int(np.sum(start < null_tol))
  final = int(np.sum(family.problem(beta_max, rescaled=True).eigenvalues() < 0))
  if final <= baseline:
    return []

  grid = _scan_grid(beta_max, tolerances.scan_step)
  table = np.array([family.smallest(b, final) for b in grid])
  crossings = []
  for k in range(baseline, final):
    below = np.nonzero(table[1:, k] < 0)[0]
    if not below.size:
      continue
    j = int(below[0]) + 1
    beta = _crossing(family, k, grid[j - 1], grid[j], tolerances.root_xtol)
    beta, used = _refine(ecc, twist, k, beta, truncation, tolerances)
    crossings.append((beta, k - baseline + 1, used))
  if not crossings:
    return []

  roots = []
  cluster = [crossings[0]]
  for item in crossings[1:] + [None]:
    if item is not None and item[0] - cluster[-1][0] <= tolerances.merge_tol:
      cluster.append(item)
      continue
    roots.append(DegenerateRoot(
        beta=float(np.mean([c[0] for c in cluster])),
        multiplicity=len(cluster),
        ordinals=tuple(c[1] for c in cluster),
        truncation=max(c[2] for c in cluster)))
    if item is not None:
      cluster = [item]
  logging.debug("omega=%s e=%s: degenerate points %s", twist.omega, ecc,
                [(r.beta, r.multiplicity) for r in roots])
  return roots


def compute_slice(omega, ecc: float, beta_max: float,
                  tolerances: utils.Tolerances = utils.DEFAULT_TOLERANCES
                  ) -> AtlasSlice:
  """degenerate_betas wrapped so that a failing slice becomes a record."""
  twist = spectral.as_twist(omega)
  try:
    roots = degenerate_betas(twist, ecc, beta_max, tolerances)
  except utils.ConvergenceError as e:
    logging.warning("Slice omega=%s e=%s failed: %s", twist.omega, ecc, e)
    return AtlasSlice(omega=twist.omega, ecc=float(ecc), roots=(),
                      error=str(e))
  return AtlasSlice(omega=twist.omega, ecc=float(ecc), roots=tuple(roots))


def _map_ordered(fn: Callable, items: Sequence, max_workers: Optional[int]
                 ) -> List:
  """Applies fn concurrently and returns results in input order."""
  workers = utils.max_workers(max_workers)
  if workers == 1 or len(items) <= 1:
    return [fn(item) for item in items]
  with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
    futures = [executor.submit(fn, item) for item in items]
    return [f.result() for f in futures]


def compute_slices(omega, e_grid: Sequence[float], beta_max: float,
                   tolerances: utils.Tolerances = utils.DEFAULT_TOLERANCES,
                   max_workers: Optional[int] = None) -> List[AtlasSlice]:
  logging.info("Computing %d slices for omega=%s up to beta=%s", len(e_grid),
               omega, beta_max)
  return _map_ordered(
      lambda e: compute_slice(omega, e, beta_max, tolerances), list(e_grid),
      max_workers)


# ---------------------------------------- curves -----------------------------


@dataclasses.dataclass(frozen=True)
class CurveSample:
  ecc: float
  beta: float
  multiplicity: int
  truncation: int


@dataclasses.dataclass
class DegeneracyCurve:
  """A traced Gamma_n or Xi_n^+- curve.

  Attributes:
    omega: +1 or -1.
    label: "Gamma_n", "Xi_n^-" or "Xi_n^+".
    n: the curve number.
    ordinal: position counted with multiplicity that the curve follows.
    samples: samples ordered by e.
    diagnostics: reasons the curve stops before the last slice.
  """
  omega: float
  label: str
  n: int
  ordinal: int
  samples: List[CurveSample] = dataclasses.field(default_factory=list)
  diagnostics: List[str] = dataclasses.field(default_factory=list)

  @property
  def start_beta(self) -> Optional[float]:
    if self.samples and self.samples[0].ecc == 0.0:
      return self.samples[0].beta
    return None

  @property
  def expected_start(self) -> float:
    if self.omega > 0:
      return index_theory.beta_hat(self.n + 1)
    return index_theory.beta_hat(self.n + 0.5)

  def sample_at(self, ecc: float) -> Optional[CurveSample]:
    for s in self.samples:
      if abs(s.ecc - ecc) <= 1e-12:
        return s
    return None

  def to_json_dict(self) -> Mapping[str, object]:
    return {
        "label": self.label,
        "omega": self.omega,
        "start_beta": self.start_beta,
        "expected_start": self.expected_start,
        "num_samples": len(self.samples),
        "e_range": ([self.samples[0].ecc, self.samples[-1].ecc]
                    if self.samples else None),
        "diagnostics": self.diagnostics,
    }


def _sign(omega) -> int:
  omega = complex(omega)
  if abs(omega - 1) <= 1e-12:
    return 1
  if abs(omega + 1) <= 1e-12:
    return -1
  raise utils.InputError(
      f"Curves are traced for omega = +-1 only, got {omega}.")


def curve_label(omega, ordinal: int) -> Tuple[str, int]:
  """The curve name and number for a position counted with multiplicity."""
  n = (ordinal + 1) // 2
  if _sign(omega) > 0:
    return "Gamma_%d" % n, n
  return "Xi_%d^%s" % (n, "-" if ordinal % 2 else "+"), n


def trace_curves(omega, slices: Sequence[AtlasSlice],
                 tolerances: utils.Tolerances = utils.DEFAULT_TOLERANCES
                 ) -> List[DegeneracyCurve]:
  """Links degenerate points of consecutive slices into labelled curves.

  A curve follows one position counted with multiplicity (Gamma_n the
  (2n-1)-th point at omega = 1, Xi_n^- and Xi_n^+ the (2n-1)-th and 2n-th at
  omega = -1). A curve is truncated, with a diagnostic, at the first slice
  that fails, lacks the point, or moves it faster than `slope_cap`.

  Args:
    omega: 1 or -1.
    slices: slices ascending in e, the first one at e = 0.
    tolerances: provides `slope_cap`.

  Returns:
    the curves present on the first slice, ordered by start.
  """
  sign = _sign(omega)
  if not slices or slices[0].ecc != 0.0:
    raise utils.InputError("The e grid must start at 0.")
  if slices[0].error:
    raise utils.ConvergenceError(
        f"The circular slice failed: {slices[0].error}")
  eccs = [s.ecc for s in slices]
  if any(b <= a for a, b in zip(eccs, eccs[1:])):
    raise utils.InputError(f"The e grid must be strictly ascending: {eccs}.")

  ordinals = range(1, slices[0].count + 1, 2 if sign > 0 else 1)
  curves = []
  for ordinal in ordinals:
    label, n = curve_label(omega, ordinal)
    curve = DegeneracyCurve(omega=float(sign), label=label, n=n,
                            ordinal=ordinal)
    for s in slices:
      if s.error:
        curve.diagnostics.append(
            "truncated at e=%s: slice failed: %s" % (s.ecc, s.error))
        break
      root = s.root_at(ordinal)
      if root is None:
        curve.diagnostics.append(
            "truncated at e=%s: no degenerate point in the beta window" % s.ecc)
        break
      if curve.samples:
        prev = curve.samples[-1]
        slope = abs(root.beta - prev.beta) / (s.ecc - prev.ecc)
        if slope > tolerances.slope_cap:
          curve.diagnostics.append(
              "truncated at e=%s: slope %.6g exceeds %s" %
              (s.ecc, slope, tolerances.slope_cap))
          break
      curve.samples.append(CurveSample(ecc=s.ecc, beta=root.beta,
                                       multiplicity=root.multiplicity,
                                       truncation=root.truncation))
    if abs(curve.start_beta - curve.expected_start) > 1e-6:
      curve.diagnostics.append(
          "start %.17g differs from %.17g" %
          (curve.start_beta, curve.expected_start))
    for d in curve.diagnostics:
      logging.warning("%s: %s", label, d)
    curves.append(curve)
  logging.info("Traced %d curves for omega=%s", len(curves), sign)
  return curves


# ---------------------------------------- ordering ---------------------------


@dataclasses.dataclass(frozen=True)
class OrderReport:
  ecc: float
  sequence: Tuple[Tuple[str, float], ...]
  violations: Tuple[Mapping[str, object], ...]

  @property
  def passed(self) -> bool:
    return not self.violations


def _order_key(curve: DegeneracyCurve) -> Tuple[int, int]:
  if curve.omega > 0:
    return curve.n, 2
  return curve.n, 0 if curve.label.endswith("-") else 1


def order_check(curves: Sequence[DegeneracyCurve], ecc: float,
                tolerances: utils.Tolerances = utils.DEFAULT_TOLERANCES
                ) -> OrderReport:
  """Checks 0 < Xi_1^- <= Xi_1^+ < Gamma_1 < Xi_2^- <= Xi_2^+ < Gamma_2 < ...

  Also flags Gamma samples whose two coinciding points have separated.
  """
  present = []
  for curve in sorted(curves, key=_order_key):
    sample = curve.sample_at(ecc)
    if sample is not None:
      present.append((curve, sample))
  violations = []
  if present and present[0][1].beta <= 0:
    violations.append({"kind": "non_positive", "label": present[0][0].label,
                       "beta": present[0][1].beta})
  for (ca, sa), (cb, sb) in zip(present, present[1:]):
    same_pair = (ca.omega < 0 and cb.omega < 0 and ca.n == cb.n)
    if same_pair:
      ok = sb.beta >= sa.beta - tolerances.merge_tol
    else:
      ok = sb.beta - sa.beta > tolerances.merge_tol
    if not ok:
      violations.append({"kind": "order", "first": ca.label,
                         "second": cb.label, "first_beta": sa.beta,
                         "second_beta": sb.beta})
  for curve, sample in present:
    if curve.omega > 0 and sample.multiplicity != 2:
      violations.append({"kind": "gamma_split", "label": curve.label,
                         "beta": sample.beta,
                         "multiplicity": sample.multiplicity})
  for v in violations:
    logging.warning("Ordering violation at e=%s: %s", ecc, v)
  return OrderReport(
      ecc=float(ecc),
      sequence=tuple((c.label, s.beta) for c, s in present),
      violations=tuple(violations))


def xi_separations(slices: Sequence[AtlasSlice],
                   tolerances: utils.Tolerances = utils.DEFAULT_TOLERANCES
                   ) -> List[Mapping[str, float]]:
  """Slices where Xi_n^- and Xi_n^+ are distinct points."""
  out = []
  for s in slices:
    for n in range(1, s.count // 2 + 1):
      lo, hi = s.beta_at(2 * n - 1), s.beta_at(2 * n)
      if lo is None or hi is None:
        continue
      if hi - lo > tolerances.merge_tol:
        out.append({"n": n, "e": s.ecc, "xi_minus": lo, "xi_plus": hi,
                    "width": hi - lo})
  if out:
    logging.info("Xi curves separate at %d slice points", len(out))
  return out


# --------------------------------------- regions -----------------------------


@dataclasses.dataclass(frozen=True)
class TheoremCase:
  """The predicted indices and normal-form class at a point.

  Attributes:
    case: roman numeral of the case list, "i" to "xiv".
    n: curve number the case refers to (0 below Gamma_1).
    i_1, nu_1, i_minus1, nu_minus1: predicted indices.
    normal_form: predicted class label, e.g. "R(0,pi)<>D(2)".
  """
  case: str
  n: int
  i_1: int
  nu_1: int
  i_minus1: int
  nu_minus1: int
  normal_form: str

  @property
  def indices(self) -> Tuple[int, int, int, int]:
    return self.i_1, self.nu_1, self.i_minus1, self.nu_minus1


_LOW_CASES = ("ii", "iii", "iv", "v", "vi", "vii")
_HIGH_CASES = ("ix", "x", "xi", "xii", "xiii", "xiv")


def theorem_case(beta: float, ecc: float, plus: AtlasSlice,
                 minus: AtlasSlice,
                 tolerances: utils.Tolerances = utils.DEFAULT_TOLERANCES
                 ) -> TheoremCase:
  """Locates (beta, e) among the degenerate points and returns its case.

  Args:
    beta: mass parameter, >= 0 and within the slices' window.
    ecc: eccentricity of both slices.
    plus: the omega = 1 slice at ecc.
    minus: the omega = -1 slice at ecc.
    tolerances: points within `merge_tol` of a degenerate point lie on it.

  Returns:
    the TheoremCase.
  """
  if plus.error or minus.error:
    raise utils.ConvergenceError(
        f"No degenerate points at e={ecc}: {plus.error or minus.error}")
  if abs(plus.ecc - ecc) > 1e-12 or abs(minus.ecc - ecc) > 1e-12:
    raise utils.InputError(
        f"Slices at e={plus.ecc}, {minus.ecc} do not match e={ecc}.")
  tol = tolerances.merge_tol
  if beta < 0:
    raise utils.InputError(f"beta must be non-negative, got {beta}.")
  if beta <= tol:
    return TheoremCase("i", 0, 0, 3, 2, 0, "I2<>N1(1,1)")

  gammas = [plus.beta_at(o) for o in range(1, plus.count + 1, 2)]
  for n, gamma in enumerate(gammas, start=1):
    if abs(beta - gamma) <= tol:
      return TheoremCase("viii", n, 2 * n + 1, 2, 2 * n + 2, 0, "I2<>D(2)")
  m = sum(1 for g in gammas if g < beta)
  names = _LOW_CASES if m == 0 else _HIGH_CASES
  lo = minus.beta_at(2 * m + 1)
  hi = minus.beta_at(2 * m + 2)
  lo = math.inf if lo is None else lo
  hi = math.inf if hi is None else hi
  i_1 = 2 * m + 3
  if beta < lo - tol:
    return TheoremCase(names[0], m, i_1, 0, 2 * m + 2, 0, "R(0,pi)<>D(2)")
  if abs(beta - lo) <= tol:
    if hi - lo <= tol:
      return TheoremCase(names[1], m, i_1, 0, 2 * m + 2, 2, "-I2<>D(2)")
    return TheoremCase(names[2], m, i_1, 0, 2 * m + 2, 1, "N1(-1,-1)<>D(2)")
  if beta < hi - tol:
    return TheoremCase(names[3], m, i_1, 0, 2 * m + 3, 0, "D(-2)<>D(2)")
  if abs(beta - hi) <= tol:
    return TheoremCase(names[4], m, i_1, 0, 2 * m + 3, 1, "N1(-1,1)<>D(2)")
  return TheoremCase(names[5], m, i_1, 0, 2 * m + 4, 0, "R(pi,2pi)<>D(2)")


@dataclasses.dataclass(frozen=True)
class RegionRecord:
  """Predicted and computed data of one (beta, e) point."""
  beta: float
  ecc: float
  predicted: TheoremCase
  i_1: int
  nu_1: int
  i_minus1: int
  nu_minus1: int
  normal_form: Optional[str]
  note: Optional[str] = None

  @property
  def indices(self) -> Tuple[int, int, int, int]:
    return self.i_1, self.nu_1, self.i_minus1, self.nu_minus1

  @property
  def conflict(self) -> bool:
    if self.indices != self.predicted.indices:
      return True
    return (self.normal_form is not None and
            self.normal_form != self.predicted.normal_form)


def compute_region(beta: float, ecc: float, plus: AtlasSlice,
                   minus: AtlasSlice,
                   tolerances: utils.Tolerances = utils.DEFAULT_TOLERANCES
                   ) -> RegionRecord:
  """Computes indices and normal form at a point next to its prediction.

  An ambiguous normal form is recorded as None with a note instead of raised.
  """
  predicted = theorem_case(beta, ecc, plus, minus, tolerances)
  i_1 = spectral.index_pair(beta, ecc, 1.0, tolerances)
  i_m1 = spectral.index_pair(beta, ecc, -1.0, tolerances)
  note = None
  try:
    m = monodromy_lib.monodromy(monodromy_lib.EssentialSystem(beta, ecc),
                                tolerances)
    normal_form = index_theory.classify(m, tolerances).class_label
  except utils.AmbiguousClassificationError as e:
    normal_form, note = None, str(e)
  return RegionRecord(beta=float(beta), ecc=float(ecc), predicted=predicted,
                      i_1=i_1.index, nu_1=i_1.nullity, i_minus1=i_m1.index,
                      nu_minus1=i_m1.nullity, normal_form=normal_form,
                      note=note)


def region_classify(beta: float, ecc: float, plus: AtlasSlice,
                    minus: AtlasSlice,
                    tolerances: utils.Tolerances = utils.DEFAULT_TOLERANCES
                    ) -> RegionRecord:
  """compute_region that raises when computation and prediction disagree.

  Raises:
    ClassificationConflictError: on any index or normal-form mismatch.
    AmbiguousClassificationError: if the normal form cannot be decided.
  """
  record = compute_region(beta, ecc, plus, minus, tolerances)
  if record.normal_form is None:
    raise utils.AmbiguousClassificationError(
        f"Normal form at beta={beta}, e={ecc} is ambiguous: {record.note}",
        candidates=[record.predicted.normal_form])
  if record.conflict:
    raise utils.ClassificationConflictError(
        f"Case ({record.predicted.case}) at beta={beta}, e={ecc} predicts "
        f"{record.predicted.indices} {record.predicted.normal_form}, computed "
        f"{record.indices} {record.normal_form}.",
        predicted=dataclasses.asdict(record.predicted),
        computed={"indices": list(record.indices),
                  "normal_form": record.normal_form})
  return record


# ----------------------------------------- atlas -----------------------------


@dataclasses.dataclass(frozen=True)
class AtlasConfig:
  """Window and resolution of an atlas run.

  Attributes:
    beta_max: upper end of the beta window.
    e_max: largest eccentricity.
    e_steps: number of e slices, including e = 0 and e_max.
    grid_beta_steps: region-grid intervals in beta.
    grid_e_stride: every this many slices carries a region-grid row.
    tolerances: numerical tolerances.
    max_workers: worker pool size; None reads the environment.
  """
  beta_max: float = 12.0
  e_max: float = 0.9
  e_steps: int = 91
  grid_beta_steps: int = 25
  grid_e_stride: int = 10
  tolerances: utils.Tolerances = utils.DEFAULT_TOLERANCES
  max_workers: Optional[int] = None

  def __post_init__(self):
    if not 0 < self.beta_max <= MAX_BETA:
      raise utils.InputError(
          f"beta_max must lie in (0, {MAX_BETA}], got {self.beta_max}.")
    utils.check_eccentricity(self.e_max)
    if self.e_steps < 2:
      raise utils.InputError(f"e_steps must be at least 2, got {self.e_steps}.")
    if self.grid_beta_steps < 1 or self.grid_e_stride < 1:
      raise utils.InputError("Grid steps and stride must be positive.")

  @property
  def e_grid(self) -> np.ndarray:
    grid = np.linspace(0.0, self.e_max, self.e_steps)
    return np.array([utils.to_17g(e) for e in grid])

  @property
  def grid_betas(self) -> np.ndarray:
    return np.linspace(0.0, self.beta_max, self.grid_beta_steps + 1)


@dataclasses.dataclass
class AtlasResult:
  config: AtlasConfig
  plus_slices: List[AtlasSlice]
  minus_slices: List[AtlasSlice]
  curves: List[DegeneracyCurve]
  grid: List[RegionRecord]
  order_reports: List[OrderReport]
  separations: List[Mapping[str, float]]

  def nondegenerate_band(self) -> List[Tuple[float, Optional[float]]]:
    """(e, smallest positive 1-degenerate beta) per slice."""
    return [(s.ecc, s.roots[0].beta if s.roots else None)
            for s in self.plus_slices if not s.error]

  @property
  def diagnostics(self) -> Dict[str, List[str]]:
    return {c.label: c.diagnostics for c in self.curves if c.diagnostics}

  @property
  def conflicts(self) -> List[RegionRecord]:
    return [r for r in self.grid if r.conflict]

  def e0_row_matches(self) -> bool:
    """Whether the e = 0 grid row reproduces the closed-form tables."""
    for r in self.grid:
      if r.ecc != 0.0:
        continue
      t = index_theory.analytic_e0_tables(r.beta)
      if r.indices != (t.i_1, t.nu_1, t.i_minus1, t.nu_minus1):
        return False
    return True

  def summary(self) -> Mapping[str, object]:
    return {
        "config": {
            "beta_max": self.config.beta_max,
            "e_max": self.config.e_max,
            "e_steps": self.config.e_steps,
            "grid_beta_steps": self.config.grid_beta_steps,
            "grid_e_stride": self.config.grid_e_stride,
            "tolerances": self.config.tolerances,
        },
        "curves": [c.to_json_dict() for c in self.curves],
        "diagnostics": self.diagnostics,
        "failed_slices": [
            {"omega": s.omega.real, "e": s.ecc, "error": s.error}
            for s in self.plus_slices + self.minus_slices if s.error],
        "order_checks": [
            {"e": r.ecc, "passed": r.passed, "violations": list(r.violations)}
            for r in self.order_reports],
        "xi_separations": self.separations,
        "nondegenerate_band": [
            {"e": e, "beta": b} for e, b in self.nondegenerate_band()],
        "grid_conflicts": len(self.conflicts),
        "e0_row_matches": self.e0_row_matches(),
    }


def _grid_rows(config: AtlasConfig, plus: Sequence[AtlasSlice],
               minus: Sequence[AtlasSlice]) -> List[RegionRecord]:
  cells = []
  for j in range(0, len(plus), config.grid_e_stride):
    if plus[j].error or minus[j].error:
      continue
    for beta in config.grid_betas:
      cells.append((float(beta), plus[j], minus[j]))

  def evaluate(cell):
    beta, p, m = cell
    return compute_region(beta, p.ecc, p, m, config.tolerances)

  logging.info("Evaluating %d region-grid cells", len(cells))
  return _map_ordered(evaluate, cells, config.max_workers)


def build_atlas(config: AtlasConfig) -> AtlasResult:
  """Traces both curve families, checks their order and fills the grid."""
  e_grid = config.e_grid
  plus = compute_slices(1.0, e_grid, config.beta_max, config.tolerances,
                        config.max_workers)
  minus = compute_slices(-1.0, e_grid, config.beta_max, config.tolerances,
                         config.max_workers)
  curves = (trace_curves(-1.0, minus, config.tolerances) +
            trace_curves(1.0, plus, config.tolerances))
  curves.sort(key=_order_key)
  reports = [order_check(curves, e, config.tolerances) for e in e_grid]
  grid = _grid_rows(config, plus, minus)
  result = AtlasResult(config=config, plus_slices=plus, minus_slices=minus,
                       curves=curves, grid=grid, order_reports=reports,
                       separations=xi_separations(minus, config.tolerances))
  if result.conflicts:
    logging.warning("%d region-grid cells disagree with their case",
                    len(result.conflicts))
  return result


def write_atlas(result: AtlasResult, out_dir: str) -> Mapping[str, str]:
  """Writes curves.csv, grid.csv and atlas.json; returns their paths."""
  os.makedirs(out_dir, exist_ok=True)
  paths = {
      "curves": os.path.join(out_dir, CURVES_FILENAME),
      "grid": os.path.join(out_dir, GRID_FILENAME),
      "summary": os.path.join(out_dir, SUMMARY_FILENAME),
  }
  fmt = utils.format_float
  with open(paths["curves"], "w", newline="") as f:
    writer = csv.writer(f, lineterminator="\n")
    writer.writerow(CURVES_HEADER)
    for curve in result.curves:
      for s in curve.samples:
        writer.writerow([curve.label, fmt(s.ecc), fmt(s.beta), s.multiplicity,
                         s.truncation])
  with open(paths["grid"], "w", newline="") as f:
    writer = csv.writer(f, lineterminator="\n")
    writer.writerow(GRID_HEADER)
    for r in result.grid:
      writer.writerow([fmt(r.ecc), fmt(r.beta), r.i_1, r.nu_1, r.i_minus1,
                       r.nu_minus1, r.normal_form or "", r.predicted.case,
                       int(r.conflict)])
  with open(paths["summary"], "w") as f:
    f.write(utils.dumps_json(result.summary()))
    f.write("\n")
  logging.info("Wrote atlas to %s", out_dir)
  return paths
