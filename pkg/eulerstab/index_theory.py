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
"""Symplectic matrix analysis: nullities, normal forms and splitting numbers.

Basic normal forms, in the coordinates (x_1, .., x_n, y_1, .., y_n) of the
standard symplectic matrix J = [[0, -I], [I, 0]]:

  D(l)     = diag(l, 1/l), l real with |l| > 1.
  R(t)     = [[cos t, -sin t], [sin t, cos t]], t in (0, pi) u (pi, 2 pi).
  N1(l, b) = [[l, b], [0, l]], l = +-1, b in {-1, 0, 1}; N1(+-1, 0) = +-I2.
  N2(w, S) = [[R(t), R(t) S], [0, R(t)]], w = e^{it}, S = +-I; trivial when
             S = -I.

4x4 matrices are classified as symplectic sums (the diamond product) of these
blocks. Hyperbolic blocks are labelled by class only: D(2) for positive and
D(-2) for negative real eigenvalues.
"""

import dataclasses
import math
from typing import List, Mapping, Optional, Sequence, Tuple

from absl import logging
from eulerstab import monodromy as monodromy_lib
from eulerstab import utils
import numpy as np
from scipy import linalg

SymplecticMatrix = monodromy_lib.SymplecticMatrix

_ANGLE_TOL = 1e-9
_E0_TOL = 1e-9

D = "D"
R = "R"
N1 = "N1"
N2 = "N2"
M2 = "M2"
COMPLEX_SADDLE = "CS"


# ----------------------------- circular-orbit thresholds ---------------------


def beta_theta(theta: float) -> float:
  """The beta at which the Fourier mode of frequency theta degenerates."""
  theta2 = theta * theta
  return (theta2 - 3 + math.sqrt(9 * theta2 * theta2 - 14 * theta2 + 9)) / 4


def beta_hat(n: float) -> float:
  """Degenerate points of the circular orbit; half-integers give omega = -1."""
  return beta_theta(n)


def theta_of_beta(beta: float) -> float:
  """Inverse of beta_theta on theta >= 1; theta(0) = 1."""
  return math.sqrt((1 - beta + math.sqrt(9 * beta**2 + 10 * beta + 1)) / 2)


def varsigma_of(omega: complex) -> float:
  """The twist in [0, 1) with omega = exp(2 pi i varsigma)."""
  omega = utils.check_unit(omega, tol=1e-12)
  v = (math.atan2(omega.imag, omega.real) / (2 * math.pi)) % 1.0
  return 0.0 if v >= 1.0 else v


def e0_index(beta: float, omega: complex = 1.0,
             tol: float = _E0_TOL) -> Tuple[int, int]:
  """(i_omega, nu_omega) of the circular orbit by counting Fourier modes.

  Mode k + varsigma carries one negative direction once beta exceeds
  beta_theta(|k + varsigma|) and one null direction at equality.

  Args:
    beta: the mass parameter, >= 0.
    omega: a point of the unit circle.
    tol: thresholds within this distance of beta count as degenerate.

  Returns:
    the index and nullity.
  """
  if beta < 0:
    raise utils.InputError(f"beta must be non-negative, got {beta}.")
  varsigma = varsigma_of(omega)
  bound = int(math.ceil(math.sqrt(beta + 3))) + 2
  index = nullity = 0
  for k in range(-bound, bound + 1):
    threshold = beta_theta(abs(k + varsigma))
    if abs(beta - threshold) <= tol:
      nullity += 1
    elif beta > threshold:
      index += 1
  return index, nullity


# ----------------------------------- normal forms ----------------------------


@dataclasses.dataclass(frozen=True)
class BasicNormalForm:
  """One basic normal form block.

  Attributes:
    kind: one of D, R, N1, N2, M2, CS.
    eigenvalue: D, M2: the real eigenvalue with |l| > 1; R: e^{i theta} of
      R(theta); N1: +-1; N2: the eigenvalue with positive imaginary part;
      CS: the eigenvalue with |z| > 1 and positive imaginary part.
    parameter: N1: b; N2: +1 nontrivial, -1 trivial; unused otherwise.
  """
  kind: str
  eigenvalue: complex
  parameter: int = 0

  @property
  def dim(self) -> int:
    return 4 if self.kind in (N2, M2, COMPLEX_SADDLE) else 2

  @property
  def theta(self) -> float:
    """The angle of R(theta) in (0, 2 pi)."""
    return math.atan2(self.eigenvalue.imag, self.eigenvalue.real) % (2 * math.pi)

  @property
  def class_label(self) -> str:
    if self.kind in (D, M2):
      return "%s(%s)" % (self.kind, "2" if self.eigenvalue.real > 0 else "-2")
    if self.kind == R:
      return "R(0,pi)" if self.theta < math.pi else "R(pi,2pi)"
    if self.kind == N1:
      lam = int(round(self.eigenvalue.real))
      if self.parameter == 0:
        return "I2" if lam == 1 else "-I2"
      return "N1(%d,%d)" % (lam, self.parameter)
    if self.kind == N2:
      return "N2(%s)" % ("nontrivial" if self.parameter > 0 else "trivial")
    return "CS"

  def eigenvalues(self) -> List[complex]:
    z = complex(self.eigenvalue)
    if self.kind == D:
      return [z, 1 / z]
    if self.kind == R:
      return [z, z.conjugate()]
    if self.kind == N1:
      return [z, z]
    if self.kind == N2:
      return [z, z, z.conjugate(), z.conjugate()]
    if self.kind == M2:
      return [z, z, 1 / z, 1 / z]
    return [z, z.conjugate(), 1 / z, 1 / z.conjugate()]

  def __str__(self):
    if self.kind == R:
      return "R(%.6f)" % self.theta
    if self.kind in (D, M2):
      return "%s(%.6g)" % (self.kind, self.eigenvalue.real)
    return self.class_label


@dataclasses.dataclass(frozen=True)
class NormalFormTag:
  """A diamond sum of basic normal forms."""
  blocks: Tuple[BasicNormalForm, ...]

  @property
  def dim(self) -> int:
    return sum(b.dim for b in self.blocks)

  @property
  def class_label(self) -> str:
    return "<>".join(b.class_label for b in self.blocks)

  def eigenvalues(self) -> np.ndarray:
    return np.array([z for b in self.blocks for z in b.eigenvalues()])

  def __str__(self):
    return "<>".join(str(b) for b in self.blocks)

  def to_json_dict(self) -> Mapping[str, object]:
    return {
        "class": self.class_label,
        "blocks": [{"kind": b.kind, "eigenvalue": complex(b.eigenvalue),
                    "parameter": b.parameter, "label": str(b)}
                   for b in self.blocks],
    }


@dataclasses.dataclass(frozen=True)
class SplittingPair:
  s_plus: int
  s_minus: int

  def __add__(self, other: "SplittingPair") -> "SplittingPair":
    return SplittingPair(self.s_plus + other.s_plus,
                         self.s_minus + other.s_minus)


def diamond(*matrices: np.ndarray) -> np.ndarray:
  """The symplectic sum of 2n_i x 2n_i matrices."""
  halves = [m.shape[0] // 2 for m in matrices]
  n = sum(halves)
  dtype = np.result_type(*matrices)
  out = np.zeros((2 * n, 2 * n), dtype=dtype)
  offset = 0
  for m, k in zip(matrices, halves):
    idx = list(range(offset, offset + k)) + list(range(n + offset, n + offset + k))
    out[np.ix_(idx, idx)] = m
    offset += k
  return out


def normal_form_matrix(block: BasicNormalForm) -> np.ndarray:
  """The canonical real matrix of a basic normal form."""
  z = complex(block.eigenvalue)
  if block.kind == D:
    return np.diag([z.real, 1 / z.real])
  if block.kind == R:
    return utils.rotation(block.theta)
  if block.kind == N1:
    return np.array([[z.real, float(block.parameter)], [0.0, z.real]])
  if block.kind == N2:
    r = utils.rotation(block.theta)
    return np.block([[r, block.parameter * r], [np.zeros((2, 2)), r]])
  if block.kind == M2:
    a = np.array([[z.real, 1.0], [0.0, z.real]])
  else:
    a = abs(z) * utils.rotation(math.atan2(z.imag, z.real))
  return np.block([[a, np.zeros((2, 2))],
                   [np.zeros((2, 2)), np.linalg.inv(a).T]])


def tag_matrix(tag: NormalFormTag) -> np.ndarray:
  return diamond(*[normal_form_matrix(b) for b in tag.blocks])


# --------------------------------------- nullity -----------------------------


def _scaled_tolerances(m: SymplecticMatrix, tolerances: utils.Tolerances):
  eps_scale = 1e3 * np.finfo(float).eps * m.norm
  return (max(tolerances.cluster_tol, eps_scale),
          max(tolerances.rank_tol, eps_scale))


def _as_matrix(m) -> SymplecticMatrix:
  if isinstance(m, SymplecticMatrix):
    return m
  return SymplecticMatrix.from_entries(np.asarray(m, dtype=float))


def nullity(m: SymplecticMatrix, omega: complex,
            tolerances: utils.Tolerances = utils.DEFAULT_TOLERANCES) -> int:
  """dim ker(M - omega I).

  Eigenvalues near omega are moved to the leading block of an ordered Schur
  form; the nullity is the rank deficiency of that triangular block minus
  omega.
  """
  m = _as_matrix(m)
  omega = complex(omega)
  cluster_tol, rank_tol = _scaled_tolerances(m, tolerances)
  t, _, sdim = linalg.schur(m.entries.astype(complex), output="complex",
                            sort=lambda z: abs(z - omega) < cluster_tol)
  if sdim == 0:
    return 0
  block = t[:sdim, :sdim] - omega * np.eye(sdim)
  singular = linalg.svdvals(block)
  return int(sdim - np.sum(singular > rank_tol))


def krein_form(m: SymplecticMatrix, vectors: np.ndarray) -> np.ndarray:
  """The Hermitian matrix V^H (-i J) V."""
  j = utils.standard_symplectic(m.dim // 2)
  return vectors.conj().T @ (-1j * j) @ vectors


def _eigenvectors_near(m: SymplecticMatrix, target: complex, count: int
                       ) -> np.ndarray:
  eigs, vecs = monodromy_lib.eigenpairs(m)
  finite = np.isfinite(eigs)
  order = np.argsort(np.where(finite, np.abs(eigs - target), np.inf))
  vecs = vecs[:, order[:count]]
  return vecs / np.linalg.norm(vecs, axis=0, keepdims=True)


def krein_signature(m: SymplecticMatrix, eigenvalue: complex) -> int:
  """Sign of z^H (-i J) z for the eigenvector z of a unit-circle eigenvalue."""
  z = _eigenvectors_near(m, eigenvalue, 1)
  value = krein_form(m, z)[0, 0].real
  return 1 if value > 0 else -1


def n1_sign(m: SymplecticMatrix, lam: float,
            tolerances: utils.Tolerances = utils.DEFAULT_TOLERANCES) -> int:
  """The sign b of the N1(lam, b) part of a non-semisimple +-1 cluster.

  b = -sign(omega((M - lam) x, x)) for x in the generalized eigenspace; the form
  vanishes on the eigenspace and does not depend on the representative.
  """
  m = _as_matrix(m)
  cluster_tol, _ = _scaled_tolerances(m, tolerances)
  t, v, sdim = linalg.schur(
      m.entries, output="real",
      sort=lambda re, im: abs(complex(re, im) - lam) < cluster_tol)
  basis = v[:, :sdim]
  nil = t[:sdim, :sdim] - lam * np.eye(sdim)
  _, _, vh = linalg.svd(nil)
  c = vh[0]
  j = utils.standard_symplectic(m.dim // 2)
  q = (basis @ (nil @ c)) @ j @ (basis @ c)
  return -1 if q > 0 else 1


def _n2_is_trivial(m: SymplecticMatrix, omega: complex,
                   tolerances: utils.Tolerances) -> bool:
  """Triviality of an N2 block from its Jordan chain.

  With (M - w) z1 = z0, the block is trivial iff Im(w z0^H (-iJ) z1) < 0.
  """
  cluster_tol, _ = _scaled_tolerances(m, tolerances)
  t, q, sdim = linalg.schur(m.entries.astype(complex), output="complex",
                            sort=lambda z: abs(z - omega) < cluster_tol)
  if sdim != 2 or abs(t[0, 1]) < tolerances.rank_tol:
    raise utils.AmbiguousClassificationError(
        "Cannot resolve the Jordan chain of a Krein collision.",
        candidates=["N2(trivial)", "N2(nontrivial)"])
  z0 = q[:, 0]
  z1 = q[:, 1] / t[0, 1]
  j = utils.standard_symplectic(m.dim // 2)
  value = omega * (z0.conj() @ (-1j * j) @ z1)
  return value.imag < 0


# ------------------------------------ classification -------------------------


def _pm1_blocks(m, lam, count, tolerances) -> List[BasicNormalForm]:
  nu = nullity(m, lam, tolerances)
  if nu == count:
    return [BasicNormalForm(N1, complex(lam), 0)] * (count // 2)
  if nu == count - 1:
    b = n1_sign(m, lam, tolerances)
    return ([BasicNormalForm(N1, complex(lam), 0)] * ((count - 2) // 2) +
            [BasicNormalForm(N1, complex(lam), b)])
  raise utils.AmbiguousClassificationError(
      f"Eigenvalue {lam} with algebraic multiplicity {count} and nullity {nu} "
      "is not a sum of N1 blocks.", candidates=["N1<>N1", "M2"])


def _unit_blocks(m, upper, tolerances) -> List[BasicNormalForm]:
  """Blocks for unit-circle eigenvalues off +-1, given those with Im > 0."""
  cluster_tol, _ = _scaled_tolerances(m, tolerances)
  upper = sorted(upper, key=lambda z: math.atan2(z.imag, z.real))
  blocks = []
  i = 0
  while i < len(upper):
    z = upper[i]
    if i + 1 < len(upper) and abs(upper[i + 1] - z) < cluster_tol:
      w = (z + upper[i + 1]) / 2
      w /= abs(w)
      if nullity(m, w, tolerances) == 2:
        form = krein_form(m, _eigenvectors_near(m, w, 2))
        for sign in np.linalg.eigvalsh(form):
          blocks.append(BasicNormalForm(R, w if sign > 0 else w.conjugate()))
      else:
        trivial = _n2_is_trivial(m, w, tolerances)
        blocks.append(BasicNormalForm(N2, w, -1 if trivial else 1))
      i += 2
      continue
    z = z / abs(z)
    sign = krein_signature(m, z)
    blocks.append(BasicNormalForm(R, z if sign > 0 else z.conjugate()))
    i += 1
  return blocks


def _hyperbolic_blocks(m, big, tolerances) -> List[BasicNormalForm]:
  """Blocks for eigenvalues with |z| > 1."""
  cluster_tol, _ = _scaled_tolerances(m, tolerances)
  real = sorted([z.real for z in big if abs(z.imag) <= 1e-9 * abs(z)])
  complex_upper = [z for z in big if z.imag > 1e-9 * abs(z)]
  blocks = []
  i = 0
  while i < len(real):
    lam = real[i]
    if i + 1 < len(real) and abs(real[i + 1] - lam) < cluster_tol * abs(lam):
      if nullity(m, lam, tolerances) == 2:
        blocks += [BasicNormalForm(D, complex(lam))] * 2
      else:
        blocks.append(BasicNormalForm(M2, complex(lam)))
      i += 2
      continue
    blocks.append(BasicNormalForm(D, complex(lam)))
    i += 1
  for z in complex_upper:
    blocks.append(BasicNormalForm(COMPLEX_SADDLE, z))
  return blocks


def classify(m: SymplecticMatrix,
             tolerances: utils.Tolerances = utils.DEFAULT_TOLERANCES
             ) -> NormalFormTag:
  """Decomposes a symplectic matrix into basic normal forms.

  Args:
    m: a symplectic matrix, typically a monodromy.
    tolerances: clustering, rank and unit-circle tolerances.

  Returns:
    the normal-form tag; unit-circle blocks come first, then hyperbolic ones.

  Raises:
    AmbiguousClassificationError: if an eigenvalue sits within the ambiguity
      band of the unit circle or of +-1 without being degenerate.
  """
  m = _as_matrix(m)
  cluster_tol, _ = _scaled_tolerances(m, tolerances)
  remaining = list(monodromy_lib.spectrum(m))
  blocks = []
  for lam in (1.0, -1.0):
    near = [z for z in remaining if abs(z - lam) < cluster_tol]
    if not near:
      continue
    if nullity(m, lam, tolerances) == 0:
      closest = min(abs(z - lam) for z in near)
      if closest < tolerances.ambiguity_tol:
        raise utils.AmbiguousClassificationError(
            f"Eigenvalue within {closest:.3g} of {lam} but M - {lam} I is "
            "nonsingular.", candidates=[
                "N1(%d,*)" % lam, "R" if abs(abs(near[0]) - 1) < 1e-9 else "D"])
      continue
    blocks += _pm1_blocks(m, lam, len(near), tolerances)
    remaining = [z for z in remaining if abs(z - lam) >= cluster_tol]

  upper, big = [], []
  for z in remaining:
    off = abs(abs(z) - 1.0)
    if off <= tolerances.unit_tol:
      if z.imag > 0:
        upper.append(z)
    elif off <= tolerances.ambiguity_tol:
      raise utils.AmbiguousClassificationError(
          f"Eigenvalue {z} is {off:.3g} off the unit circle.",
          candidates=["R", "D" if abs(z.imag) < 1e-9 else "CS"])
    elif abs(z) > 1:
      big.append(z)
  blocks += _unit_blocks(m, upper, tolerances)
  blocks += _hyperbolic_blocks(m, big, tolerances)
  tag = NormalFormTag(tuple(blocks))
  if tag.dim != m.dim:
    raise utils.AmbiguousClassificationError(
        f"Blocks {tag} cover dimension {tag.dim} of {m.dim}.",
        candidates=[str(tag)])
  logging.debug("Classified monodromy as %s", tag)
  return tag


# ------------------------------------- splitting numbers ---------------------


def _same_point(z: complex, omega: complex) -> bool:
  return abs(z - omega) <= _ANGLE_TOL


def _basic_splitting(block: BasicNormalForm, omega: complex) -> SplittingPair:
  z = complex(block.eigenvalue)
  if block.kind == N1:
    if not _same_point(z, omega):
      return SplittingPair(0, 0)
    lam = int(round(z.real))
    # N1(1, b): (1, 1) for b in {0, 1}; N1(-1, b): (1, 1) for b in {-1, 0}.
    nontrivial = block.parameter == 0 or block.parameter == lam
    return SplittingPair(1, 1) if nontrivial else SplittingPair(0, 0)
  if block.kind == R:
    if _same_point(z, omega):
      return SplittingPair(0, 1)
    if _same_point(z.conjugate(), omega):
      return SplittingPair(1, 0)
    return SplittingPair(0, 0)
  if block.kind == N2:
    if _same_point(z, omega) or _same_point(z.conjugate(), omega):
      return SplittingPair(1, 1) if block.parameter > 0 else SplittingPair(0, 0)
    return SplittingPair(0, 0)
  return SplittingPair(0, 0)


def splitting_numbers(tag: NormalFormTag, omega: complex) -> SplittingPair:
  """(S+, S-) at omega, summed over the blocks of a tag."""
  omega = utils.check_unit(omega, tol=1e-12)
  total = SplittingPair(0, 0)
  for block in tag.blocks:
    total += _basic_splitting(block, omega)
  return total


def _angle(z: complex) -> float:
  return math.atan2(z.imag, z.real) % (2 * math.pi)


def propagate_index(i_1: int, tag: NormalFormTag, omega_0: complex) -> int:
  """i_{omega_0} from i_1 by walking counterclockwise from 1 to omega_0.

  i_{w0} = i_1 + S+(1) + sum_j (S+(w_j) - S-(w_j)) - S-(w0), the sum running
  over unit-circle eigenvalues strictly between 1 and w0.

  Raises:
    AmbiguousClassificationError: if an eigenvalue angle is within 1e-9 of
      the endpoints without coinciding with them.
  """
  omega_0 = utils.check_unit(omega_0, tol=1e-12)
  if _same_point(omega_0, 1.0):
    return i_1
  phi0 = _angle(omega_0)
  points = []
  for z in tag.eigenvalues():
    if abs(abs(z) - 1) > 1e-7 or _same_point(z, 1.0) or _same_point(z, omega_0):
      continue
    phi = _angle(z)
    if min(phi, abs(phi - phi0), 2 * math.pi - phi) < 1e-9:
      raise utils.AmbiguousClassificationError(
          f"Eigenvalue angle {phi} cannot be ordered against 0 and {phi0}.",
          candidates=["at endpoint", "between endpoints"])
    if phi < phi0 and not any(_same_point(z, w) for w in points):
      points.append(complex(z))
  index = i_1 + splitting_numbers(tag, 1.0).s_plus
  for w in points:
    s = splitting_numbers(tag, w)
    index += s.s_plus - s.s_minus
  return index - splitting_numbers(tag, omega_0).s_minus


# ---------------------------------- circular tables --------------------------


@dataclasses.dataclass(frozen=True)
class E0Tables:
  """Indices, nullities and the monodromy branch of a circular orbit."""
  beta: float
  theta: float
  rotation_angle: float
  i_1: int
  nu_1: int
  i_minus1: int
  nu_minus1: int
  integer_bracket: Tuple[Optional[float], float]
  half_bracket: Tuple[Optional[float], float]
  normal_form: str

  def to_json_dict(self) -> Mapping[str, object]:
    return dataclasses.asdict(self)


def _bracket(beta: float, start: float) -> Tuple[Optional[float], float]:
  """(largest threshold < beta, smallest threshold >= beta) over start + k."""
  lower = None
  n = start
  while beta_hat(n) < beta - _E0_TOL:
    lower = beta_hat(n)
    n += 1
  return lower, beta_hat(n)


def analytic_e0_tables(beta: float) -> E0Tables:
  """Closed-form index report of the circular orbit at mass parameter beta."""
  if beta < 0:
    raise utils.InputError(f"beta must be non-negative, got {beta}.")
  i_1, nu_1 = e0_index(beta, 1.0)
  i_m1, nu_m1 = e0_index(beta, -1.0)
  theta = theta_of_beta(beta)
  angle = (2 * math.pi * theta) % (2 * math.pi)
  if beta <= _E0_TOL:
    label = "I2<>N1(1,1)"
  elif nu_1:
    label = "I2<>D(2)"
  elif nu_m1:
    label = "-I2<>D(2)"
  elif angle < math.pi:
    label = "R(0,pi)<>D(2)"
  else:
    label = "R(pi,2pi)<>D(2)"
  return E0Tables(
      beta=beta, theta=theta, rotation_angle=angle, i_1=i_1, nu_1=nu_1,
      i_minus1=i_m1, nu_minus1=nu_m1,
      integer_bracket=_bracket(beta, 1.0),
      half_bracket=_bracket(beta, 1.5),
      normal_form=label)


def expected_tag_e0(beta: float) -> Optional[NormalFormTag]:
  """The monodromy normal form at e = 0 off the degenerate points."""
  tables = analytic_e0_tables(beta)
  if tables.nu_1 or tables.nu_minus1:
    return None
  alpha1, _ = monodromy_lib.e0_exponents(beta)
  lam = math.exp(2 * math.pi * math.sqrt(alpha1))
  z = complex(math.cos(tables.rotation_angle), math.sin(tables.rotation_angle))
  return NormalFormTag((BasicNormalForm(R, z), BasicNormalForm(D, complex(lam))))
