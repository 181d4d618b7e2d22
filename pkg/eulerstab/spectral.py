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
"""Fourier-Galerkin realization of the second-order stability operator.

The operator is A(beta, e) = -d^2/dt^2 - I + R(t) K(t) R(t)^T acting on
2-vectors y with y(2 pi) = omega y(0), y'(2 pi) = omega y'(0). Writing
y = R(t) u turns it into

  -u'' - 2 J2 u' + K(t) u,   K(t) = diag(2 beta + 3, -beta) / (1 + e cos t),

with the same boundary twist. On the basis u e^{i (k + varsigma) t}, |k| <= N,
its matrix is block-diagonal plus a Toeplitz coupling built from the Fourier
coefficients of 1 / (1 + e cos t). The number of negative and zero eigenvalues
gives the omega-index and nullity of the monodromy path.
"""

import dataclasses
import math
from typing import Mapping, Optional, Sequence, Tuple

from absl import logging
from eulerstab import index_theory
from eulerstab import utils
import numpy as np
from scipy import linalg

_MIN_TRUNCATION = 8
_DEFAULT_MIN_TRUNCATION = 16


@dataclasses.dataclass(frozen=True)
class BoundaryTwist:
  """A point omega = exp(2 pi i varsigma) of the unit circle."""
  omega: complex
  varsigma: float

  @classmethod
  def from_omega(cls, omega: complex) -> "BoundaryTwist":
    omega = utils.check_unit(omega, tol=1e-12)
    varsigma = index_theory.varsigma_of(omega)
    if varsigma == 0.0:
      omega = 1.0 + 0.0j
    elif varsigma == 0.5:
      omega = -1.0 + 0.0j
    return cls(omega=complex(omega), varsigma=varsigma)

  @classmethod
  def from_varsigma(cls, varsigma: float) -> "BoundaryTwist":
    return cls.from_omega(np.exp(2j * math.pi * varsigma))

  @property
  def is_periodic(self) -> bool:
    return self.varsigma == 0.0


PERIODIC = BoundaryTwist(1.0 + 0.0j, 0.0)
ANTIPERIODIC = BoundaryTwist(-1.0 + 0.0j, 0.5)


def as_twist(omega) -> BoundaryTwist:
  if isinstance(omega, BoundaryTwist):
    return omega
  return BoundaryTwist.from_omega(omega)


@dataclasses.dataclass(frozen=True)
class IndexPair:
  """(i_omega, nu_omega) with the truncation at which it was certified."""
  index: int
  nullity: int
  truncation: int = dataclasses.field(default=0, compare=False)
  converged: bool = dataclasses.field(default=True, compare=False)

  def to_json_dict(self) -> Mapping[str, object]:
    return dataclasses.asdict(self)


@dataclasses.dataclass(frozen=True, eq=False)
class GalerkinProblem:
  """The assembled Hermitian matrix of A(beta, e) or of A(beta, e)/(beta + 1).

  Unknowns are ordered (k, component) with k = -N..N, so the matrix has
  dimension 2 (2N + 1).
  """
  beta: float
  ecc: float
  twist: BoundaryTwist
  truncation: int
  matrix: np.ndarray
  rescaled: bool = False

  @property
  def dim(self) -> int:
    return self.matrix.shape[0]

  @property
  def hermitian_defect(self) -> float:
    return utils.max_norm(self.matrix - self.matrix.conj().T)

  def eigenvalues(self) -> np.ndarray:
    return linalg.eigvalsh(self.matrix)

  def with_truncation(self, truncation: int) -> "GalerkinProblem":
    return assemble(self.beta, self.ecc, self.twist, truncation,
                    rescaled=self.rescaled)


def fourier_coefficients(ecc: float, max_harmonic: int,
                         num_samples: Optional[int] = None) -> np.ndarray:
  """Coefficients g_m, |m| <= max_harmonic, of 1 / (1 + e cos t).

  Computed by the trapezoid rule on `num_samples` equispaced points, which is
  spectrally accurate for this analytic periodic integrand.

  Returns:
    array of length 2 max_harmonic + 1 ordered m = -max_harmonic..max_harmonic.
  """
  if num_samples is None:
    num_samples = 4 * max_harmonic + 16
  if num_samples <= 2 * max_harmonic:
    raise utils.InputError(
        f"{num_samples} samples cannot resolve harmonic {max_harmonic}.")
  t = 2 * math.pi * np.arange(num_samples) / num_samples
  coeffs = np.fft.fft(1.0 / (1.0 + ecc * np.cos(t))).real / num_samples
  m = np.arange(-max_harmonic, max_harmonic + 1)
  return coeffs[m % num_samples]


def fourier_coefficients_closed_form(ecc: float, max_harmonic: int
                                     ) -> np.ndarray:
  """g_m = r^|m| / sqrt(1 - e^2) with r = (sqrt(1 - e^2) - 1) / e."""
  m = np.abs(np.arange(-max_harmonic, max_harmonic + 1))
  if ecc == 0:
    return (m == 0).astype(float)
  root = math.sqrt(1 - ecc**2)
  r = (root - 1) / ecc
  return r**m / root


def decay_rate(ecc: float) -> float:
  """|r|, the geometric decay of the Fourier coefficients."""
  if ecc == 0:
    return 0.0
  return abs((math.sqrt(1 - ecc**2) - 1) / ecc)


def default_truncation(ecc: float, beta_max: float = 0.0) -> int:
  """Starting truncation for eccentricity `ecc` and betas up to `beta_max`."""
  rate = decay_rate(ecc)
  resolve = 0 if rate == 0 else int(math.ceil(-32.0 / math.log(rate)))
  return max(_DEFAULT_MIN_TRUNCATION,
             int(math.ceil(math.sqrt(max(beta_max, 0.0) + 2))) + resolve)


def assemble(beta: float, ecc: float, twist, truncation: Optional[int] = None,
             rescaled: bool = False) -> GalerkinProblem:
  """Assembles the Galerkin matrix of A(beta, e) on the twisted domain.

  Args:
    beta: the mass parameter; beta = -1 gives the comparison operator
      A(-1, e) and is not allowed with `rescaled`.
    ecc: eccentricity in [0, 1).
    twist: a BoundaryTwist or a unit complex number.
    truncation: N >= 8; defaults to `default_truncation(ecc, beta)`.
    rescaled: if True, assemble A(beta, e) / (beta + 1), whose eigenvalues are
      non-increasing in beta.

  Returns:
    the GalerkinProblem.
  """
  if truncation is None:
    truncation = default_truncation(utils.check_eccentricity(ecc), beta)
  return operator_family(ecc, twist, truncation).problem(beta, rescaled)


@dataclasses.dataclass(frozen=True, eq=False)
class OperatorFamily:
  """The Galerkin matrices A(beta, e) = base + beta * slope at fixed e and N."""
  ecc: float
  twist: BoundaryTwist
  truncation: int
  base: np.ndarray
  slope: np.ndarray

  def matrix(self, beta: float, rescaled: bool = False) -> np.ndarray:
    if not math.isfinite(beta):
      raise utils.InputError(f"beta must be finite, got {beta}.")
    if rescaled and beta <= -1:
      raise utils.InputError(f"Rescaling needs beta > -1, got {beta}.")
    matrix = self.base + beta * self.slope
    if rescaled:
      matrix /= beta + 1
    return matrix

  def problem(self, beta: float, rescaled: bool = False) -> GalerkinProblem:
    return GalerkinProblem(beta=float(beta), ecc=self.ecc, twist=self.twist,
                           truncation=self.truncation,
                           matrix=self.matrix(beta, rescaled),
                           rescaled=rescaled)

  def smallest(self, beta: float, count: int,
               rescaled: bool = True) -> np.ndarray:
    return smallest_eigenvalues(self.problem(beta, rescaled), count)


def operator_family(ecc: float, twist, truncation: int) -> OperatorFamily:
  """Builds the beta-independent parts of the Galerkin matrix."""
  ecc = utils.check_eccentricity(ecc)
  twist = as_twist(twist)
  n = int(truncation)
  if n < _MIN_TRUNCATION:
    raise utils.InputError(
        f"Truncation must be at least {_MIN_TRUNCATION}, got {n}.")

  nu = np.arange(-n, n + 1) + twist.varsigma
  size = 2 * (2 * n + 1)
  base = np.zeros((size, size), dtype=complex)
  even = np.arange(0, size, 2)
  odd = even + 1
  base[even, even] = nu**2
  base[odd, odd] = nu**2
  base[even, odd] = 2j * nu
  base[odd, even] = -2j * nu

  g = fourier_coefficients(ecc, 2 * n, num_samples=8 * n)
  # toeplitz[k, j] = g_{k - j}
  coupling = linalg.toeplitz(g[2 * n:], g[2 * n::-1])
  base += np.kron(coupling, np.diag([3.0, 0.0]))
  slope = np.kron(coupling, np.diag([2.0, -1.0])).astype(complex)
  return OperatorFamily(ecc=ecc, twist=twist, truncation=n, base=base,
                        slope=slope)


def null_tolerance(prob: GalerkinProblem,
                   tolerances: utils.Tolerances = utils.DEFAULT_TOLERANCES
                   ) -> float:
  """null_tol_rel times the norm of the mean potential term.

  The mean of K(t) has norm max(2 beta + 3, beta) / sqrt(1 - e^2). Unlike the
  spectral norm of the Galerkin matrix this scale does not grow with N.
  """
  scale = max(1.0, abs(2 * prob.beta + 3), abs(prob.beta))
  scale /= math.sqrt(1 - prob.ecc**2)
  if prob.rescaled:
    scale /= prob.beta + 1
  return tolerances.null_tol_rel * scale


@dataclasses.dataclass(frozen=True)
class _Count:
  index: int
  nullity: int
  gap_ok: bool
  window: np.ndarray

  @property
  def pair(self) -> Tuple[int, int]:
    return self.index, self.nullity


def _count(eigs: np.ndarray, null_tol: float, gap_factor: float) -> _Count:
  index = int(np.sum(eigs < -null_tol))
  nullity = int(np.sum(np.abs(eigs) <= null_tol))
  outside = np.abs(eigs[np.abs(eigs) > null_tol])
  gap_ok = outside.size == 0 or float(outside.min()) > gap_factor * null_tol
  window = np.sort(eigs[(np.abs(eigs) > null_tol) &
                        (np.abs(eigs) <= gap_factor * null_tol)])
  return _Count(index, nullity, gap_ok, window)


def _settled(previous: _Count, current: _Count, null_tol: float) -> bool:
  """Equal counts, and either a clear gap or an unchanged gap window."""
  if previous.pair != current.pair:
    return False
  if current.gap_ok:
    return True
  return (previous.window.size == current.window.size and
          float(np.max(np.abs(previous.window - current.window))) <= null_tol)


def morse_index(prob: GalerkinProblem,
                tolerances: utils.Tolerances = utils.DEFAULT_TOLERANCES,
                null_tol: Optional[float] = None) -> IndexPair:
  """Counts negative and null eigenvalues, doubling N until the count settles.

  The null tolerance does not depend on N (see `null_tolerance`). The pair is
  accepted when truncations N and 2N agree and either the first eigenvalue
  outside the null cluster clears it by `gap_factor`, or the eigenvalues
  between null_tol and gap_factor * null_tol moved by less than null_tol.

  Args:
    prob: the starting problem.
    tolerances: null tolerance, gap factor and truncation cap.
    null_tol: overrides `null_tolerance(prob, tolerances)`.

  Returns:
    the IndexPair certified at the larger of the two agreeing truncations.

  Raises:
    ConvergenceError: if no agreement is reached by `max_truncation`.
  """
  if null_tol is None:
    null_tol = null_tolerance(prob, tolerances)
  previous = _count(prob.eigenvalues(), null_tol, tolerances.gap_factor)
  n = prob.truncation
  while True:
    if 2 * n > tolerances.max_truncation:
      raise utils.ConvergenceError(
          f"Morse index of beta={prob.beta}, e={prob.ecc}, "
          f"omega={prob.twist.omega} did not converge by N={n}.",
          last_values=[list(previous.pair)], truncation=n)
    n *= 2
    current = _count(prob.with_truncation(n).eigenvalues(), null_tol,
                     tolerances.gap_factor)
    if _settled(previous, current, null_tol):
      return IndexPair(index=current.index, nullity=current.nullity,
                       truncation=n)
    logging.debug("Index at N=%d is %s, previously %s", n, current.pair,
                  previous.pair)
    if 2 * n > tolerances.max_truncation:
      raise utils.ConvergenceError(
          f"Morse index of beta={prob.beta}, e={prob.ecc}, "
          f"omega={prob.twist.omega} did not converge by N={n}.",
          last_values=[list(previous.pair), list(current.pair)], truncation=n)
    previous = current


def index_pair(beta: float, ecc: float, omega=1.0,
               tolerances: utils.Tolerances = utils.DEFAULT_TOLERANCES,
               truncation: Optional[int] = None) -> IndexPair:
  return morse_index(assemble(beta, ecc, omega, truncation), tolerances)


def smallest_eigenvalues(prob: GalerkinProblem, count: int) -> np.ndarray:
  """The `count` smallest eigenvalues in ascending order."""
  count = min(int(count), prob.dim)
  if count <= 0:
    return np.zeros(0)
  return linalg.eigh(prob.matrix, eigvals_only=True,
                     subset_by_index=[0, count - 1])


# -------------------------------------------------------------- comparison ---


@dataclasses.dataclass(frozen=True)
class PositivityReport:
  ecc: float
  omega: complex
  smallest: Tuple[float, ...]
  near_null: int
  kernel_residual: Optional[float]
  non_negative: bool
  positive_definite: bool

  @property
  def passed(self) -> bool:
    if self.omega == 1:
      return (self.non_negative and self.near_null == 2 and
              self.kernel_residual is not None and self.kernel_residual < 1e-8)
    return self.positive_definite


def galerkin_coefficients(samples: np.ndarray, truncation: int,
                          twist: BoundaryTwist) -> np.ndarray:
  """Projects sampled 2-vector functions onto the Galerkin basis.

  Args:
    samples: array of shape (2, M) on the grid t_l = 2 pi l / M.
    truncation: N.
    twist: the boundary twist of the functions.

  Returns:
    the coefficient vector ordered like the Galerkin unknowns.
  """
  num = samples.shape[1]
  t = 2 * math.pi * np.arange(num) / num
  k = np.arange(-truncation, truncation + 1) + twist.varsigma
  basis = np.exp(-1j * np.outer(k, t))
  coeffs = basis @ samples.T / num  # (2N+1, 2)
  return coeffs.reshape(-1)


def positivity_check_A_minus1(
    ecc: float, twist, truncation: Optional[int] = None,
    tolerances: utils.Tolerances = utils.DEFAULT_TOLERANCES
) -> PositivityReport:
  """Checks that A(-1, e) is non-negative, and positive off omega = 1.

  At omega = 1 its kernel is spanned by (1 + e cos t) v for constant v in the
  original frame; the report measures how well the near-null eigenvectors
  reproduce those functions.
  """
  twist = as_twist(twist)
  prob = assemble(-1.0, ecc, twist, truncation)
  eigs, vecs = linalg.eigh(prob.matrix)
  tol = null_tolerance(prob, tolerances)
  near = np.abs(eigs) <= tol
  residual = None
  if twist.is_periodic:
    num = 8 * prob.truncation
    t = 2 * math.pi * np.arange(num) / num
    null_space = vecs[:, near]
    worst = 0.0
    for v in (np.array([1.0, 0.0]), np.array([0.0, 1.0])):
      # u = R(-t) (1 + e cos t) v in the rotated frame.
      c, s = np.cos(t), np.sin(t)
      u = (1 + ecc * c) * np.array([c * v[0] + s * v[1], -s * v[0] + c * v[1]])
      w = galerkin_coefficients(u, prob.truncation, twist)
      proj = null_space @ (null_space.conj().T @ w)
      worst = max(worst, float(np.linalg.norm(w - proj) / np.linalg.norm(w)))
    residual = worst
  return PositivityReport(
      ecc=float(ecc), omega=twist.omega,
      smallest=tuple(float(x) for x in eigs[:4]),
      near_null=int(np.sum(near)), kernel_residual=residual,
      non_negative=bool(eigs[0] >= -1e-9),
      positive_definite=bool(eigs[0] > tol))


# -------------------------------------------------------- kernel recurrence --


def kernel_amplitude(n: float, beta: float) -> float:
  """a_n = (n^2 - beta) / (2n): kernel amplitude of the circular orbit."""
  return (n * n - beta) / (2 * n)


def e0_crossing_rate(n: int) -> float:
  """2 a_n^2 - 1 at beta_hat(n); nonzero, so degenerate curves start flat."""
  return 2 * kernel_amplitude(n, index_theory.beta_hat(n))**2 - 1


def index_bound_threshold(n: int, ecc: float) -> float:
  """Below this beta, i_1(beta, e) <= 4n + 2."""
  return (2 / (3 * math.sqrt(2) - 1)) * (n * n - ecc / (1 + ecc)) * (1 - ecc) - 1


def _recurrence_matrix(beta: float, ecc: float, harmonics: int) -> np.ndarray:
  """Row-scaled block tridiagonal map on (v_1, .., v_M), v_n = (a_n, d_n)."""
  size = 2 * harmonics
  out = np.zeros((size, size))

  def a_block(n):
    return -(n / 2.0) * np.array([[n, 2.0], [2.0, n]])

  for n in range(1, harmonics + 1):
    row = slice(2 * (n - 1), 2 * n)
    scale = 1.0 / (n * n + 2 * beta + 4)
    out[row, row] = scale * np.array([[n * n + 2 * beta + 3, 2.0 * n],
                                      [2.0 * n, n * n - beta]])
    if n > 1:
      out[row, 2 * (n - 2):2 * (n - 1)] = -scale * ecc * a_block(n - 1)
    if n < harmonics:
      out[row, 2 * n:2 * (n + 1)] = -scale * ecc * a_block(n + 1)
  return out


@dataclasses.dataclass(frozen=True, eq=False)
class KernelBasis:
  """Kernel of A(beta, e) on 2 pi-periodic functions from the recurrence.

  When `exists`, w1(t) = R(t) (a_0 + sum a_n cos nt, sum d_n sin nt) and
  w2(t) = R(t) (sum a_n sin nt, c_0 - sum d_n cos nt) span the kernel.

  Attributes:
    beta: mass parameter.
    ecc: eccentricity.
    exists: whether the truncated recurrence is singular.
    dimension: kernel dimension, twice the nullity of the recurrence.
    singular_ratio: smallest over largest singular value.
    harmonics: number of harmonics kept.
    a: a_0..a_M.
    d: d_0..d_M, d_0 = 0.
    c0: constant term of the second family.
  """
  beta: float
  ecc: float
  exists: bool
  dimension: int
  singular_ratio: float
  harmonics: int
  a: np.ndarray
  d: np.ndarray
  c0: float

  def evaluate(self, t) -> Tuple[np.ndarray, np.ndarray]:
    """Returns (w1(t), w2(t)), each of shape (2,) + shape(t)."""
    t = np.asarray(t, dtype=float)
    n = np.arange(1, self.harmonics + 1)
    phase = np.multiply.outer(t, n)
    cos, sin = np.cos(phase), np.sin(phase)
    a, d = self.a[1:], self.d[1:]
    u1 = np.stack([self.a[0] + cos @ a, sin @ d])
    u2 = np.stack([sin @ a, self.c0 - cos @ d])
    rc, rs = np.cos(t), np.sin(t)

    def rotate(u):
      return np.stack([rc * u[0] - rs * u[1], rs * u[0] + rc * u[1]])

    return rotate(u1), rotate(u2)

  def residual(self) -> float:
    """Max-norm residual of the recurrence on the stored coefficients."""
    v = np.stack([self.a[1:], self.d[1:]], axis=1).reshape(-1)
    return utils.max_norm(
        _recurrence_matrix(self.beta, self.ecc, self.harmonics) @ v)


def kernel_by_recurrence(
    beta: float, ecc: float, parity: str = "both",
    tolerances: utils.Tolerances = utils.DEFAULT_TOLERANCES) -> KernelBasis:
  """Detects and builds periodic kernel elements via the three-term recurrence.

  Both the (a, d) family (x even, y odd) and the (b, c) family (x odd, y even)
  obey B_n v_n = e A_{n-1} v_{n-1} + e A_{n+1} v_{n+1} for n >= 1, with
  A_n = -(n/2) [[n, 2], [2, n]] and B_n = [[n^2 + 2 beta + 3, 2n],
  [2n, n^2 - beta]]. A_2 is singular, so the truncated system is analysed by
  singular values instead of forward substitution. The second family mirrors
  the first: b_n = a_n, c_n = -d_n.

  Args:
    beta: mass parameter, > 0.
    ecc: eccentricity in [0, 1).
    parity: "ad", "bc" or "both"; selects which families count toward the
      reported dimension.
    tolerances: singular-value and decay thresholds and the harmonic cap.

  Returns:
    the KernelBasis.

  Raises:
    ConvergenceError: if the null vector has not decayed by the harmonic cap.
  """
  if beta <= 0:
    raise utils.InputError(f"The recurrence needs beta > 0, got {beta}.")
  if parity not in ("ad", "bc", "both"):
    raise utils.InputError(f"Unknown parity {parity!r}.")
  utils.check_eccentricity(ecc)
  harmonics = 16
  while True:
    matrix = _recurrence_matrix(beta, ecc, harmonics)
    _, singular, vh = linalg.svd(matrix)
    v = vh[-1]
    trailing = np.linalg.norm(v[-2:]) / np.linalg.norm(v)
    if trailing < tolerances.recurrence_decay_tol:
      break
    if 2 * harmonics > tolerances.recurrence_max_harmonics:
      raise utils.ConvergenceError(
          f"Recurrence at beta={beta}, e={ecc} did not decay by "
          f"{harmonics} harmonics.", last_values=[float(trailing)])
    harmonics *= 2
  ratios = singular / singular[0]
  nullity = int(np.sum(ratios < tolerances.recurrence_sv_tol))
  exists = nullity > 0
  families = 2 if parity == "both" else 1

  blocks = v.reshape(-1, 2)
  dominant = int(np.argmax(np.abs(blocks[:, 1])))
  scale = -1.0 / blocks[dominant, 1] if blocks[dominant, 1] != 0 else 1.0
  blocks = blocks * scale
  a = np.concatenate([[0.0], blocks[:, 0]])
  d = np.concatenate([[0.0], blocks[:, 1]])
  a1, d1 = (a[1], d[1]) if harmonics >= 1 else (0.0, 0.0)
  a[0] = -ecc * (d1 + a1 / 2) / (2 * beta + 3)
  c0 = -(ecc / beta) * (a1 + d1 / 2)
  logging.debug("Recurrence at beta=%s, e=%s: ratio %.3g with %d harmonics",
                beta, ecc, ratios[-1], harmonics)
  return KernelBasis(beta=beta, ecc=ecc, exists=exists,
                     dimension=families * nullity,
                     singular_ratio=float(ratios[-1]), harmonics=harmonics,
                     a=a, d=d, c0=float(c0))
