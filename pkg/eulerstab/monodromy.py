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
"""Fundamental solutions of the essential linearized system.

The essential part of the linearization around an elliptic Euler orbit is the
4x4 Hamiltonian system gamma' = J B(t) gamma, gamma(0) = I, whose coefficient
depends only on the mass parameter beta and the eccentricity e. Time is the
true anomaly and the period is 2 pi.

The system is reversible: with G = diag(1, -1, -1, 1) we have G B(t) G = B(-t)
and G J G = -J, hence gamma(2 pi) = G gamma(pi)^-1 G gamma(pi). Monodromy
matrices keep gamma(pi) next to gamma(2 pi) so that unit-circle eigenvalues
and their eigenvectors can be taken from the pencil (gamma(pi), G gamma(pi) G),
whose entries are the square root of the monodromy's in size.
"""

import dataclasses
import math
from typing import Mapping, Optional, Sequence

from absl import logging
from eulerstab import utils
import numpy as np
from scipy import integrate
from scipy import linalg

J4 = utils.standard_symplectic(2)
J2 = np.array([[0.0, -1.0], [1.0, 0.0]])
REVERSOR = np.diag([1.0, -1.0, -1.0, 1.0])
TWO_PI = 2 * math.pi
# Pencil eigenvalues within _UNIT_TOL of the unit circle replace full-matrix
# eigenvalues within _MATCH_TOL of them.
_UNIT_TOL = 1e-6
_MATCH_TOL = 1e-2


@dataclasses.dataclass(frozen=True)
class EssentialSystem:
  """The essential 4x4 system for a mass parameter and an eccentricity."""
  beta: float
  ecc: float

  def __post_init__(self):
    if not math.isfinite(self.beta) or self.beta < 0:
      raise utils.InputError(f"beta must be non-negative, got {self.beta}.",
                             beta=self.beta)
    utils.check_eccentricity(self.ecc)

  def coefficient_matrix(self, t: float) -> np.ndarray:
    return coefficient_matrix(self, t)


@dataclasses.dataclass(frozen=True, eq=False)
class SymplecticMatrix:
  """A symplectic matrix with its measured symplectic defect.

  Attributes:
    entries: the real 2n x 2n matrix.
    symplectic_defect: |M^T J M - J|_max / max(1, |M|_max^2).
    half_period: gamma(pi) when the matrix is a monodromy of the reversible
      system, else None.
  """
  entries: np.ndarray
  symplectic_defect: float
  half_period: Optional[np.ndarray] = None

  @classmethod
  def from_entries(cls, entries: np.ndarray,
                   half_period: Optional[np.ndarray] = None
                   ) -> "SymplecticMatrix":
    entries = np.asarray(entries, dtype=float)
    return cls(entries=entries,
               symplectic_defect=symplectic_defect(entries),
               half_period=half_period)

  @property
  def dim(self) -> int:
    return self.entries.shape[0]

  @property
  def norm(self) -> float:
    return utils.max_norm(self.entries)

  @property
  def det_defect(self) -> float:
    """|det M - 1| evaluated as the product of the spectrum."""
    return float(abs(np.prod(spectrum(self)) - 1.0))

  def to_json_dict(self) -> Mapping[str, object]:
    return {
        "entries": self.entries,
        "symplectic_defect": self.symplectic_defect,
        "eigenvalues": spectrum(self),
    }


def symplectic_defect(m: np.ndarray) -> float:
  n = m.shape[0] // 2
  j = utils.standard_symplectic(n)
  return utils.max_norm(m.T @ j @ m - j) / max(1.0, utils.max_norm(m)**2)


def k_matrix(sys: EssentialSystem, t: float) -> np.ndarray:
  """K(t) = diag(2 beta + 3, -beta) / (1 + e cos t)."""
  return np.diag([2 * sys.beta + 3, -sys.beta]) / (1 + sys.ecc * math.cos(t))


def coefficient_matrix(sys: EssentialSystem, t: float) -> np.ndarray:
  """Returns the symmetric coefficient B(t) of the essential system."""
  c = sys.ecc * math.cos(t)
  k1 = (-2 * sys.beta - 2 + c) / (1 + c)
  k2 = (sys.beta + 1 + c) / (1 + c)
  return np.array([
      [1.0, 0.0, 0.0, 1.0],
      [0.0, 1.0, -1.0, 0.0],
      [0.0, -1.0, k1, 0.0],
      [1.0, 0.0, 0.0, k2],
  ])


def rotation4(t: float) -> np.ndarray:
  """diag(R(t), R(t)); exactly the identity at multiples of 2 pi."""
  r = utils.rotation(math.fmod(t, TWO_PI))
  out = np.zeros((4, 4))
  out[np.ix_([0, 1], [0, 1])] = r
  out[np.ix_([2, 3], [2, 3])] = r
  return out


def modified_coefficient_matrix(sys: EssentialSystem, t: float) -> np.ndarray:
  """Coefficient of the modified path: diag(I, R (I - K) R^T)."""
  r = utils.rotation(t)
  out = np.eye(4)
  out[2:, 2:] = r @ (np.eye(2) - k_matrix(sys, t)) @ r.T
  return out


def _propagate(sys: EssentialSystem, start: np.ndarray, t0: float, t1: float,
               tolerances: utils.Tolerances) -> np.ndarray:
  """Integrates gamma' = J B gamma from gamma(t0) = start to t1."""
  ncols = start.shape[1]

  def rhs(t, y):
    return (J4 @ coefficient_matrix(sys, t) @ y.reshape(4, ncols)).ravel()

  sol = integrate.solve_ivp(
      rhs, (t0, t1), start.ravel(), method="DOP853",
      rtol=tolerances.integrator_rtol, atol=tolerances.integrator_atol)
  if not sol.success:
    achieved = float(sol.t[-1]) if sol.t.size else t0
    raise utils.IntegrationError(
        f"Integration of beta={sys.beta}, e={sys.ecc} stopped at t={achieved}: "
        f"{sol.message}", achieved_t=achieved, beta=sys.beta, ecc=sys.ecc)
  return sol.y[:, -1].reshape(4, ncols)


def monodromy(sys: EssentialSystem,
              tolerances: utils.Tolerances = utils.DEFAULT_TOLERANCES
              ) -> SymplecticMatrix:
  """Returns gamma(2 pi) integrated from the identity.

  Args:
    sys: the essential system.
    tolerances: integrator tolerances; the symplectic defect is monitored
      against `tolerances.symplectic_tol`.

  Returns:
    the monodromy, carrying gamma(pi) for spectral computations.

  Raises:
    IntegrationError: if the integrator fails before t = 2 pi.
  """
  half = _propagate(sys, np.eye(4), 0.0, math.pi, tolerances)
  full = _propagate(sys, half, math.pi, TWO_PI, tolerances)
  m = SymplecticMatrix.from_entries(full, half_period=half)
  if m.symplectic_defect >= tolerances.symplectic_tol:
    logging.warning("Symplectic defect %.3g at beta=%s, e=%s",
                    m.symplectic_defect, sys.beta, sys.ecc)
  return m


def monodromy_e0_exact(beta: float) -> SymplecticMatrix:
  """exp(2 pi J B) for the circular case, by scaling and squaring."""
  jb = J4 @ coefficient_matrix(EssentialSystem(beta, 0.0), 0.0)
  return SymplecticMatrix.from_entries(
      linalg.expm(TWO_PI * jb), half_period=linalg.expm(math.pi * jb))


def backward_residual(sys: EssentialSystem, m: SymplecticMatrix,
                      tolerances: utils.Tolerances = utils.DEFAULT_TOLERANCES
                      ) -> float:
  """Integrates back from gamma(2 pi) and returns |gamma(0) - I| / |M|^2."""
  mid = _propagate(sys, m.entries, TWO_PI, math.pi, tolerances)
  start = _propagate(sys, mid, math.pi, 0.0, tolerances)
  return utils.max_norm(start - np.eye(4)) / max(1.0, m.norm**2)


@dataclasses.dataclass(frozen=True, eq=False)
class ModifiedPath:
  """Samples xi(t_k) = R4(t_k) gamma(t_k) on a uniform grid of [0, 2 pi]."""
  times: np.ndarray
  samples: Sequence[SymplecticMatrix]

  @property
  def endpoint(self) -> SymplecticMatrix:
    return self.samples[-1]


def modified_path(sys: EssentialSystem, num_samples: int = 64,
                  tolerances: utils.Tolerances = utils.DEFAULT_TOLERANCES
                  ) -> ModifiedPath:
  """Samples the modified path; its endpoint is gamma(2 pi)."""
  if num_samples < 1:
    raise utils.InputError(f"num_samples must be positive, got {num_samples}.")
  times = np.linspace(0.0, TWO_PI, num_samples + 1)
  times[-1] = TWO_PI
  gamma = np.eye(4)
  samples = [SymplecticMatrix.from_entries(np.eye(4))]
  for t0, t1 in zip(times[:-1], times[1:]):
    gamma = _propagate(sys, gamma, t0, t1, tolerances)
    samples.append(SymplecticMatrix.from_entries(rotation4(t1) @ gamma))
  return ModifiedPath(times=times, samples=samples)


def _pair_reciprocals(eigs: np.ndarray, tol: float = 1e-6) -> np.ndarray:
  """Replaces the contracting eigenvalues by reciprocals of expanding ones."""
  eigs = np.array(eigs, dtype=complex)
  big = [i for i in np.argsort(-np.abs(eigs)) if abs(eigs[i]) > 1 + tol]
  used = set()
  for i in big:
    target = 1.0 / eigs[i]
    candidates = [j for j in range(len(eigs))
                  if j not in used and j not in big and abs(eigs[j]) < 1 - tol]
    if not candidates:
      break
    j = min(candidates, key=lambda k: abs(eigs[k] - target))
    eigs[j] = target
    used.add(j)
  return eigs


def spectrum(m: SymplecticMatrix) -> np.ndarray:
  """Eigenvalues of a symplectic matrix, sorted by modulus and angle.

  Eigenvalues off the unit circle come from the full matrix. When the
  half-period matrix is known, the pencil's unit-circle eigenvalues replace
  their nearest full-matrix counterparts; the pencil is not used off the
  circle, where it loses accuracy on large multipliers.
  """
  eigs = np.array(linalg.eigvals(m.entries), dtype=complex)
  if m.half_period is not None:
    a = m.half_period
    pencil = linalg.eigvals(a, REVERSOR @ a @ REVERSOR)
    pencil = pencil[np.isfinite(pencil)]
    replaced = np.zeros(len(eigs), dtype=bool)
    for z in pencil[np.abs(np.abs(pencil) - 1) <= _UNIT_TOL]:
      dist = np.where(replaced, np.inf, np.abs(eigs - z))
      i = int(np.argmin(dist))
      if dist[i] <= _MATCH_TOL:
        eigs[i] = z
        replaced[i] = True
  eigs = _pair_reciprocals(eigs)
  order = np.lexsort((np.round(np.angle(eigs), 12), np.round(np.abs(eigs), 12)))
  return eigs[order]


def eigenpairs(m: SymplecticMatrix):
  """Eigenvalues and right eigenvectors, from the reversible pencil if known."""
  if m.half_period is not None:
    a = m.half_period
    return linalg.eig(a, REVERSOR @ a @ REVERSOR)
  return linalg.eig(m.entries)


def e0_exponents(beta: float):
  """(alpha_1, theta) with eigenvalues of J B equal to +-sqrt(alpha_1), +-i theta."""
  s = math.sqrt(9 * beta**2 + 10 * beta + 1)
  return (beta - 1 + s) / 2, math.sqrt((1 - beta + s) / 2)


def e0_eigenvalues(beta: float) -> np.ndarray:
  """Closed-form circular-orbit multipliers e^{+-2 pi sqrt(alpha_1)}, e^{+-2 pi i theta}."""
  alpha1, theta = e0_exponents(beta)
  r = math.sqrt(max(alpha1, 0.0))
  return np.array([
      math.exp(-TWO_PI * r), np.exp(-1j * TWO_PI * theta),
      np.exp(1j * TWO_PI * theta), math.exp(TWO_PI * r)])


def characteristic_polynomial_e0(beta: float) -> np.ndarray:
  """Coefficients of det(J B - lambda I) for e = 0, highest degree first."""
  return np.array([1.0, 0.0, 1.0 - beta, 0.0, -beta * (2 * beta + 3)])


def stability_summary(m: SymplecticMatrix, tol: float = 1e-6
                      ) -> Mapping[str, object]:
  """Counts elliptic and hyperbolic pairs of a monodromy."""
  eigs = spectrum(m)
  on_circle = np.abs(np.abs(eigs) - 1.0) <= tol
  radius = float(np.max(np.abs(eigs)))
  return {
      "eigenvalues": eigs,
      "elliptic_pairs": int(np.sum(on_circle)) // 2,
      "hyperbolic_pairs": int(np.sum(~on_circle)) // 2,
      "spectral_radius": radius,
      "linearly_stable": bool(np.all(on_circle)),
  }
