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
"""Collinear central configurations of three bodies.

Three masses on a line q1 < q2 < q3 form a central configuration when the
distance ratio x = |q2 - q3| / |q1 - q2| is the unique positive root of Euler's
quintic. From x and the masses we derive the scale alpha, the mass parameter
beta that enters the linearized dynamics, and the auxiliary quantities delta,
mu and sigma. delta is computed independently from the geometry and must equal
beta + 1.
"""

import dataclasses
import math
from typing import Mapping, Sequence, Tuple

from absl import logging
from eulerstab import utils
import numpy as np
from scipy import optimize

_SUM_TOL = 1e-12
_QUINTIC_RESIDUAL_TOL = 1e-12
_DELTA_TOL = 1e-10
_MAX_BRACKET = 2.0 ** 40


@dataclasses.dataclass(frozen=True)
class MassTriple:
  """Three non-negative masses normalized to sum to one.

  At most one mass may vanish; the triple (0, 1, 0) is also admitted since it
  realizes the beta = 0 boundary.
  """
  m1: float
  m2: float
  m3: float

  def __post_init__(self):
    values = np.array([self.m1, self.m2, self.m3], dtype=float)
    if not np.all(np.isfinite(values)) or np.any(values < 0):
      raise utils.InputError(
          f"Masses must be finite and non-negative, got {values.tolist()}.",
          masses=values.tolist())
    total = values.sum()
    if total <= 0:
      raise utils.InputError("At least one mass must be positive.")
    # Normalised input is kept bit-exact.
    if abs(total - 1.0) > 4 * np.finfo(float).eps:
      values = values / total
    zeros = int(np.sum(values == 0))
    if zeros >= 2 and not (zeros == 2 and values[1] == 1.0):
      raise utils.InputError(
          f"At most one mass may vanish (except (0, 1, 0)), got "
          f"{values.tolist()}.", masses=values.tolist())
    object.__setattr__(self, "m1", float(values[0]))
    object.__setattr__(self, "m2", float(values[1]))
    object.__setattr__(self, "m3", float(values[2]))
    assert abs(self.m1 + self.m2 + self.m3 - 1.0) < _SUM_TOL

  @classmethod
  def parse(cls, text: str) -> "MassTriple":
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if len(parts) != 3:
      raise utils.InputError(
          f"Expected three comma-separated masses, got {text!r}.")
    try:
      return cls(*[float(p) for p in parts])
    except ValueError as e:
      if isinstance(e, utils.InputError):
        raise
      raise utils.InputError(f"Cannot parse masses {text!r}: {e}") from e

  @property
  def values(self) -> Tuple[float, float, float]:
    return (self.m1, self.m2, self.m3)

  @property
  def is_degenerate(self) -> bool:
    """True when two masses vanish and no pair of bodies interacts."""
    return sum(m == 0 for m in self.values) >= 2

  def reversed(self) -> "MassTriple":
    """The same configuration read from the other end of the line."""
    return MassTriple(self.m3, self.m2, self.m1)


@dataclasses.dataclass(frozen=True)
class CentralConfig:
  """Central-configuration data of a mass triple.

  Attributes:
    masses: the normalized mass triple.
    x: the positive root of Euler's quintic.
    alpha: the scale; infinite when two masses vanish.
    beta: the mass parameter in [0, 7].
    delta: delta evaluated from the geometry; equals beta + 1.
    mu: the potential factor; zero when two masses vanish.
    sigma: (mu * p) ** (1/4).
    p: the semi-latus rectum used for sigma.
  """
  masses: MassTriple
  x: float
  alpha: float
  beta: float
  delta: float
  mu: float
  sigma: float
  p: float = 1.0

  def to_json_dict(self) -> Mapping[str, object]:
    return {
        "masses": list(self.masses.values),
        "x": self.x,
        "alpha": self.alpha,
        "beta": self.beta,
        "delta": self.delta,
        "mu": self.mu,
        "sigma": self.sigma,
        "p": self.p,
    }


def quintic_coefficients(masses: MassTriple) -> np.ndarray:
  """Coefficients of Euler's quintic, highest degree first."""
  m1, m2, m3 = masses.values
  return np.array([
      m3 + m2,
      3 * m3 + 2 * m2,
      3 * m3 + m2,
      -(3 * m1 + m2),
      -(3 * m1 + 2 * m2),
      -(m1 + m2),
  ])


def sign_variations(coeffs: Sequence[float]) -> int:
  """Number of sign changes in a coefficient sequence, zeros skipped."""
  signs = [np.sign(c) for c in coeffs if c != 0]
  return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _scaled_residual(coeffs: np.ndarray, x: float) -> float:
  powers = x ** np.arange(len(coeffs) - 1, -1, -1)
  scale = max(np.max(np.abs(coeffs * powers)), np.max(np.abs(coeffs)))
  return abs(np.polyval(coeffs, x)) / scale


def solve_euler_quintic(masses: MassTriple) -> float:
  """Returns the unique positive root of Euler's quintic.

  The constant term is negative and the leading one positive, so the root is
  bracketed by [0, hi] once hi is doubled far enough.

  Args:
    masses: a valid MassTriple.

  Returns:
    the positive root x.

  Raises:
    ConfigurationError: if no sign change is found within [0, 2**40].
  """
  coeffs = quintic_coefficients(masses)
  if sign_variations(coeffs) != 1:
    raise utils.ConfigurationError(
        f"Euler's quintic for {masses.values} has no unique positive root.",
        coefficients=coeffs.tolist())
  p = lambda x: float(np.polyval(coeffs, x))
  if p(0.0) >= 0:
    raise utils.ConfigurationError(
        f"Euler's quintic for {masses.values} does not change sign at 0.")
  hi = 1.0
  while p(hi) <= 0:
    hi *= 2.0
    if hi > _MAX_BRACKET:
      raise utils.ConfigurationError(
          f"No sign change of Euler's quintic within [0, 2^40] for "
          f"{masses.values}.")
  x = optimize.brentq(p, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps,
                      maxiter=500)
  residual = _scaled_residual(coeffs, x)
  if residual >= _QUINTIC_RESIDUAL_TOL:
    raise utils.ConfigurationError(
        f"Quintic residual {residual} too large at x={x}.", x=x)
  logging.debug("Quintic root x=%.17g for masses %s", x, masses.values)
  return x


def mass_parameter(masses: MassTriple, x: float) -> float:
  """Returns beta from the masses and the quintic root."""
  m1, m2, m3 = masses.values
  numerator = m1 * (3 * x**2 + 3 * x + 1) + m3 * x**2 * (x**2 + 3 * x + 3)
  denominator = x**2 + m2 * ((x + 1)**2 * (x**2 + 1) - x**2)
  assert denominator > 0, denominator
  return numerator / denominator


def alpha_squared_inverse(masses: MassTriple, x: float) -> float:
  m1, _, m3 = masses.values
  return m1 * (1 - m1) * x**2 + 2 * m1 * m3 * x + m3 * (1 - m3)


def scale(masses: MassTriple, x: float) -> float:
  """Returns alpha; infinite when the denominator vanishes."""
  d = alpha_squared_inverse(masses, x)
  return math.inf if d <= 0 else 1.0 / math.sqrt(d)


def positions(masses: MassTriple, x: float, alpha: float) -> np.ndarray:
  """The collinear positions a_1 < a_2 < a_3, centered at the mass center."""
  m1, _, m3 = masses.values
  return alpha * np.array([
      -(m3 + (1 - m1) * x),
      -m3 + m1 * x,
      (1 - m3) + m1 * x,
  ])


def pair_distances(masses: MassTriple, x: float, alpha: float) -> np.ndarray:
  """|a_1 - a_2|, |a_2 - a_3| and |a_1 - a_3|."""
  a = positions(masses, x, alpha)
  return np.array([a[1] - a[0], a[2] - a[1], a[2] - a[0]])


_PAIRS = ((0, 1, 2), (1, 2, 0), (0, 2, 1))


def delta_from_geometry(masses: MassTriple, x: float) -> float:
  """Evaluates delta as a ratio of sums over the three pairs.

  The numerator terms m_i m_j (b_i - b_j)^2 are expanded without dividing by
  the masses, so a single vanishing mass is admitted.

  Args:
    masses: a valid MassTriple.
    x: the quintic root for these masses.

  Returns:
    delta, which should equal beta + 1.
  """
  if masses.is_degenerate:
    logging.warning(
        "No interacting pair for masses %s; using the limit delta = 1.",
        masses.values)
    return 1.0
  alpha = scale(masses, x)
  m = np.array(masses.values)
  c = np.array([1.0, -(1.0 + x), x])
  prod = m[0] * m[1] * m[2]
  a = positions(masses, x, alpha)
  numerator = 0.0
  mu = 0.0
  for i, j, k in _PAIRS:
    dist = abs(a[i] - a[j])
    term = alpha**2 * (m[j]**2 * m[k] * c[i]**2 - 2 * prod * c[i] * c[j] +
                       m[i]**2 * m[k] * c[j]**2)
    numerator += term / dist**3
    mu += m[i] * m[j] / dist
  return numerator / mu


def delta_closed_form(masses: MassTriple, x: float) -> float:
  """delta as a rational function of x and the masses."""
  m1, m2, m3 = masses.values
  p1 = (m3 * (1 + x)**3 * (m2 + m1 + m1 * x)**2 +
        m1 * x**3 * (1 + x)**3 * (m3 + m3 * x + m2 * x)**2 +
        m2 * x**3 * (m1 * x - m3)**2)
  q1 = x**2 * (1 + x)**2 * (m2 * m3 * x**2 +
                            (m1 * m2 + m2 * m3 + m3 * m1) * x + m1 * m2)
  if q1 == 0:
    return 1.0
  return p1 / q1


def central_config(masses: MassTriple, p: float = 1.0) -> CentralConfig:
  """Assembles the central-configuration data of a mass triple."""
  if p <= 0:
    raise utils.InputError(f"Semi-latus rectum must be positive, got {p}.")
  x = solve_euler_quintic(masses)
  beta = mass_parameter(masses, x)
  delta = delta_from_geometry(masses, x)
  alpha = scale(masses, x)
  m1, m2, m3 = masses.values
  if math.isinf(alpha):
    logging.warning(
        "Masses %s have a single body; alpha is infinite and mu = sigma = 0.",
        masses.values)
    mu = 0.0
  else:
    mu = (m1 * m2 / x + m2 * m3 + m3 * m1 / (1 + x)) / alpha
  sigma = (mu * p)**0.25
  if abs(delta - (beta + 1)) >= _DELTA_TOL:
    raise utils.ConfigurationError(
        f"delta={delta!r} disagrees with beta + 1={beta + 1!r}.",
        masses=list(masses.values))
  if not -_DELTA_TOL <= beta <= 7 + _DELTA_TOL:
    raise utils.ConfigurationError(f"beta={beta!r} outside [0, 7].")
  return CentralConfig(masses=masses, x=x, alpha=alpha, beta=beta, delta=delta,
                       mu=mu, sigma=sigma, p=p)


def symmetry_report(masses: MassTriple) -> Mapping[str, float]:
  """Compares a triple with its reversal m1 <-> m3.

  Reading the line from the other end maps x to 1/x and should leave beta
  unchanged; the deviations are reported, not asserted.
  """
  x = solve_euler_quintic(masses)
  x_rev = solve_euler_quintic(masses.reversed())
  beta = mass_parameter(masses, x)
  beta_rev = mass_parameter(masses.reversed(), x_rev)
  return {
      "x": x,
      "x_reversed": x_rev,
      "reciprocity_defect": abs(x * x_rev - 1.0),
      "beta_defect": abs(beta - beta_rev),
  }


def continuity_report(masses: MassTriple, step: float = 1e-6,
                      ) -> Mapping[str, float]:
  """Fits |beta(m + dm) - beta(m)| <= C |dm| over directions in the simplex."""
  base = mass_parameter(masses, solve_euler_quintic(masses))
  directions = np.array([[1, -1, 0], [0, 1, -1], [1, 0, -1]], dtype=float)
  directions /= np.linalg.norm(directions, axis=1, keepdims=True)
  ratios = []
  m = np.array(masses.values)
  for d in directions:
    for sign in (1.0, -1.0):
      perturbed = m + sign * step * d
      if np.any(perturbed < 0):
        continue
      try:
        other = MassTriple(*perturbed)
      except utils.InputError:
        continue
      beta = mass_parameter(other, solve_euler_quintic(other))
      ratios.append(abs(beta - base) / step)
  constant = max(ratios) if ratios else 0.0
  return {"step": step, "constant": constant, "samples": len(ratios),
          "within_bound": constant <= 1e3}
