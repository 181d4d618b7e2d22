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
"""EulerStab test utilities."""

import math
from typing import Sequence, Tuple

from absl.testing import absltest
from absl.testing import parameterized
from eulerstab import atlas
from eulerstab import index_theory
from eulerstab import monodromy as monodromy_lib
from eulerstab import spectral
import numpy as np

# Circular-orbit degenerate points.
BETA_HAT_2 = (1 + math.sqrt(97)) / 4
BETA_HAT_3 = (6 + math.sqrt(612)) / 4
BETA_HAT_3_2 = index_theory.beta_hat(1.5)
BETA_HAT_5_2 = index_theory.beta_hat(2.5)

# The kernel amplitude at beta_hat_2.
A_2 = (4 - BETA_HAT_2) / 4


# _ProxyTest gives module-level helpers access to assertion methods.
class _ProxyTest(absltest.TestCase):
  """Instance of TestCase to reuse methods for testing."""
  maxDiff = None

  def runTest(self):
    pass


_pyunit_proxy = _ProxyTest()


def assert_symplectic(m, tol: float = 1e-9):
  """Asserts that M^T J M = J relative to |M|^2."""
  entries = m.entries if isinstance(m, monodromy_lib.SymplecticMatrix) else m
  _pyunit_proxy.assertLess(monodromy_lib.symplectic_defect(np.asarray(entries)),
                           tol)


def assert_spectrum_close(computed: Sequence[complex],
                          expected: Sequence[complex], rtol: float = 1e-7):
  """Asserts equal multisets of eigenvalues up to relative error."""
  computed = sorted(np.asarray(computed, dtype=complex),
                    key=lambda z: (round(abs(z), 6), round(np.angle(z), 6)))
  expected = sorted(np.asarray(expected, dtype=complex),
                    key=lambda z: (round(abs(z), 6), round(np.angle(z), 6)))
  _pyunit_proxy.assertLen(computed, len(expected))
  for z in expected:
    nearest = min(computed, key=lambda w: abs(w - z))
    _pyunit_proxy.assertLess(abs(nearest - z) / max(1.0, abs(z)), rtol,
                             msg="eigenvalue %s vs %s" % (nearest, z))


def assert_index_pair(pair: spectral.IndexPair, expected: Tuple[int, int]):
  _pyunit_proxy.assertEqual((pair.index, pair.nullity), tuple(expected))


def make_slice(omega: float, ecc: float,
               betas: Sequence[Sequence[float]]) -> atlas.AtlasSlice:
  """A slice from groups of coinciding degenerate points.

  Args:
    omega: 1 or -1.
    ecc: the eccentricity of the slice.
    betas: one sequence per root, its length being the multiplicity; e.g.
      [[1.0, 1.0], [2.0]].

  Returns:
    the AtlasSlice.
  """
  roots = []
  ordinal = 1
  for group in betas:
    roots.append(atlas.DegenerateRoot(
        beta=float(group[0]), multiplicity=len(group),
        ordinals=tuple(range(ordinal, ordinal + len(group))), truncation=16))
    ordinal += len(group)
  return atlas.AtlasSlice(omega=complex(omega), ecc=ecc, roots=tuple(roots))


def rotation_block(theta: float) -> np.ndarray:
  return index_theory.normal_form_matrix(
      index_theory.BasicNormalForm(index_theory.R, np.exp(1j * theta)))


def hyperbolic_block(lam: float) -> np.ndarray:
  return index_theory.normal_form_matrix(
      index_theory.BasicNormalForm(index_theory.D, complex(lam)))


def random_symplectic_conjugate(m: np.ndarray, seed: int = 0) -> np.ndarray:
  """P M P^{-1} for a random well-conditioned symplectic P."""
  rng = np.random.default_rng(seed)
  n = m.shape[0] // 2
  s = rng.normal(size=(n, n)) * 0.3
  s = s + s.T
  lower = np.block([[np.eye(n), np.zeros((n, n))], [s, np.eye(n)]])
  upper = np.block([[np.eye(n), s.T * 0.5], [np.zeros((n, n)), np.eye(n)]])
  p = lower @ upper
  return p @ m @ np.linalg.inv(p)


class StabilityTestCase(parameterized.TestCase):
  """Base class with numeric assertions for symplectic and spectral data."""

  def assertSymplectic(self, m, tol: float = 1e-9):
    assert_symplectic(m, tol)

  def assertSpectrumClose(self, computed, expected, rtol: float = 1e-7):
    assert_spectrum_close(computed, expected, rtol)

  def assertIndexPair(self, pair, expected):
    assert_index_pair(pair, expected)
