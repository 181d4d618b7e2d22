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
"""Shared utilities: errors, tolerances, serialization and configuration."""

import dataclasses
import json
import math
import os
from typing import Any, Mapping, MutableMapping, Optional

from absl import logging
import numpy as np

MAX_WORKERS_ENV = "EULERSTAB_MAX_WORKERS"
DEFAULT_ECC_CAP = 0.99

# Exit codes of the command-line tool.
EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONVERGENCE = 3
EXIT_CLASSIFICATION = 4


class EulerStabError(Exception):
  """Base class for all errors raised by this package."""

  exit_code = 1

  def __init__(self, message: str, **details):
    super().__init__(message)
    self.details = details

  def to_json_dict(self) -> Mapping[str, Any]:
    return {
        "error": {
            "type": type(self).__name__,
            "message": str(self),
            "exit_code": self.exit_code,
            "details": self.details,
        }
    }


class InputError(EulerStabError, ValueError):
  """Invalid masses, eccentricity, unit-circle point or grid."""
  exit_code = EXIT_INPUT


class ConfigurationError(InputError):
  """The mass triple does not define a central configuration."""


class IntegrationError(EulerStabError, RuntimeError):
  """The ODE integrator gave up before reaching the end of the period."""
  exit_code = EXIT_CONVERGENCE


class ConvergenceError(EulerStabError, RuntimeError):
  """A truncated computation did not stabilize before its cap."""
  exit_code = EXIT_CONVERGENCE


class AmbiguousClassificationError(EulerStabError):
  """The spectrum sits too close to a boundary between normal-form classes."""
  exit_code = EXIT_CLASSIFICATION


class ClassificationConflictError(EulerStabError):
  """A predicted normal form or index disagrees with the computed one."""
  exit_code = EXIT_CLASSIFICATION


@dataclasses.dataclass(frozen=True)
class Tolerances:
  """Numerical tolerances shared by the computational modules.

  Attributes:
    integrator_rtol: relative local error target of the Runge-Kutta solver.
    integrator_atol: absolute local error target of the Runge-Kutta solver.
    symplectic_tol: bound on the scaled symplectic defect of a monodromy.
    backward_tol: bound on the scaled backward-integration residual.
    null_tol_rel: null tolerance of Galerkin spectra, relative to the norm of
      the mean potential term (independent of the truncation).
    gap_factor: the first eigenvalue outside the null cluster must exceed
      `gap_factor * null_tol`, or stay put when the truncation doubles.
    max_truncation: largest Fourier truncation tried before giving up.
    cluster_tol: radius used to group eigenvalues around a unit-circle point.
    rank_tol: singular-value threshold for ranks of triangular blocks.
    unit_tol: eigenvalues within this distance of the unit circle are elliptic.
    ambiguity_tol: eigenvalues between `unit_tol` and this distance from a
      class boundary are reported as ambiguous.
    root_xtol: absolute tolerance of degenerate-point root finding.
    merge_tol: roots closer than this are merged into one root.
    refine_tol: largest root shift allowed when doubling the truncation.
    scan_step: step of the beta scan that brackets degenerate points.
    slope_cap: largest admissible |d beta / d e| between traced samples.
    recurrence_sv_tol: relative singular value below which the kernel
      recurrence is considered singular.
    recurrence_decay_tol: trailing block norm at which the recurrence is
      considered resolved.
    recurrence_max_harmonics: harmonic cap for the kernel recurrence.
  """
  integrator_rtol: float = 1e-12
  integrator_atol: float = 1e-14
  symplectic_tol: float = 1e-9
  backward_tol: float = 1e-8
  null_tol_rel: float = 1e-7
  gap_factor: float = 10.0
  max_truncation: int = 1024
  cluster_tol: float = 1e-3
  rank_tol: float = 1e-6
  unit_tol: float = 1e-7
  ambiguity_tol: float = 1e-6
  root_xtol: float = 1e-9
  merge_tol: float = 1e-6
  refine_tol: float = 1e-8
  scan_step: float = 0.02
  slope_cap: float = 50.0
  recurrence_sv_tol: float = 1e-8
  recurrence_decay_tol: float = 1e-14
  recurrence_max_harmonics: int = 512

  def replace(self, **changes) -> "Tolerances":
    return dataclasses.replace(self, **changes)


DEFAULT_TOLERANCES = Tolerances()


def check_eccentricity(ecc: float, allow_high: bool = True,
                       cap: float = DEFAULT_ECC_CAP) -> float:
  """Validates an eccentricity, optionally enforcing the default run cap."""
  ecc = float(ecc)
  if not math.isfinite(ecc) or ecc < 0 or ecc >= 1:
    raise InputError(f"Eccentricity must lie in [0, 1), got {ecc}.", ecc=ecc)
  if ecc > cap:
    if not allow_high:
      raise InputError(
          f"Eccentricity {ecc} exceeds the default cap {cap}; pass "
          "--allow_high_ecc to run it anyway.", ecc=ecc, cap=cap)
    logging.warning(
        "Eccentricity %s exceeds %s; truncations grow quickly as e -> 1.",
        ecc, cap)
  return ecc


def check_unit(omega: complex, tol: float = 1e-14) -> complex:
  omega = complex(omega)
  if abs(abs(omega) - 1.0) > tol:
    raise InputError(
        f"omega must lie on the unit circle, got |omega|={abs(omega)!r}.",
        omega=[omega.real, omega.imag])
  return omega


def max_norm(a: np.ndarray) -> float:
  return float(np.max(np.abs(a))) if np.size(a) else 0.0


def standard_symplectic(n: int = 2) -> np.ndarray:
  """Returns J = [[0, -I_n], [I_n, 0]]."""
  eye = np.eye(n)
  zero = np.zeros((n, n))
  return np.block([[zero, -eye], [eye, zero]])


def rotation(t: float) -> np.ndarray:
  c, s = math.cos(t), math.sin(t)
  return np.array([[c, -s], [s, c]])


# ---------------------------------- serialization ----------------------------


def to_17g(value: float) -> float:
  """Rounds a float through its 17-significant-digit text form."""
  return float("%.17g" % value)


def format_float(value: float) -> str:
  return "%.17g" % value


class NumpyEncoder(json.JSONEncoder):
  """JSON Encoder for dicts with numpy arrays, complex numbers and dataclasses."""

  def default(self, obj):
    if isinstance(obj, np.ndarray):
      if np.iscomplexobj(obj):
        return [[to_17g(z.real), to_17g(z.imag)] for z in obj.ravel()]
      return obj.tolist()  # Convert arrays to lists of py-native types.
    elif isinstance(obj, (complex, np.complexfloating)):
      return [to_17g(obj.real), to_17g(obj.imag)]
    elif (np.issubdtype(type(obj), np.number) or
          np.issubdtype(type(obj), np.bool_)):
      return obj.item()  # Convert most primitive np types to py-native types.
    elif dataclasses.is_dataclass(obj):
      return dataclasses.asdict(obj)
    elif hasattr(obj, "to_json_dict"):
      return obj.to_json_dict()
    return json.JSONEncoder.default(self, obj)


def _round_floats(obj):
  if hasattr(obj, "to_json_dict") and not isinstance(obj, type):
    return _round_floats(obj.to_json_dict())
  if isinstance(obj, (float, np.floating)):
    return to_17g(float(obj)) if math.isfinite(obj) else str(float(obj))
  if isinstance(obj, np.ndarray) and not np.iscomplexobj(obj):
    return _round_floats(obj.tolist())
  if isinstance(obj, Mapping):
    return {k: _round_floats(v) for k, v in obj.items()}
  if isinstance(obj, (list, tuple)):
    return [_round_floats(v) for v in obj]
  if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
    return _round_floats(dataclasses.asdict(obj))
  return obj


def dumps_json(obj: Any) -> str:
  """Serializes with 17 significant digits, sorted keys and indentation."""
  return json.dumps(_round_floats(obj), cls=NumpyEncoder, sort_keys=True,
                    indent=2)


# ---------------------------------- configuration ----------------------------


def load_config_file(path: str) -> MutableMapping[str, str]:
  """Reads `key = value` lines; `#` starts a comment and blank lines are skipped.

  Args:
    path: string, path of the configuration file.

  Returns:
    an ordered dict from key to the raw string value.

  Raises:
    ConfigurationError: if a line is malformed or a key repeats.
  """
  entries = {}
  try:
    with open(path) as f:
      lines = f.readlines()
  except OSError as e:
    raise ConfigurationError(f"Cannot read config file {path}: {e}") from e
  for lineno, line in enumerate(lines, start=1):
    line = line.split("#", 1)[0].strip()
    if not line:
      continue
    if "=" not in line:
      raise ConfigurationError(
          f"{path}:{lineno}: expected 'key = value', got {line!r}.")
    key, value = (part.strip() for part in line.split("=", 1))
    if not key:
      raise ConfigurationError(f"{path}:{lineno}: empty key.")
    if key in entries:
      raise ConfigurationError(f"{path}:{lineno}: duplicate key {key!r}.")
    entries[key] = value
  logging.info("Loaded %d config entries from %s", len(entries), path)
  return entries


def max_workers(override: Optional[int] = None) -> int:
  """Worker pool size from `override`, the environment, or the CPU count."""
  if override:
    return max(1, int(override))
  env = os.environ.get(MAX_WORKERS_ENV)
  if env:
    try:
      return max(1, int(env))
    except ValueError:
      logging.warning("Ignoring non-integer %s=%r", MAX_WORKERS_ENV, env)
  return max(1, min(8, os.cpu_count() or 1))
