#  Copyright 2026 The lyapcomp Authors
#
#  Licensed under the Apache License, Version 2.0 (the "License");
#  you may not use this file except in compliance with the License.
#  You may obtain a copy of the License at
#
#       http://www.apache.org/licenses/LICENSE-2.0
#
#  Unless required by applicable law or agreed to in writing, software
#  distributed under the License is distributed on an "AS IS" BASIS,
#  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#  See the License for the specific language governing permissions and
#  limitations under the License.

"""Optimal rational-Krylov poles for symmetric spectral intervals.

For a spectrum inside [a, b] the poles are the negated optimal ADI shifts of
Zolotarev's third problem on [-b, -a] and [a, b]. They are evaluated from
Jacobi elliptic functions whose complementary parameter (a/b)^2 is passed in
directly, so that very wide intervals do not suffer from cancellation in
1 - (a/b)^2.
"""

from collections.abc import Sequence
import dataclasses
import logging
import math

import numpy as np
from scipy import optimize

from lyapcomp.utils import constants
from lyapcomp.utils import errors

_logger = logging.getLogger(__name__)

_AGM_MAX_ITERATIONS = 64
_INTERVAL_SLACK = 1e-12


@dataclasses.dataclass(frozen=True, eq=False)
class PoleSet:
  """Poles of a rational Krylov space and the interval they were built for.

  Attributes:
    poles: Pole values. Real pole sets are sorted increasingly; complex poles
      must come in conjugate pairs.
    interval: (a, b), the spectral interval used for construction.
  """

  poles: np.ndarray
  interval: tuple[float, float]

  def __post_init__(self) -> None:
    poles = np.asarray(self.poles).ravel()
    if poles.size < 1:
      raise errors.InputError("A pole set needs at least one pole")
    a, b = self.interval
    if not 0 < a <= b:
      raise errors.InputError(f"Invalid interval [{a}, {b}]")
    if np.all(np.imag(poles) == 0):
      poles = np.sort(np.real(poles).astype(np.float64))
    else:
      poles = poles.astype(np.complex128)
      if not np.allclose(np.sort_complex(poles), np.sort_complex(poles.conj())):
        raise errors.InputError(
            "Complex poles must be closed under conjugation"
        )
    real_parts = np.real(poles)
    inside = (np.imag(poles) == 0) & (real_parts >= a) & (real_parts <= b)
    if np.any(inside):
      raise errors.InputError(
          f"Poles {poles[inside]} lie inside the spectral interval [{a}, {b}]"
      )
    object.__setattr__(self, "poles", poles)
    object.__setattr__(self, "interval", (float(a), float(b)))

  @property
  def k(self) -> int:
    return self.poles.size

  @property
  def is_real(self) -> bool:
    return not np.iscomplexobj(self.poles)

  def __len__(self) -> int:
    return self.k

  def __iter__(self):
    return iter(self.poles.tolist())


@dataclasses.dataclass(frozen=True)
class EllipticKernel:
  """Complete elliptic integral K(m) with Jacobi elliptic functions.

  Attributes:
    m: Parameter (modulus squared).
    m1: Complementary parameter 1 - m, kept separately for accuracy.
    K: Complete elliptic integral of the first kind.
  """

  m: float
  m1: float
  K: float
  _a: tuple[float, ...] = dataclasses.field(repr=False)
  _c: tuple[float, ...] = dataclasses.field(repr=False)

  def jacobi(self, u: float | np.ndarray) -> tuple[np.ndarray, np.ndarray,
                                                   np.ndarray]:
    """Evaluates sn, cn and dn by the descending Landen (AGM) recursion.

    Args:
      u: Real argument(s).

    Returns:
      Arrays sn(u|m), cn(u|m), dn(u|m).
    """
    u = np.asarray(u, dtype=np.float64)
    steps = len(self._a) - 1
    phi = (2.0**steps) * self._a[-1] * u
    for n in range(steps, 0, -1):
      phi = (phi + np.arcsin(self._c[n] / self._a[n] * np.sin(phi))) / 2
    sn = np.sin(phi)
    cn = np.cos(phi)
    dn = np.sqrt(self.m1 + self.m * cn**2)
    return sn, cn, dn


def elliptic_kernel(m: float, *, m1: float | None = None) -> EllipticKernel:
  """Builds the AGM tables for parameter m.

  Args:
    m: Parameter in [0, 1).
    m1: Optional complementary parameter 1 - m. When given it is used for the
      starting value sqrt(1 - m) of the AGM instead of forming 1 - m.

  Returns:
    The kernel holding K(m) and a Jacobi evaluator.

  Raises:
    InputError: If m is outside [0, 1).
  """
  if m1 is None:
    m1 = 1.0 - m
  if not (0.0 <= m < 1.0) or m1 <= 0.0:
    raise errors.InputError(f"Elliptic parameter must lie in [0, 1): {m}")
  a_values = [1.0]
  c_values = [math.sqrt(m)]
  a, b = 1.0, math.sqrt(m1)
  for _ in range(_AGM_MAX_ITERATIONS):
    if abs(c_values[-1]) <= constants.UNIT_ROUNDOFF * a:
      break
    a, b, c = (a + b) / 2, math.sqrt(a * b), (a - b) / 2
    a_values.append(a)
    c_values.append(c)
  else:
    raise errors.NumericalError(f"AGM did not converge for m = {m}")
  return EllipticKernel(
      m=m,
      m1=m1,
      K=math.pi / (2 * a_values[-1]),
      _a=tuple(a_values),
      _c=tuple(c_values),
  )


def _check_interval(a: float, b: float) -> None:
  if not a > 0:
    raise errors.InputError(f"Interval must be positive, got a = {a}")
  if b < a:
    raise errors.InputError(f"Interval must satisfy a <= b, got [{a}, {b}]")


def zolotarev_poles(k: int, a: float, b: float) -> PoleSet:
  """Optimal poles for a spectrum in [a, b].

  The shifts are p_j = b * dn((2j - 1) K / (2k) | 1 - (a/b)^2) and the poles
  are -p_j. Only the shifts with argument at most K/2 are evaluated; the rest
  follow from the self-reciprocity p -> ab/p of the optimal set.

  Args:
    k: Number of poles.
    a: Lower end of the interval.
    b: Upper end of the interval.

  Returns:
    The pole set, sorted increasingly, inside [-b, -a].

  Raises:
    InputError: If k < 1 or the interval is invalid.
  """
  if k < 1:
    raise errors.InputError(f"Pole count must be positive: {k}")
  _check_interval(a, b)
  if a == b:
    return PoleSet(np.full(k, -a), (a, b))
  ratio = a / b
  kernel = elliptic_kernel(1.0 - ratio**2, m1=ratio**2)
  half = (k + 1) // 2
  arguments = (2 * np.arange(1, half + 1) - 1) / (2 * k) * kernel.K
  _, _, dn = kernel.jacobi(arguments)
  shifts = np.empty(k)
  shifts[:half] = b * dn
  for j in range(half, k):
    shifts[j] = a / dn[k - 1 - j]
  # Guard the interval ends against the last bit of rounding.
  shifts = np.clip(shifts, a, b)
  return PoleSet(-shifts, (a, b))


def _rational_modulus(z: np.ndarray | float, poles: np.ndarray) -> np.ndarray:
  z = np.asarray(z, dtype=np.float64)[..., None]
  numerator = np.abs(z + np.conj(poles)) ** 2
  denominator = np.abs(z - poles) ** 2
  return np.prod(numerator / denominator, axis=-1)


def raterr(
    poles: PoleSet | Sequence[complex],
    a: float,
    b: float,
    grid_points: int = constants.DEFAULT_GRID_POINTS,
) -> float:
  """Maximum over [a, b] of prod |z + conj(xi)|^2 / |z - xi|^2.

  The maximum is taken over Chebyshev-Lobatto nodes and refined by a bounded
  scalar search between the neighbors of the best node.

  Args:
    poles: Poles xi, disjoint from [a, b].
    a: Lower end of the interval.
    b: Upper end of the interval.
    grid_points: Number of Chebyshev nodes.

  Returns:
    The certified grid maximum.

  Raises:
    InputError: If a pole lies in [a, b] or the interval is invalid.
  """
  _check_interval(a, b)
  values = np.asarray(
      poles.poles if isinstance(poles, PoleSet) else poles
  ).ravel()
  real_hit = (np.imag(values) == 0) & (np.real(values) >= a) & (
      np.real(values) <= b
  )
  if np.any(real_hit):
    raise errors.InputError(f"Poles {values[real_hit]} lie inside [{a}, {b}]")
  if a == b or grid_points < 2:
    return float(_rational_modulus(np.array([a, b]), values).max())
  nodes = (a + b) / 2 + (b - a) / 2 * np.cos(
      np.pi * np.arange(grid_points) / (grid_points - 1)
  )
  samples = _rational_modulus(nodes, values)
  best = int(np.argmax(samples))
  result = float(samples[best])
  # Nodes run from b down to a.
  upper = nodes[max(best - 1, 0)]
  lower = nodes[min(best + 1, grid_points - 1)]
  if upper > lower:
    refined = optimize.minimize_scalar(
        lambda z: -float(_rational_modulus(z, values)),
        bounds=(lower, upper),
        method="bounded",
        options={"xatol": 1e-14 * b},
    )
    result = max(result, -float(refined.fun))
  return result


def zolotarev_bound(k: int, a: float, b: float) -> float:
  """Returns 4 * rho^(-2k) with rho = exp(pi^2 / (2 log(4b/a)))."""
  _check_interval(a, b)
  log_rho = math.pi**2 / (2 * math.log(4 * b / a))
  return 4 * math.exp(-2 * k * log_rho)


def choose_pole_count(tol: float, a: float, b: float) -> int:
  """Smallest k >= 1 with (b/a) * zolotarev_bound(k, a, b) <= tol / 2."""
  if not 0 < tol < 1:
    raise errors.InputError(f"Tolerance must lie in (0, 1): {tol}")
  _check_interval(a, b)
  k = 1
  while (b / a) * zolotarev_bound(k, a, b) > tol / 2:
    k += 1
  _logger.debug("Chose %d poles for tol %g on [%g, %g]", k, tol, a, b)
  return k
