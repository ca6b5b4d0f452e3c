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

"""Roundoff diagnostics for the Lanczos-based solvers.

A finite-precision Lanczos run of M steps satisfies a perturbed decomposition
whose Ritz values stay within M^(5/2) eps2 ||A|| of the spectrum. The constants
below turn that into a residual bound for the plain Lanczos approximation and
an additional term for the rational compression.
"""

import dataclasses
import logging
import math

from lyapcomp.utils import constants
from lyapcomp.utils import errors

_logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class FiniteprecisionBounds:
  """Constants of the finite-precision residual bounds.

  Attributes:
    unit_roundoff: eps.
    eps0: 2 (N + 4) eps.
    eps1: 2 (7 + s ||A||_abs / ||A||) eps.
    eps2: sqrt(2) max(6 eps0, eps1).
    steps: M.
    slack: M^(5/2) eps2 ||A||, the spectral inflation after M steps.
    slack_next: (M + 1)^(5/2) eps2 ||A||.
    kappa: Bound on the condition number of T_{M+1}.
    kappa_shifted: Bound on the condition number of T_{M+1} + lambda_min I.
    c1: Coefficient of the convergence term.
    c2: Coefficient of the roundoff term eps1.
    c3: Coefficient of the rational approximation term.
    valid: Whether lambda_min > (M + 1)^(5/2) eps2 ||A||. When False the
      bounds are infinite.
  """

  unit_roundoff: float
  eps0: float
  eps1: float
  eps2: float
  steps: int
  slack: float
  slack_next: float
  kappa: float
  kappa_shifted: float
  c1: float
  c2: float
  c3: float
  valid: bool

  @property
  def convergence_factor(self) -> float:
    """(sqrt(kappa~) - 1) / (sqrt(kappa~) + 1)."""
    if not self.valid:
      return 1.0
    root = math.sqrt(self.kappa_shifted)
    return (root - 1) / (root + 1)

  @property
  def lanczos_residual_bound(self) -> float:
    """Bound on ||rho_M||_F / ||c||^2 for the plain Lanczos approximation."""
    if not self.valid:
      return math.inf
    return self.c1 * self.convergence_factor**self.steps + self.c2 * self.eps1

  def compression_residual_bound(self, raterr_value: float) -> float:
    """Lanczos bound plus C3 * raterr taken on the inflated interval."""
    if not self.valid:
      return math.inf
    return self.lanczos_residual_bound + self.c3 * raterr_value


def fp_bound_constants(
    n: int,
    steps: int,
    max_row_nnz: int,
    norm_ratio: float,
    lambda_min: float,
    lambda_max: float,
    norm_a: float,
    unit_roundoff: float = constants.UNIT_ROUNDOFF,
) -> FiniteprecisionBounds:
  """Evaluates the finite-precision bound constants.

  Args:
    n: Problem dimension N.
    steps: Number of Lanczos steps M.
    max_row_nnz: Maximal number of nonzeros per row of A.
    norm_ratio: || |A| ||_2 / ||A||_2.
    lambda_min: Smallest eigenvalue of A.
    lambda_max: Largest eigenvalue of A.
    norm_a: ||A||_2.
    unit_roundoff: Unit roundoff of the working precision.

  Returns:
    The constants and the validity flag of the spectral assumption.

  Raises:
    InputError: On non-positive sizes or spectra.
  """
  if n < 1 or steps < 1 or max_row_nnz < 0:
    raise errors.InputError(
        f"Invalid sizes: N = {n}, M = {steps}, s = {max_row_nnz}"
    )
  if not (0 < lambda_min <= lambda_max) or norm_a <= 0 or norm_ratio <= 0:
    raise errors.InputError(
        f"Invalid spectrum [{lambda_min}, {lambda_max}] or norm {norm_a}"
    )
  eps0 = 2 * (n + 4) * unit_roundoff
  eps1 = 2 * (7 + max_row_nnz * norm_ratio) * unit_roundoff
  eps2 = math.sqrt(2) * max(6 * eps0, eps1)
  slack = steps**2.5 * eps2 * norm_a
  slack_next = (steps + 1) ** 2.5 * eps2 * norm_a
  valid = lambda_min > slack_next
  if valid:
    kappa = (lambda_max + slack_next) / (lambda_min - slack_next)
    kappa_shifted = (lambda_max + lambda_min) / (
        2 * lambda_min - 2 * slack_next
    )
    c1 = (1 + 2 * eps0) * (steps + 1) * (4 + 4 * math.sqrt(2 * kappa))
    c2 = math.sqrt(1 + 2 * eps0) * steps * lambda_max / (lambda_min - slack)
    c3 = 2 * (1 + 2 * eps0) * steps * lambda_max / (lambda_min - slack)
  else:
    _logger.warning(
        "lambda_min = %.3e does not exceed the roundoff slack %.3e after %d"
        " steps; finite-precision bounds do not apply",
        lambda_min, slack_next, steps,
    )
    kappa = kappa_shifted = c1 = c2 = c3 = math.inf
  return FiniteprecisionBounds(
      unit_roundoff=unit_roundoff,
      eps0=eps0,
      eps1=eps1,
      eps2=eps2,
      steps=steps,
      slack=slack,
      slack_next=slack_next,
      kappa=kappa,
      kappa_shifted=kappa_shifted,
      c1=c1,
      c2=c2,
      c3=c3,
      valid=valid,
  )
