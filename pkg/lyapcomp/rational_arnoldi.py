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

"""Block rational Arnoldi on small dense symmetric matrices.

The basis spans {q(S)^{-1} p(S) B : deg p <= k - 1} with q(z) = prod(z - xi_j).
Each pole contributes one shifted solve with the most recent orthonormal block.
"""

from collections.abc import Sequence
import dataclasses
import enum
import functools
import logging

import numpy as np
from scipy import linalg

from lyapcomp import dense_core
from lyapcomp import zolotarev
from lyapcomp.utils import constants
from lyapcomp.utils import errors

_logger = logging.getLogger(__name__)

_COLLISION_TOLERANCE = 1e-12
_MAX_PERTURBATIONS = 8


@enum.unique
class CollisionPolicy(enum.StrEnum):
  RAISE = "raise"
  PERTURB = "perturb"


@dataclasses.dataclass(frozen=True, eq=False)
class RationalBasis:
  """Orthonormal basis of a rational Krylov space.

  Attributes:
    v: Orthonormal columns (source_dim x width).
    poles: Poles actually used; differs from the input only after a
      collision perturbation.
    block_width: Number of columns of the starting block.
    source_dim: Order of S.
    dropped: Columns lost to rank deficiency, out of k * block_width.
    solve_count: Number of block solves with shifted S.
  """

  v: np.ndarray
  poles: np.ndarray
  block_width: int
  source_dim: int
  dropped: int
  solve_count: int

  @property
  def width(self) -> int:
    return self.v.shape[1]


def _shift_clear_of_spectrum(
    xi: float,
    index: int,
    eigenvalues: np.ndarray,
    s_norm: float,
    policy: CollisionPolicy,
) -> float:
  scale = max(s_norm, np.finfo(np.float64).tiny)
  for _ in range(_MAX_PERTURBATIONS):
    gap = float(np.abs(eigenvalues - xi).min())
    if gap > _COLLISION_TOLERANCE * scale:
      return xi
    if policy == CollisionPolicy.RAISE:
      raise errors.SingularShiftError(
          f"Pole {xi} (index {index}) coincides with an eigenvalue", index
      )
    perturbed = xi - constants.POLE_PERTURBATION * scale
    _logger.warning(
        "Pole %d at %.6e collides with the spectrum; moved to %.6e",
        index, xi, perturbed,
    )
    xi = perturbed
  raise errors.SingularShiftError(
      f"Pole index {index} could not be moved off the spectrum", index
  )


def _shifted_solve(
    s: dense_core.DenseSym | dense_core.TridiagonalMatrix,
    xi: complex,
    rhs: np.ndarray,
) -> np.ndarray:
  """Returns (S - xi I)^{-1} rhs; complex when xi is."""
  try:
    if isinstance(s, dense_core.TridiagonalMatrix):
      banded = np.zeros((3, s.order), dtype=np.result_type(xi, np.float64))
      banded[0, 1:] = s.offdiag
      banded[1] = s.diag - xi
      banded[2, :-1] = s.offdiag
      return linalg.solve_banded((1, 1), banded, rhs)
    return linalg.solve(s - xi * np.eye(s.shape[0]), rhs)
  except (linalg.LinAlgError, ValueError) as e:
    raise errors.NumericalError(f"Shifted solve with pole {xi} failed") from e


def rational_block_arnoldi(
    s: dense_core.DenseSym | dense_core.TridiagonalMatrix,
    b: np.ndarray,
    poles: zolotarev.PoleSet | Sequence[complex],
    *,
    on_collision: CollisionPolicy = CollisionPolicy.PERTURB,
) -> RationalBasis:
  """Builds an orthonormal basis of Q(S, B, xi).

  A tridiagonal S is never formed densely; its shifted systems are solved in
  banded form.

  Args:
    s: Symmetric matrix of order n, dense or tridiagonal.
    b: Starting block (n x l) or vector.
    poles: Poles; complex poles must appear as adjacent conjugate pairs.
    on_collision: What to do when a pole is (numerically) an eigenvalue of S.

  Returns:
    The basis, of width k * l minus rank-deficiency drops.

  Raises:
    InputError: If the starting block is zero or shapes mismatch.
    SingularShiftError: On a pole collision under `CollisionPolicy.RAISE`.
  """
  if isinstance(s, dense_core.TridiagonalMatrix):
    n = s.order
    apply_s = s.matmul
  else:
    s = dense_core.as_dense_sym(s)
    n = s.shape[0]
    apply_s = functools.partial(np.matmul, s)
  b = np.asarray(b, dtype=np.float64)
  if b.ndim == 1:
    b = b[:, None]
  if b.shape[0] != n:
    raise errors.InputError(f"Block has {b.shape[0]} rows, S has order {n}")
  pole_values = np.array(
      poles.poles if isinstance(poles, zolotarev.PoleSet) else poles
  ).ravel()
  eigenvalues = dense_core.sym_eigvals(s)
  s_norm = float(np.abs(eigenvalues).max(initial=0.0))

  start = dense_core.orthonormalize(b)
  if start.q.shape[1] == 0:
    raise errors.InputError("Starting block of rational Arnoldi is zero")
  continuation = start.q
  columns: list[np.ndarray] = []
  used_poles = pole_values.copy()
  solve_count = 0

  j = 0
  while j < pole_values.size:
    xi = pole_values[j]
    if np.imag(xi) != 0:
      if j + 1 >= pole_values.size or not np.isclose(
          pole_values[j + 1], np.conj(xi)
      ):
        raise errors.InputError(f"Pole {xi} is not followed by its conjugate")
      # Im (S - xi)^{-1} = Im(xi) ((S - xi)(S - conj(xi)))^{-1} for real S.
      rhs = np.hstack([continuation, apply_s(continuation)])
      new_block = np.imag(_shifted_solve(s, xi, rhs)) / np.imag(xi)
      solve_count += 2
      j += 2
    else:
      xi = _shift_clear_of_spectrum(
          float(np.real(xi)), j, eigenvalues, s_norm, on_collision
      )
      used_poles[j] = xi
      new_block = _shifted_solve(s, xi, continuation)
      solve_count += 1
      j += 1
    against = np.hstack(columns) if columns else None
    ortho = dense_core.orthonormalize(new_block, against=against)
    if ortho.dropped:
      _logger.debug(
          "Rational Arnoldi dropped %d column(s) at pole %d",
          len(ortho.dropped), j,
      )
    if ortho.q.shape[1] == 0:
      # The space is invariant; further poles add nothing.
      break
    columns.append(ortho.q)
    continuation = ortho.q

  v = np.hstack(columns)
  expected = pole_values.size * b.shape[1]
  dropped = expected - v.shape[1]
  if dropped and n > v.shape[1]:
    _logger.warning(
        "Rational Krylov basis has width %d instead of %d", v.shape[1], expected
    )
  return RationalBasis(
      v=v,
      poles=used_poles,
      block_width=b.shape[1],
      source_dim=n,
      dropped=dropped,
      solve_count=solve_count,
  )
