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

"""Small dense and tridiagonal linear algebra used on projected matrices."""

from collections.abc import Sequence
import dataclasses
import math

import numpy as np
from scipy import linalg

from lyapcomp.utils import constants
from lyapcomp.utils import errors

# Symmetric dense matrices are plain arrays; `as_dense_sym` enforces symmetry.
DenseSym = np.ndarray

_SINGULAR_SUM_TOLERANCE = 1e-14
_REORTH_RATIO = 1 / math.sqrt(2)


def as_dense_sym(matrix: np.ndarray) -> DenseSym:
  """Returns the symmetric part (S + S^T) / 2 of a square matrix."""
  matrix = np.asarray(matrix, dtype=np.float64)
  if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
    raise errors.InputError(f"Expected a square matrix, got {matrix.shape}")
  return (matrix + matrix.T) / 2


@dataclasses.dataclass(frozen=True, eq=False)
class TridiagonalMatrix:
  """Symmetric tridiagonal matrix produced by the Lanczos process.

  Attributes:
    diag: Diagonal entries (alpha values).
    offdiag: Off-diagonal entries (beta values), one shorter than `diag`.
  """

  diag: np.ndarray
  offdiag: np.ndarray

  def __post_init__(self) -> None:
    diag = np.asarray(self.diag, dtype=np.float64).ravel()
    offdiag = np.asarray(self.offdiag, dtype=np.float64).ravel()
    if diag.size < 1 or offdiag.size != diag.size - 1:
      raise errors.InputError(
          f"Inconsistent tridiagonal sizes: {diag.size} and {offdiag.size}"
      )
    object.__setattr__(self, "diag", diag)
    object.__setattr__(self, "offdiag", offdiag)

  @property
  def order(self) -> int:
    return self.diag.size

  def to_dense(self) -> DenseSym:
    return (
        np.diag(self.diag)
        + np.diag(self.offdiag, 1)
        + np.diag(self.offdiag, -1)
    )

  def block(self, start: int, stop: int) -> "TridiagonalMatrix":
    """Principal submatrix of rows/columns start..stop-1."""
    if not 0 <= start < stop <= self.order:
      raise errors.InputError(
          f"Invalid block [{start}, {stop}) of {self.order}"
      )
    return TridiagonalMatrix(
        self.diag[start:stop], self.offdiag[start : stop - 1]
    )

  def leading(self, order: int) -> "TridiagonalMatrix":
    return self.block(0, order)

  def matmul(self, x: np.ndarray) -> np.ndarray:
    """Returns T @ x for a vector or a block of columns without forming T."""
    x = np.asarray(x, dtype=np.float64)
    shape = (-1,) + (1,) * (x.ndim - 1)
    offdiag = self.offdiag.reshape(shape)
    product = self.diag.reshape(shape) * x
    product[:-1] += offdiag * x[1:]
    product[1:] += offdiag * x[:-1]
    return product


def sym_eig(
    matrix: DenseSym | TridiagonalMatrix,
) -> tuple[np.ndarray, np.ndarray]:
  """Eigendecomposition of a symmetric matrix.

  Args:
    matrix: Dense symmetric or tridiagonal matrix.

  Returns:
    Ascending eigenvalues and the orthogonal matrix of eigenvectors.

  Raises:
    NumericalError: If the eigensolver does not converge.
  """
  try:
    if isinstance(matrix, TridiagonalMatrix):
      if matrix.order == 1:
        return matrix.diag.copy(), np.ones((1, 1))
      values, vectors = linalg.eigh_tridiagonal(matrix.diag, matrix.offdiag)
    else:
      values, vectors = linalg.eigh(as_dense_sym(matrix))
  except (linalg.LinAlgError, ValueError) as e:
    raise errors.NumericalError("Symmetric eigensolver failed") from e
  if not np.all(np.isfinite(values)):
    raise errors.NumericalError(
        "Symmetric eigensolver returned non-finite values"
    )
  return values, vectors


def sym_eigvals(matrix: DenseSym | TridiagonalMatrix) -> np.ndarray:
  """Ascending eigenvalues of a symmetric matrix, without eigenvectors.

  Raises:
    NumericalError: If the eigensolver does not converge.
  """
  try:
    if isinstance(matrix, TridiagonalMatrix):
      if matrix.order == 1:
        return matrix.diag.copy()
      values = linalg.eigvalsh_tridiagonal(matrix.diag, matrix.offdiag)
    else:
      values = linalg.eigvalsh(as_dense_sym(matrix))
  except (linalg.LinAlgError, ValueError) as e:
    raise errors.NumericalError("Symmetric eigensolver failed") from e
  if not np.all(np.isfinite(values)):
    raise errors.NumericalError(
        "Symmetric eigensolver returned non-finite values"
    )
  return values


def solve_projected_lyapunov(
    h: DenseSym, g: np.ndarray, scale: float
) -> DenseSym:
  """Solves H Y + Y H = scale * g g^T by diagonalizing H.

  Args:
    h: Symmetric coefficient matrix.
    g: Right-hand side vector.
    scale: Positive scalar, typically ||c||^2.

  Returns:
    The symmetric solution Y.

  Raises:
    SingularEquationError: If some eigenvalue pair sums to (nearly) zero.
  """
  values, vectors = sym_eig(as_dense_sym(h))
  g_hat = vectors.T @ np.asarray(g, dtype=np.float64)
  sums = values[:, None] + values[None, :]
  h_norm = float(np.abs(values).max(initial=0.0))
  if np.abs(sums).min() <= _SINGULAR_SUM_TOLERANCE * h_norm:
    raise errors.SingularEquationError(
        "Projected Lyapunov equation is singular (eigenvalue pair sums to 0)"
    )
  y_hat = scale * np.outer(g_hat, g_hat) / sums
  return as_dense_sym(vectors @ y_hat @ vectors.T)


@dataclasses.dataclass(frozen=True, eq=False)
class OrthonormalBasis:
  """Result of `orthonormalize`.

  Attributes:
    q: Orthonormal columns spanning the new directions.
    r: Coefficients of the input block in `q` (shape p' x p).
    against_coefficients: Coefficients of the input block in `against`, if any.
    dropped: Indices of input columns that were rank deficient.
  """

  q: np.ndarray
  r: np.ndarray
  against_coefficients: np.ndarray | None
  dropped: tuple[int, ...]


def _basis_width(basis: np.ndarray | Sequence[np.ndarray]) -> int:
  return basis.shape[1] if isinstance(basis, np.ndarray) else len(basis)


def _inner_products(
    basis: np.ndarray | Sequence[np.ndarray], v: np.ndarray
) -> np.ndarray:
  if isinstance(basis, np.ndarray):
    return basis.T @ v
  return np.array([column @ v for column in basis])


def _subtract_combination(
    v: np.ndarray,
    basis: np.ndarray | Sequence[np.ndarray],
    coefficients: np.ndarray,
) -> None:
  if isinstance(basis, np.ndarray):
    v -= basis @ coefficients
    return
  for column, coefficient in zip(basis, coefficients):
    v -= coefficient * column


def project_out(
    v: np.ndarray, basis: np.ndarray | Sequence[np.ndarray] | None
) -> tuple[np.ndarray, np.ndarray]:
  """Removes the span of orthonormal `basis` from `v` (twice is enough).

  Args:
    v: Vector to orthogonalize.
    basis: Matrix with orthonormal columns, a sequence of orthonormal
      vectors, or None. A sequence is never stacked into a matrix.

  Returns:
    The projected vector and the accumulated coefficients `basis^T v`.
  """
  v = np.array(v, dtype=np.float64)
  if basis is None or _basis_width(basis) == 0:
    return v, np.zeros(0)
  coefficients = np.zeros(_basis_width(basis))
  norm = np.linalg.norm(v)
  for attempt in range(3):
    update = _inner_products(basis, v)
    _subtract_combination(v, basis, update)
    coefficients += update
    new_norm = np.linalg.norm(v)
    # Two passes always; a third one only after heavy cancellation.
    if attempt >= 1 and new_norm > _REORTH_RATIO * norm:
      break
    norm = new_norm
  return v, coefficients


def orthonormalize(
    block: np.ndarray, against: np.ndarray | None = None
) -> OrthonormalBasis:
  """Gram-Schmidt with reorthogonalization and rank-deficiency drops.

  Args:
    block: Columns to orthonormalize.
    against: Optional matrix with orthonormal columns that the result must be
      orthogonal to.

  Returns:
    The orthonormal basis with coefficients and the dropped column indices.
  """
  block = np.asarray(block, dtype=np.float64)
  if block.ndim == 1:
    block = block[:, None]
  n, p = block.shape
  offset = 0 if against is None else against.shape[1]
  basis = np.zeros((n, offset + p))
  if against is not None:
    basis[:, :offset] = against
  coefficients = np.zeros((offset + p, p))
  accepted = 0
  dropped = []
  for j in range(p):
    column = block[:, j]
    original_norm = np.linalg.norm(column)
    projected, coeffs = project_out(column, basis[:, : offset + accepted])
    coefficients[: offset + accepted, j] = coeffs
    norm = np.linalg.norm(projected)
    if original_norm == 0.0 or norm <= constants.DROP_TOLERANCE * original_norm:
      dropped.append(j)
      continue
    basis[:, offset + accepted] = projected / norm
    coefficients[offset + accepted, j] = norm
    accepted += 1
  return OrthonormalBasis(
      q=basis[:, offset : offset + accepted].copy(),
      r=coefficients[offset : offset + accepted],
      against_coefficients=(
          coefficients[:offset] if against is not None else None
      ),
      dropped=tuple(dropped),
  )
