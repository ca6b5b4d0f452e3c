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

"""Matrix-free symmetric operators, sparse storage, generators and readers.

Every solver in this package touches the coefficient matrix A only through
`SymmetricOperator.apply`, which counts matrix-vector products. Concrete
operators wrap a sparse or dense matrix, scale another operator lazily, or
compose the transformed generalized operator v -> -L^{-1} M L^{-T} v with
E = L L^T.
"""

import abc
from collections.abc import Sequence
import dataclasses
import logging
import math
import os
import pathlib
import threading

import numpy as np
from scipy import linalg
from scipy import sparse
from scipy.sparse import csgraph
from scipy.sparse import linalg as sparse_linalg
from typing_extensions import override

from lyapcomp.utils import errors

_logger = logging.getLogger(__name__)

_SMALL_DIMENSION = 16
_MM_BANNER = "%%matrixmarket"

SpectralInterval = tuple[float, float]


@dataclasses.dataclass(frozen=True, eq=False)
class SparseCSR:
  """Square sparse matrix in compressed sparse row form.

  Attributes:
    matrix: Canonical CSR storage (sorted indices, no duplicates).
  """

  matrix: sparse.csr_array

  def __post_init__(self) -> None:
    rows, cols = self.matrix.shape
    if rows != cols:
      raise errors.InputError(f"Matrix must be square, got {rows}x{cols}")
    self.matrix.sum_duplicates()
    self.matrix.sort_indices()

  @classmethod
  def from_dense(cls, dense: np.ndarray) -> "SparseCSR":
    return cls(sparse.csr_array(np.asarray(dense, dtype=np.float64)))

  @classmethod
  def from_scipy(cls, matrix: sparse.sparray | sparse.spmatrix) -> "SparseCSR":
    return cls(sparse.csr_array(matrix, dtype=np.float64))

  @property
  def dimension(self) -> int:
    return self.matrix.shape[0]

  @property
  def row_offsets(self) -> np.ndarray:
    return self.matrix.indptr

  @property
  def col_indices(self) -> np.ndarray:
    return self.matrix.indices

  @property
  def values(self) -> np.ndarray:
    return self.matrix.data

  @property
  def nnz(self) -> int:
    return int(self.matrix.nnz)

  @property
  def max_row_nnz(self) -> int:
    if self.dimension == 0:
      return 0
    return int(np.diff(self.row_offsets).max())

  def dot(self, v: np.ndarray) -> np.ndarray:
    return self.matrix @ v

  def to_dense(self) -> np.ndarray:
    return self.matrix.toarray()

  def is_symmetric(self, rtol: float = 1e-12) -> bool:
    """Whether the matrix equals its transpose up to `rtol` in the max norm."""
    difference = abs(self.matrix - self.matrix.T).max() if self.nnz else 0.0
    scale = abs(self.matrix).max() if self.nnz else 0.0
    return bool(difference <= rtol * scale)

  def is_structurally_symmetric(self) -> bool:
    pattern = self.matrix.copy()
    pattern.data = np.ones_like(pattern.data)
    return (pattern != pattern.T).nnz == 0

  def spectral_norm(self) -> float:
    """Estimates ||A||_2 of the symmetric matrix."""
    return _symmetric_norm(self.matrix)

  def abs_norm_ratio(self) -> float:
    """Estimates || |A| ||_2 / ||A||_2 (entrywise absolute value)."""
    norm = self.spectral_norm()
    if norm == 0.0:
      return 1.0
    return _symmetric_norm(abs(self.matrix)) / norm


def _symmetric_norm(
    matrix: sparse.sparray | sparse_linalg.LinearOperator,
) -> float:
  dimension = matrix.shape[0]
  if dimension <= _SMALL_DIMENSION and sparse.issparse(matrix):
    return float(np.abs(linalg.eigvalsh(matrix.toarray())).max(initial=0.0))
  if dimension <= _SMALL_DIMENSION:
    dense = np.column_stack([matrix @ e for e in np.eye(dimension)])
    dense = (dense + dense.T) / 2
    return float(np.abs(linalg.eigvalsh(dense)).max(initial=0.0))
  # Fixed start vector, not orthogonal to antisymmetric grid modes.
  start = np.linspace(1.0, 2.0, dimension)
  values = sparse_linalg.eigsh(
      matrix, k=1, which="LM", v0=start, tol=1e-6, return_eigenvectors=False
  )
  return float(abs(values[0]))


class SymmetricOperator(abc.ABC):
  """A symmetric positive definite action v -> Av with a matvec tally.

  Subclasses implement `_matvec`; callers use `apply`, which validates the
  input and increments `matvec_count` by exactly one. The tally is guarded by
  a lock so that independent solves may share one operator.
  """

  def __init__(
      self, dimension: int, spectral_hint: SpectralInterval | None = None
  ) -> None:
    if dimension < 1:
      raise errors.InputError(
          f"Operator dimension must be positive: {dimension}"
      )
    self._dimension = dimension
    self.spectral_hint = spectral_hint
    self._matvec_count = 0
    self._lock = threading.Lock()

  @property
  def dimension(self) -> int:
    return self._dimension

  @property
  def matvec_count(self) -> int:
    return self._matvec_count

  def apply(self, v: np.ndarray) -> np.ndarray:
    """Returns Av and counts one matrix-vector product.

    Args:
      v: Vector of length `dimension`.

    Returns:
      The product Av as a new float64 vector.

    Raises:
      InputError: If `v` is not a vector of the operator's dimension.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (self._dimension,):
      raise errors.InputError(
          f"Expected a vector of length {self._dimension}, got shape {v.shape}"
      )
    with self._lock:
      self._matvec_count += 1
    return np.asarray(self._matvec(v), dtype=np.float64)

  def apply_block(self, block: np.ndarray) -> np.ndarray:
    """Applies the operator column by column; counts one product per column."""
    block = np.asarray(block, dtype=np.float64)
    if block.ndim != 2 or block.shape[0] != self._dimension:
      raise errors.InputError(
          f"Expected a block with {self._dimension} rows, got {block.shape}"
      )
    result = np.empty_like(block)
    for j in range(block.shape[1]):
      result[:, j] = self.apply(block[:, j])
    return result

  def as_linear_operator(self) -> sparse_linalg.LinearOperator:
    """Wraps `apply` as a scipy LinearOperator (products are counted)."""
    return sparse_linalg.LinearOperator(
        shape=(self._dimension, self._dimension),
        matvec=lambda v: self.apply(np.ravel(v)),
        rmatvec=lambda v: self.apply(np.ravel(v)),
        dtype=np.float64,
    )

  @abc.abstractmethod
  def _matvec(self, v: np.ndarray) -> np.ndarray:
    """Computes Av without bookkeeping."""


class MatrixOperator(SymmetricOperator):
  """Operator backed by an explicit sparse or dense symmetric matrix."""

  def __init__(
      self,
      matrix: SparseCSR | np.ndarray,
      spectral_hint: SpectralInterval | None = None,
  ) -> None:
    if isinstance(matrix, SparseCSR):
      dimension = matrix.dimension
    else:
      matrix = np.asarray(matrix, dtype=np.float64)
      if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise errors.InputError(f"Matrix must be square, got {matrix.shape}")
      dimension = matrix.shape[0]
    super().__init__(dimension, spectral_hint)
    self.matrix = matrix

  @property
  def sparse_matrix(self) -> SparseCSR | None:
    return self.matrix if isinstance(self.matrix, SparseCSR) else None

  @override
  def _matvec(self, v: np.ndarray) -> np.ndarray:
    if isinstance(self.matrix, SparseCSR):
      return self.matrix.dot(v)
    return self.matrix @ v


class ScaledOperator(SymmetricOperator):
  """Lazy scalar multiple `factor * base` of another operator."""

  def __init__(self, base: SymmetricOperator, factor: float) -> None:
    if not factor > 0:
      raise errors.InputError(f"Scale factor must be positive: {factor}")
    hint = None
    if base.spectral_hint is not None:
      hint = (base.spectral_hint[0] * factor, base.spectral_hint[1] * factor)
    super().__init__(base.dimension, hint)
    self.base = base
    self.factor = factor

  @override
  def _matvec(self, v: np.ndarray) -> np.ndarray:
    return self.factor * self.base.apply(v)


@dataclasses.dataclass(frozen=True, eq=False)
class BandedCholesky:
  """Cholesky factor of a permuted SPD matrix in banded storage.

  The factorization is P E P^T = L_b L_b^T with P the permutation
  `v -> v[permutation]`; the factor used by the transformed operator is
  L = P^T L_b, so that E = L L^T.

  Attributes:
    permutation: Fill-reducing ordering (reverse Cuthill-McKee).
    lower: Lower banded storage of L_b, `lower[d, j] = L_b[j + d, j]`.
  """

  permutation: np.ndarray
  lower: np.ndarray

  @property
  def bandwidth(self) -> int:
    return self.lower.shape[0] - 1

  @property
  def dimension(self) -> int:
    return self.lower.shape[1]

  @classmethod
  def factor(cls, matrix: SparseCSR) -> "BandedCholesky":
    """Factors a sparse SPD matrix.

    Args:
      matrix: Symmetric positive definite matrix E.

    Returns:
      The banded Cholesky factor of E reordered by reverse Cuthill-McKee.

    Raises:
      FactorizationError: If E is not symmetric positive definite.
    """
    if not matrix.is_symmetric():
      raise errors.FactorizationError("Mass matrix is not symmetric")
    permutation = csgraph.reverse_cuthill_mckee(
        matrix.matrix, symmetric_mode=True
    )
    permuted = sparse.coo_array(
        matrix.matrix[permutation][:, permutation], dtype=np.float64
    )
    lower_part = permuted.row >= permuted.col
    rows = permuted.row[lower_part]
    cols = permuted.col[lower_part]
    offsets = rows - cols
    bandwidth = int(offsets.max(initial=0))
    banded = np.zeros((bandwidth + 1, matrix.dimension))
    banded[offsets, cols] = permuted.data[lower_part]
    try:
      lower = linalg.cholesky_banded(banded, lower=True)
    except linalg.LinAlgError as e:
      raise errors.FactorizationError(
          "Mass matrix is not positive definite"
      ) from e
    return cls(permutation=np.asarray(permutation), lower=lower)

  def _upper(self) -> np.ndarray:
    # Upper banded storage of L_b^T for solve_banded((0, l), ...).
    l, n = self.bandwidth, self.dimension
    upper = np.zeros_like(self.lower)
    for d in range(l + 1):
      upper[l - d, d:] = self.lower[d, : n - d]
    return upper

  def solve_lower(self, v: np.ndarray) -> np.ndarray:
    """Returns L^{-1} v = L_b^{-1} P v."""
    return linalg.solve_banded(
        (self.bandwidth, 0), self.lower, v[self.permutation]
    )

  def solve_upper(self, v: np.ndarray) -> np.ndarray:
    """Returns L^{-T} v = P^T L_b^{-T} v."""
    x = linalg.solve_banded((0, self.bandwidth), self._upper(), v)
    result = np.empty_like(x)
    result[self.permutation] = x
    return result

  def dense_factor(self) -> np.ndarray:
    """Returns L = P^T L_b densely; intended for small checks."""
    n = self.dimension
    lower_b = np.zeros((n, n))
    for d in range(self.bandwidth + 1):
      idx = np.arange(n - d)
      lower_b[idx + d, idx] = self.lower[d, : n - d]
    factor = np.empty_like(lower_b)
    factor[self.permutation] = lower_b
    return factor


class GeneralizedOperator(SymmetricOperator):
  """The action v -> -L^{-1} M L^{-T} v for E = L L^T.

  Attributes:
    m_matrix: Symmetric matrix M.
    cholesky: Banded Cholesky factor of E.
  """

  def __init__(
      self,
      m_matrix: SparseCSR,
      cholesky: BandedCholesky,
      spectral_hint: SpectralInterval | None = None,
  ) -> None:
    if m_matrix.dimension != cholesky.dimension:
      raise errors.InputError(
          f"M has dimension {m_matrix.dimension} but E has"
          f" {cholesky.dimension}"
      )
    super().__init__(m_matrix.dimension, spectral_hint)
    self.m_matrix = m_matrix
    self.cholesky = cholesky

  @override
  def _matvec(self, v: np.ndarray) -> np.ndarray:
    return -self.cholesky.solve_lower(
        self.m_matrix.dot(self.cholesky.solve_upper(v))
    )


def kron_sum_laplacian(n_side: int) -> SparseCSR:
  """Assembles A = B (x) I + I (x) B, B = (n+1)^2 tridiag(-1, 2, -1).

  The unknowns are ordered lexicographically with x running fastest.

  Args:
    n_side: Number of interior grid points per direction.

  Returns:
    The N x N matrix with N = n_side**2.

  Raises:
    InputError: If n_side is not positive.
  """
  if n_side < 1:
    raise errors.InputError(f"n_side must be positive: {n_side}")
  n = n_side
  idx = np.arange(n)
  rows = np.concatenate([idx, idx[1:], idx[:-1]])
  cols = np.concatenate([idx, idx[:-1], idx[1:]])
  data = np.concatenate([np.full(n, 2.0), np.full(n - 1, -1.0),
                         np.full(n - 1, -1.0)]) * (n + 1) ** 2
  second_difference = sparse.csr_array((data, (rows, cols)), shape=(n, n))
  identity = sparse.csr_array(sparse.identity(n, format="csr"))
  laplacian = sparse.kron(second_difference, identity) + sparse.kron(
      identity, second_difference
  )
  return SparseCSR.from_scipy(laplacian)


def laplacian_extremal_eigs(n_side: int) -> SpectralInterval:
  """Closed-form (lambda_min, lambda_max) of `kron_sum_laplacian(n_side)`."""
  if n_side < 1:
    raise errors.InputError(f"n_side must be positive: {n_side}")
  h2 = (n_side + 1) ** 2
  theta = math.pi / (n_side + 1)
  smallest = 4 * h2 * math.sin(theta / 2) ** 2
  largest = 4 * h2 * math.sin(n_side * theta / 2) ** 2
  return 2 * smallest, 2 * largest


def gaussian_rhs(n_side: int) -> np.ndarray:
  """Samples (2/pi) exp(-2(x-1/2)^2) exp(-2(y-1/2)^2) on the interior grid."""
  if n_side < 1:
    raise errors.InputError(f"n_side must be positive: {n_side}")
  grid = np.arange(1, n_side + 1) / (n_side + 1)
  profile = np.exp(-2 * (grid - 0.5) ** 2)
  return (2 / np.pi) * np.outer(profile, profile).ravel()


def normalize_problem(
    op: SymmetricOperator, c: np.ndarray
) -> tuple[SymmetricOperator, np.ndarray]:
  """Scales A by 1/||c||^2 and c by 1/||c|| so that the rhs has unit norm.

  Args:
    op: The operator A.
    c: Right-hand side vector.

  Returns:
    The scaled operator (lazy wrapper) and the unit-norm rhs. If `c` already
    has unit norm, both inputs are returned unchanged.

  Raises:
    InputError: If c is zero.
  """
  c = np.asarray(c, dtype=np.float64)
  norm = float(np.linalg.norm(c))
  if norm == 0.0:
    raise errors.InputError("Right-hand side is zero")
  if math.isclose(norm, 1.0, rel_tol=4 * np.finfo(np.float64).eps):
    return op, c
  return ScaledOperator(op, 1.0 / norm**2), c / norm


def cholesky_transformed_operator(
    m_matrix: SparseCSR, e_matrix: SparseCSR
) -> GeneralizedOperator:
  """Builds -L^{-1} M L^{-T} for the generalized equation with mass matrix E."""
  if not m_matrix.is_symmetric():
    raise errors.InputError("M must be symmetric")
  return GeneralizedOperator(m_matrix, BandedCholesky.factor(e_matrix))


def transformed_rhs(op: GeneralizedOperator, b: np.ndarray) -> np.ndarray:
  """Returns -L^{-1} b, the rhs of the transformed generalized equation."""
  b = np.asarray(b, dtype=np.float64)
  if b.shape != (op.dimension,):
    raise errors.InputError(
        f"Expected a vector of length {op.dimension}, got shape {b.shape}"
    )
  return -op.cholesky.solve_lower(b)


def combine_matrices(
    m_matrix: SparseCSR, terms: Sequence[SparseCSR], weight: float
) -> SparseCSR:
  """Returns M - weight * sum(terms), e.g. a parametric heat-transfer model."""
  combined = m_matrix.matrix.copy()
  for term in terms:
    if term.dimension != m_matrix.dimension:
      raise errors.InputError(
          f"Term of dimension {term.dimension} does not match"
          f" {m_matrix.dimension}"
      )
    combined = combined - weight * term.matrix
  return SparseCSR.from_scipy(combined)


def estimate_norm(op: SymmetricOperator) -> float:
  """Estimates ||A||_2 of an operator through its counted action."""
  return _symmetric_norm(op.as_linear_operator())


def check_symmetry(
    op: SymmetricOperator, rng: np.random.Generator, pairs: int = 10
) -> float:
  """Worst |u^T Av - v^T Au| / (||u|| ||v|| ||A||) over random pairs."""
  scale = estimate_norm(op)
  worst = 0.0
  for _ in range(pairs):
    u = rng.standard_normal(op.dimension)
    v = rng.standard_normal(op.dimension)
    defect = abs(u @ op.apply(v) - v @ op.apply(u))
    worst = max(
        worst, defect / (np.linalg.norm(u) * np.linalg.norm(v) * scale)
    )
  return worst


def check_linearity(
    op: SymmetricOperator, rng: np.random.Generator, pairs: int = 10
) -> float:
  """Returns the worst relative linearity defect over random combinations."""
  scale = estimate_norm(op)
  worst = 0.0
  for _ in range(pairs):
    u = rng.standard_normal(op.dimension)
    v = rng.standard_normal(op.dimension)
    alpha, beta = rng.standard_normal(2)
    combined = op.apply(alpha * u + beta * v)
    defect = np.linalg.norm(combined - alpha * op.apply(u) - beta * op.apply(v))
    worst = max(
        worst,
        defect
        / ((abs(alpha) * np.linalg.norm(u) + abs(beta) * np.linalg.norm(v))
           * scale),
    )
  return worst


def _data_lines(text: str) -> list[tuple[int, list[str]]]:
  lines = []
  for number, line in enumerate(text.splitlines(), start=1):
    stripped = line.strip()
    if not stripped or stripped.startswith(("%", "#")):
      continue
    lines.append((number, stripped.split()))
  return lines


def _parse_int(token: str, line_number: int) -> int:
  try:
    return int(token)
  except ValueError as e:
    raise errors.ParseError(f"Expected an integer, got {token!r}",
                            line_number) from e


def _parse_float(token: str, line_number: int) -> float:
  try:
    return float(token)
  except ValueError as e:
    raise errors.ParseError(f"Expected a real number, got {token!r}",
                            line_number) from e


def _parse_banner(first_line: str) -> tuple[str, str, str]:
  tokens = first_line.lower().split()
  if len(tokens) != 5 or tokens[0] != _MM_BANNER or tokens[1] != "matrix":
    raise errors.ParseError(
        f"Malformed Matrix Market header: {first_line!r}", 1
    )
  _, _, layout, field, symmetry = tokens
  if layout not in ("coordinate", "array"):
    raise errors.ParseError(f"Unknown format {layout!r}", 1)
  if field != "real":
    raise errors.ParseError(
        f"Only real matrices are supported, got {field!r}", 1
    )
  if symmetry not in ("general", "symmetric"):
    raise errors.ParseError(f"Unsupported symmetry {symmetry!r}", 1)
  return layout, field, symmetry


def _read_coordinate(
    lines: list[tuple[int, list[str]]], shape: tuple[int, int], nnz: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
  entries = lines[1:]
  if len(entries) != nnz:
    last_line = entries[-1][0] if entries else lines[0][0]
    raise errors.ParseError(
        f"Header declares {nnz} entries but {len(entries)} were found",
        last_line,
    )
  rows = np.empty(nnz, dtype=np.int64)
  cols = np.empty(nnz, dtype=np.int64)
  values = np.empty(nnz)
  for position, (line_number, tokens) in enumerate(entries):
    if len(tokens) != 3:
      raise errors.ParseError(
          f"Expected 'row col value', got {' '.join(tokens)!r}", line_number
      )
    row = _parse_int(tokens[0], line_number)
    col = _parse_int(tokens[1], line_number)
    if not (1 <= row <= shape[0] and 1 <= col <= shape[1]):
      raise errors.ParseError(
          f"Index ({row}, {col}) outside the declared {shape[0]}x{shape[1]}"
          " matrix",
          line_number,
      )
    rows[position] = row - 1
    cols[position] = col - 1
    values[position] = _parse_float(tokens[2], line_number)
  return rows, cols, values


def load_matrix_market(path: str | os.PathLike[str]) -> SparseCSR:
  """Reads a real coordinate Matrix Market file into CSR.

  Symmetric files list one triangle; the other one is materialized. General
  files are taken as is and a warning is logged if they are not symmetric.

  Args:
    path: File to read.

  Returns:
    The matrix in CSR form.

  Raises:
    ParseError: On malformed headers, unsupported fields or formats, bad
      entries and out-of-bounds indices. The message carries the line number.
    OSError: If the file cannot be read.
  """
  text = pathlib.Path(path).read_text()
  first_line = text.splitlines()[0] if text else ""
  layout, _, symmetry = _parse_banner(first_line)
  if layout != "coordinate":
    raise errors.ParseError("Array format is not supported for matrices", 1)
  lines = _data_lines(text)
  if not lines:
    raise errors.ParseError("Missing size line", 1)
  size_line, size_tokens = lines[0]
  if len(size_tokens) != 3:
    raise errors.ParseError("Size line must hold 'rows cols nnz'", size_line)
  n_rows, n_cols, nnz = (_parse_int(t, size_line) for t in size_tokens)
  if n_rows != n_cols or n_rows < 1:
    raise errors.ParseError(
        f"Matrix must be square and non-empty, got {n_rows}x{n_cols}", size_line
    )
  rows, cols, values = _read_coordinate(lines, (n_rows, n_cols), nnz)
  if symmetry == "symmetric":
    off_diagonal = rows != cols
    rows, cols = (np.concatenate([rows, cols[off_diagonal]]),
                  np.concatenate([cols, rows[off_diagonal]]))
    values = np.concatenate([values, values[off_diagonal]])
  matrix = SparseCSR.from_scipy(
      sparse.coo_array((values, (rows, cols)), shape=(n_rows, n_cols))
  )
  if symmetry == "general" and not matrix.is_symmetric():
    _logger.warning("Matrix in %s is not symmetric", path)
  _logger.debug("Read %dx%d matrix with %d nonzeros from %s",
                n_rows, n_cols, matrix.nnz, path)
  return matrix


def load_vector(path: str | os.PathLike[str]) -> np.ndarray:
  """Reads a right-hand side vector.

  Accepted layouts are plain text with whitespace separated reals (comment
  lines start with `%` or `#`) and single-column Matrix Market files in array
  or coordinate format.

  Args:
    path: File to read.

  Returns:
    The vector.

  Raises:
    ParseError: On malformed content.
    OSError: If the file cannot be read.
  """
  text = pathlib.Path(path).read_text()
  first_line = text.splitlines()[0] if text else ""
  lines = _data_lines(text)
  if not first_line.lower().startswith(_MM_BANNER):
    values = [
        _parse_float(token, number) for number, tokens in lines
        for token in tokens
    ]
    if not values:
      raise errors.ParseError("No values found", 1)
    return np.asarray(values)

  layout, _, _ = _parse_banner(first_line)
  if not lines:
    raise errors.ParseError("Missing size line", 1)
  size_line, size_tokens = lines[0]
  if layout == "array":
    if len(size_tokens) != 2:
      raise errors.ParseError("Size line must hold 'rows cols'", size_line)
    n_rows, n_cols = (_parse_int(t, size_line) for t in size_tokens)
    if n_cols != 1:
      raise errors.ParseError(f"Expected one column, got {n_cols}", size_line)
    entries = lines[1:]
    if len(entries) != n_rows:
      raise errors.ParseError(
          f"Header declares {n_rows} values but {len(entries)} were found",
          size_line,
      )
    return np.asarray(
        [_parse_float(tokens[0], number) for number, tokens in entries]
    )
  if len(size_tokens) != 3:
    raise errors.ParseError("Size line must hold 'rows cols nnz'", size_line)
  n_rows, n_cols, nnz = (_parse_int(t, size_line) for t in size_tokens)
  if n_cols != 1:
    raise errors.ParseError(f"Expected one column, got {n_cols}", size_line)
  rows, _, values = _read_coordinate(lines, (n_rows, n_cols), nnz)
  vector = np.zeros(n_rows)
  np.add.at(vector, rows, values)
  return vector
