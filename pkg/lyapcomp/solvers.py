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

"""Low-rank solvers for A X + X A = c c^T with symmetric positive definite A.

Three methods share the same Lanczos process and the same rational projection:

* `reference_solve` keeps the whole Lanczos basis Q_M, projects T_M onto a
  rational Krylov space and returns Q_M U Y U^T Q_M^T in factored form.
* `compress_solve` produces the same result while storing at most `maxmem`
  long vectors: after every cycle the Lanczos block is compressed onto a
  2k-dimensional rational Krylov basis of the current projected matrix.
* `two_pass_solve` stores no basis in a first pass, solves the projected
  equation and regenerates the basis in a second, identical pass.
"""

from collections.abc import Callable
import dataclasses
import logging
import math

import numpy as np
from scipy import linalg

from lyapcomp import dense_core
from lyapcomp import lanczos
from lyapcomp import operators
from lyapcomp import rational_arnoldi
from lyapcomp import zolotarev
from lyapcomp.utils import constants
from lyapcomp.utils import errors
from lyapcomp.utils import performance_tool

_logger = logging.getLogger(__name__)

_ROW_CHUNKS = 128
_BASIS_SLOT = "basis"
_ACCUMULATOR_SLOT = "accumulator"

SpectralInterval = operators.SpectralInterval


@dataclasses.dataclass(frozen=True)
class SolverConfig:
  """Parameters shared by `compress_solve` and `two_pass_solve`.

  Attributes:
    tol: Relative residual tolerance; the solve stops once the residual
      estimate drops below tol * ||c||^2 / 2.
    maxmem: Maximum number of stored vectors of length N.
    max_matvecs: Optional cap on Lanczos steps (operator applications).
    poles: Explicit poles; chosen from `tol` and the spectral interval if None.
    eigs: Explicit spectral interval (lambda_min, lambda_max).
    spectral_estimate_policy: How the spectral interval is obtained. None
      selects exact input when `eigs` or an operator hint exists, and the
      first-cycle Ritz heuristic otherwise.
    reorth_policy: When the Lanczos recurrence is fully reorthogonalized.
  """

  tol: float = 1e-8
  maxmem: int = constants.DEFAULT_MAXMEM
  max_matvecs: int | None = None
  poles: zolotarev.PoleSet | None = None
  eigs: SpectralInterval | None = None
  spectral_estimate_policy: constants.SpectralEstimatePolicy | None = None
  reorth_policy: constants.ReorthPolicy = constants.ReorthPolicy.FIRST_CYCLE

  def __post_init__(self) -> None:
    if not 0 < self.tol < 1:
      raise errors.ConfigError(f"tol must lie in (0, 1): {self.tol}")
    if self.maxmem < 4:
      raise errors.ConfigError(f"maxmem must be at least 4: {self.maxmem}")
    if self.poles is not None and self.maxmem < 2 * self.poles.k + 2:
      raise errors.ConfigError(
          f"maxmem = {self.maxmem} leaves no room for a cycle with"
          f" {self.poles.k} poles (need at least {2 * self.poles.k + 2})"
      )
    if self.max_matvecs is not None and self.max_matvecs < self.maxmem - 1:
      raise errors.ConfigError(
          f"max_matvecs = {self.max_matvecs} is shorter than the first cycle"
          f" ({self.maxmem - 1} steps)"
      )
    if self.eigs is not None:
      a, b = self.eigs
      if not 0 < a <= b:
        raise errors.ConfigError(f"Invalid spectral interval [{a}, {b}]")
    if (
        self.spectral_estimate_policy
        == constants.SpectralEstimatePolicy.FIRST_CYCLE_RITZ
        and self.eigs is not None
    ):
      raise errors.ConfigError(
          "An explicit interval conflicts with the first-cycle Ritz policy"
      )


@dataclasses.dataclass(frozen=True, eq=False)
class CycleState:
  """Quantities of one compression cycle, as passed to `on_cycle` observers.

  Attributes:
    cycle_index: 1-based cycle number i.
    steps: Lanczos steps performed in this cycle.
    qw: Copy of the compressed basis Q_i W_i after this cycle, made only for
      observers, or None if the solve finalized in this cycle (no
      compression took place).
    s_tilde: Projected matrix W~_i^T S_i W~_i.
    w: W~_i^T applied to the previous w (W_i^T e_1).
    wtilde: Rational Krylov basis W~_i of the cycle matrix S_i.
    utilde: Rational Krylov basis of s_tilde with start w.
    y: Solution of the small projected equation.
    beta_seam: Lanczos beta at the end of this cycle.
    estimate: Residual estimate of this cycle.
  """

  cycle_index: int
  steps: int
  qw: np.ndarray | None
  s_tilde: dense_core.DenseSym
  w: np.ndarray
  wtilde: np.ndarray
  utilde: np.ndarray
  y: dense_core.DenseSym
  beta_seam: float
  estimate: float

  @property
  def wtilde_last_row(self) -> np.ndarray:
    return self.wtilde[-1, :]


@dataclasses.dataclass(frozen=True, eq=False)
class LowRankSolution:
  """X = Z Y Z^T with orthonormal Z.

  Attributes:
    z: N x k matrix with orthonormal columns.
    y: Symmetric positive semidefinite k x k matrix.
    c_norm_sq: ||c||^2 of the right-hand side the solution belongs to.
  """

  z: np.ndarray
  y: dense_core.DenseSym
  c_norm_sq: float

  @classmethod
  def from_factor(
      cls, z: np.ndarray, y: np.ndarray, c_norm_sq: float
  ) -> "LowRankSolution":
    """Re-orthonormalizes Z by a thin QR factorization Z = QR, Y -> R Y R^T."""
    q, r = np.linalg.qr(z)
    return cls(q, dense_core.as_dense_sym(r @ y @ r.T), c_norm_sq)

  @property
  def rank(self) -> int:
    return self.z.shape[1]

  def to_dense(self) -> np.ndarray:
    return self.z @ self.y @ self.z.T


@dataclasses.dataclass(frozen=True, eq=False)
class SolveReport:
  """Bookkeeping of one solve.

  Attributes:
    method: The solver that produced the report.
    matvecs: Operator applications consumed by the solve.
    cycles: Number of cycles s.
    steps: Total Lanczos steps M.
    k: Number of poles.
    m: Lanczos steps per cycle after the first one.
    maxmem: Memory cap in vectors.
    estimates: Residual estimate at the end of every cycle.
    peak_vectors: Largest number of simultaneously stored long vectors.
    termination: Why the solve stopped.
    poles: Poles used for the rational projection.
    interval: Spectral interval the poles were built for.
    spectral_policy: Where the interval came from.
    tridiagonal: All Lanczos coefficients, T_M.
    elapsed_seconds: Wall-clock duration of the solve.
    archive_vectors: Vectors kept only to reorthogonalize against every
      previous cycle; not part of the `maxmem` working set.
  """

  method: constants.Method
  matvecs: int
  cycles: int
  steps: int
  k: int
  m: int
  maxmem: int
  estimates: tuple[float, ...]
  peak_vectors: int
  termination: constants.TerminationReason
  poles: zolotarev.PoleSet
  interval: SpectralInterval
  spectral_policy: constants.SpectralEstimatePolicy
  tridiagonal: dense_core.TridiagonalMatrix
  elapsed_seconds: float = 0.0
  archive_vectors: int = 0

  @property
  def residual_estimate(self) -> float:
    return self.estimates[-1] if self.estimates else math.inf


def estimate_extremal_eigs(
    t1: dense_core.TridiagonalMatrix,
) -> SpectralInterval:
  """Returns (0.1 * lambda_min(T1), 1.1 * lambda_max(T1)).

  Raises:
    SpectralEstimateError: If T1 is not positive definite.
  """
  values, _ = dense_core.sym_eig(t1)
  if values[0] <= 0:
    raise errors.SpectralEstimateError(
        f"Smallest Ritz value {values[0]:.3e} is not positive; the operator is"
        " not positive definite or the first cycle lost orthogonality"
    )
  return (
      constants.RITZ_LOWER_FACTOR * float(values[0]),
      constants.RITZ_UPPER_FACTOR * float(values[-1]),
  )


def projected_rational_solve(
    t: dense_core.TridiagonalMatrix | dense_core.DenseSym,
    poles: zolotarev.PoleSet,
    c_norm: float,
) -> tuple[np.ndarray, dense_core.DenseSym]:
  """Projects T onto Q(T, e_1, poles) and solves the small equation.

  A tridiagonal T is kept in banded form, so the work space grows with
  M * k rather than M^2.

  Args:
    t: Projected matrix of order M.
    poles: Poles of the rational Krylov space.
    c_norm: ||c||.

  Returns:
    The orthonormal basis U (M x k) and the solution Y of
    (U^T T U) Y + Y (U^T T U) = ||c||^2 (U^T e_1)(U^T e_1)^T.
  """
  if isinstance(t, dense_core.TridiagonalMatrix):
    order = t.order
  else:
    order = t.shape[0]
  start = np.zeros(order)
  start[0] = 1.0
  u = rational_arnoldi.rational_block_arnoldi(t, start, poles).v
  tu = t.matmul(u) if isinstance(t, dense_core.TridiagonalMatrix) else t @ u
  y = dense_core.solve_projected_lyapunov(u.T @ tu, u[0, :], c_norm**2)
  return u, y


def lanczos_solution(
    t: dense_core.TridiagonalMatrix, c_norm: float
) -> dense_core.DenseSym:
  """Solves T X_M + X_M T = ||c||^2 e_1 e_1^T, the plain Lanczos projection."""
  start = np.zeros(t.order)
  start[0] = 1.0
  return dense_core.solve_projected_lyapunov(t.to_dense(), start, c_norm**2)


def residual_estimate(
    cycle: CycleState, beta_seam: float | None = None
) -> float:
  """Returns beta * ||e^T W~ U~ Y||, the computable part of the residual bound.

  Args:
    cycle: State of the cycle.
    beta_seam: Beta at the end of the cycle; defaults to `cycle.beta_seam`.
  """
  beta = cycle.beta_seam if beta_seam is None else beta_seam
  row = cycle.wtilde_last_row @ cycle.utilde @ cycle.y
  return float(beta * np.linalg.norm(row))


def residual_bound(
    estimate: float, raterr_value: float, a: float, b: float, c_norm: float
) -> float:
  """Full residual bound sqrt(2 est^2 + 2 ((b/a) raterr ||c||^2)^2)."""
  rational_term = (b / a) * raterr_value * c_norm**2
  return math.sqrt(2 * estimate**2 + 2 * rational_term**2)


def true_residual_fro(
    op: operators.SymmetricOperator,
    solution: LowRankSolution,
    c: np.ndarray,
) -> float:
  """Returns ||A X + X A - c c^T||_F for X = Z Y Z^T.

  The residual lives in span[Z, AZ, c], so it is evaluated exactly on the
  triangular factor of a thin QR of that block. Consumes `solution.rank`
  operator applications.
  """
  c = np.asarray(c, dtype=np.float64)
  rank = solution.rank
  if rank == 0:
    return float(c @ c)
  az = op.apply_block(solution.z)
  _, r = np.linalg.qr(np.column_stack([solution.z, az, c]))
  coords_z = r[:, :rank]
  coords_az = r[:, rank : 2 * rank]
  coords_c = r[:, 2 * rank]
  residual = (
      coords_az @ solution.y @ coords_z.T
      + coords_z @ solution.y @ coords_az.T
      - np.outer(coords_c, coords_c)
  )
  return float(np.linalg.norm(residual, "fro"))


def reference_solve(
    op: operators.SymmetricOperator,
    c: np.ndarray,
    steps: int,
    poles: zolotarev.PoleSet,
    *,
    reorth: bool = True,
) -> LowRankSolution:
  """Keeps the whole basis Q_M and returns Q_M U Y U^T Q_M^T.

  Args:
    op: Symmetric positive definite operator.
    c: Right-hand side vector.
    steps: Number of Lanczos steps M; fewer are taken on breakdown.
    poles: Poles of the rational projection.
    reorth: Whether to fully reorthogonalize the Lanczos basis.

  Returns:
    The low-rank solution.

  Raises:
    InputError: If steps is not in [1, N].
  """
  if not 1 <= steps <= op.dimension:
    raise errors.InputError(
        f"Steps must lie in [1, {op.dimension}], got {steps}"
    )
  state = lanczos.lanczos_start(op, c, reorth)
  lanczos.lanczos_advance(state, steps)
  u, y = projected_rational_solve(state.tridiagonal(), poles, state.c_norm)
  return LowRankSolution.from_factor(
      state.window_matrix @ u, y, state.c_norm**2
  )


@dataclasses.dataclass(frozen=True, eq=False)
class _FirstCycle:
  state: lanczos.LanczosState
  poles: zolotarev.PoleSet
  interval: SpectralInterval
  spectral_policy: constants.SpectralEstimatePolicy
  m: int


def _spectral_interval(
    op: operators.SymmetricOperator,
    config: SolverConfig,
    t1: dense_core.TridiagonalMatrix,
) -> tuple[SpectralInterval, constants.SpectralEstimatePolicy]:
  policy = config.spectral_estimate_policy
  if policy != constants.SpectralEstimatePolicy.FIRST_CYCLE_RITZ:
    given = config.eigs if config.eigs is not None else op.spectral_hint
    if given is not None:
      return given, constants.SpectralEstimatePolicy.EXACT_INPUT
    if policy == constants.SpectralEstimatePolicy.EXACT_INPUT:
      raise errors.ConfigError(
          "Exact spectral input requested but no interval is available"
      )
  return (
      estimate_extremal_eigs(t1),
      constants.SpectralEstimatePolicy.FIRST_CYCLE_RITZ,
  )


def _run_first_cycle(
    op: operators.SymmetricOperator,
    c: np.ndarray,
    config: SolverConfig,
    budget: lanczos.VectorBudget,
) -> _FirstCycle:
  """Runs maxmem - 1 steps, then fixes the spectral interval, k and m."""
  policy = config.reorth_policy
  state = lanczos.lanczos_start(
      op,
      c,
      reorth=policy != constants.ReorthPolicy.NONE,
      keep_archive=policy == constants.ReorthPolicy.FULL,
      budget=budget,
  )
  lanczos.lanczos_advance(state, config.maxmem - 1)
  interval, spectral_policy = _spectral_interval(
      op, config, state.tridiagonal()
  )
  poles = config.poles
  if poles is None:
    k = zolotarev.choose_pole_count(config.tol, *interval)
    poles = zolotarev.zolotarev_poles(k, *interval)
  m = config.maxmem - 2 * poles.k - 1
  if m < 1:
    raise errors.ConfigError(
        f"maxmem = {config.maxmem} is too small for {poles.k} poles"
        f" (need at least {2 * poles.k + 2})"
    )
  state.reorth = policy == constants.ReorthPolicy.FULL
  _logger.info(
      "N = %d, k = %d, m = %d, maxmem = %d, interval = [%.4e, %.4e] (%s)",
      op.dimension, poles.k, m, config.maxmem, interval[0], interval[1],
      spectral_policy,
  )
  return _FirstCycle(state, poles, interval, spectral_policy, m)


def _termination(
    state: lanczos.LanczosState,
    estimate: float,
    threshold: float,
    m: int,
    max_matvecs: int | None,
) -> constants.TerminationReason | None:
  if state.breakdown:
    return constants.TerminationReason.BREAKDOWN
  if estimate <= threshold:
    return constants.TerminationReason.TOL
  if max_matvecs is not None and state.steps_done + m > max_matvecs:
    return constants.TerminationReason.CAP
  return None


def _combine_in_place(
    vectors: lanczos.Vectors, coefficients: np.ndarray
) -> None:
  """Replaces `vectors` by the columns of [vectors] @ coefficients.

  The result overwrites the leading vectors one row chunk at a time and the
  list is truncated to the new width, so no second basis is allocated.

  Raises:
    UsageError: If the coefficient matrix does not fit the vectors.
  """
  rows, width = coefficients.shape
  if rows != len(vectors) or width > rows:
    raise errors.UsageError(
        f"Cannot combine {len(vectors)} vectors with a {rows} x {width}"
        " coefficient matrix in place"
    )
  n = vectors[0].shape[0]
  chunk = -(-n // _ROW_CHUNKS)
  for start in range(0, n, chunk):
    window = slice(start, start + chunk)
    combined = np.column_stack([v[window] for v in vectors]) @ coefficients
    for v, column in zip(vectors, combined.T):
      v[window] = column
  del vectors[width:]


def _solution_from_vectors(
    vectors: lanczos.Vectors, y: dense_core.DenseSym, c_norm_sq: float
) -> LowRankSolution:
  """Moves the factor into one array and re-orthonormalizes it in place.

  Vectors are released from the list as they are copied. The factor has at
  most k + 1 columns, so the list and the array together fit in maxmem.
  """
  z = np.empty((vectors[0].shape[0], len(vectors)), order="F")
  for j in reversed(range(len(vectors))):
    z[:, j] = vectors.pop()
  q, r = linalg.qr(z, mode="economic", overwrite_a=True, check_finite=False)
  return LowRankSolution(q, dense_core.as_dense_sym(r @ y @ r.T), c_norm_sq)


def _project_cycle(
    s_tilde: dense_core.DenseSym,
    w: np.ndarray,
    poles: zolotarev.PoleSet,
    c_norm_sq: float,
) -> tuple[np.ndarray, dense_core.DenseSym]:
  utilde = rational_arnoldi.rational_block_arnoldi(s_tilde, w, poles).v
  y = dense_core.solve_projected_lyapunov(
      utilde.T @ s_tilde @ utilde, utilde.T @ w, c_norm_sq
  )
  return utilde, y


def compress_solve(
    op: operators.SymmetricOperator,
    c: np.ndarray,
    config: SolverConfig = SolverConfig(),
    *,
    on_cycle: Callable[[CycleState], None] | None = None,
) -> tuple[LowRankSolution, SolveReport]:
  """Lanczos with compression under a memory cap of `config.maxmem` vectors.

  Args:
    op: Symmetric positive definite operator.
    c: Right-hand side vector.
    config: Solver parameters.
    on_cycle: Optional observer called once per cycle.

  Returns:
    The low-rank solution and the solve report.

  Raises:
    ConfigError: If maxmem cannot hold a cycle for the chosen poles.
    SpectralEstimateError: If the first-cycle Ritz values are not positive.
    MemoryBudgetError: If the stored vectors ever exceed maxmem.
  """
  start_count = op.matvec_count
  budget = lanczos.VectorBudget(config.maxmem)
  with performance_tool.Stopwatch() as stopwatch:
    first = _run_first_cycle(op, c, config, budget)
    state, poles, m = first.state, first.poles, first.m
    c_norm_sq = state.c_norm**2
    threshold = config.tol * c_norm_sq / 2

    length = state.steps_done
    # [Q W | current Lanczos block]; the seam vector is counted by Lanczos.
    basis = lanczos.detach_window(state)
    budget.set(_BASIS_SLOT, length - 1)
    t1 = state.tridiagonal()
    boundary = np.zeros((length, 2))
    boundary[0, 0] = 1.0
    boundary[-1, 1] = 1.0
    wtilde = rational_arnoldi.rational_block_arnoldi(t1, boundary, poles).v
    s_tilde = wtilde.T @ t1.matmul(wtilde)
    w = wtilde[0, :].copy()
    cycle_index = 1
    steps_in_cycle = length
    estimates: list[float] = []

    while True:
      utilde, y = _project_cycle(s_tilde, w, poles, c_norm_sq)
      cycle = CycleState(
          cycle_index=cycle_index,
          steps=steps_in_cycle,
          qw=None,
          s_tilde=s_tilde,
          w=w,
          wtilde=wtilde,
          utilde=utilde,
          y=y,
          beta_seam=state.beta_last,
          estimate=0.0,
      )
      estimate = residual_estimate(cycle)
      estimates.append(estimate)
      _logger.info(
          "Cycle %d: M = %d, residual estimate %.3e (target %.3e)",
          cycle_index, state.steps_done, estimate, threshold,
      )
      _logger.debug(
          "Cycle %d: W~ width %d, U~ width %d",
          cycle_index, wtilde.shape[1], utilde.shape[1],
      )
      termination = _termination(
          state, estimate, threshold, m, config.max_matvecs
      )
      if termination is not None:
        if on_cycle is not None:
          on_cycle(dataclasses.replace(cycle, estimate=estimate))
        _combine_in_place(basis, wtilde @ utilde)
        budget.set(_BASIS_SLOT, len(basis))
        break

      _combine_in_place(basis, wtilde)
      budget.set(_BASIS_SLOT, len(basis))
      if on_cycle is not None:
        on_cycle(
            dataclasses.replace(
                cycle, qw=np.column_stack(basis), estimate=estimate
            )
        )

      seam = state.steps_done
      beta_old = state.beta_last
      last_row = wtilde[-1, :]
      lanczos.lanczos_advance(state, m)
      steps_in_cycle = state.steps_done - seam
      basis.extend(lanczos.detach_window(state))
      budget.set(_BASIS_SLOT, len(basis) - 1)

      width = s_tilde.shape[0]
      order = width + steps_in_cycle
      s = np.zeros((order, order))
      s[:width, :width] = s_tilde
      s[width:, width:] = state.tridiagonal_block(
          seam, state.steps_done
      ).to_dense()
      s[:width, width] = beta_old * last_row
      s[width, :width] = beta_old * last_row
      start_block = np.zeros((order, 2))
      start_block[:width, 0] = w
      start_block[-1, 1] = 1.0
      wtilde = rational_arnoldi.rational_block_arnoldi(s, start_block, poles).v
      s_tilde = wtilde.T @ s @ wtilde
      w = wtilde[:width, :].T @ w
      cycle_index += 1

    tridiagonal = state.tridiagonal()
    archive_vectors = state.archive_vectors
    lanczos.release_vectors(state)
    solution = _solution_from_vectors(basis, y, c_norm_sq)
  report = SolveReport(
      method=constants.Method.COMPRESS,
      matvecs=op.matvec_count - start_count,
      cycles=cycle_index,
      steps=state.steps_done,
      k=poles.k,
      m=m,
      maxmem=config.maxmem,
      estimates=tuple(estimates),
      peak_vectors=budget.peak,
      termination=termination,
      poles=poles,
      interval=first.interval,
      spectral_policy=first.spectral_policy,
      tridiagonal=tridiagonal,
      elapsed_seconds=stopwatch.elapsed_seconds,
      archive_vectors=archive_vectors,
  )
  _logger.info(
      "Compression solve finished (%s): %d matvecs, %d cycles, peak %d vectors",
      termination, report.matvecs, report.cycles, report.peak_vectors,
  )
  return solution, report


def two_pass_solve(
    op: operators.SymmetricOperator,
    c: np.ndarray,
    config: SolverConfig = SolverConfig(),
) -> tuple[LowRankSolution, SolveReport]:
  """Two-pass Lanczos: coefficients first, then the regenerated basis.

  The first pass keeps only T_M and checks the residual estimate at the same
  cycle boundaries as `compress_solve`, so both stop at the same M. The second
  pass repeats the identical recurrence and accumulates Q_M U on the fly.

  Args:
    op: Symmetric positive definite operator.
    c: Right-hand side vector.
    config: Solver parameters.

  Returns:
    The low-rank solution and the solve report.
  """
  start_count = op.matvec_count
  budget = lanczos.VectorBudget(config.maxmem)
  with performance_tool.Stopwatch() as stopwatch:
    first = _run_first_cycle(op, c, config, budget)
    state, poles, m = first.state, first.poles, first.m
    c_norm_sq = state.c_norm**2
    threshold = config.tol * c_norm_sq / 2
    first_length = state.steps_done
    lanczos.detach_window(state)
    state.retain_window = False

    estimates: list[float] = []
    cycles = 0
    while True:
      cycles += 1
      u, y = projected_rational_solve(state.tridiagonal(), poles, state.c_norm)
      estimate = float(state.beta_last * np.linalg.norm(u[-1, :] @ y))
      estimates.append(estimate)
      _logger.info(
          "Pass 1, cycle %d: M = %d, residual estimate %.3e",
          cycles, state.steps_done, estimate,
      )
      termination = _termination(
          state, estimate, threshold, m, config.max_matvecs
      )
      if termination is not None:
        break
      lanczos.lanczos_advance(state, m)

    total_steps = state.steps_done
    tridiagonal = state.tridiagonal()
    pass_one_alphas = np.array(state.alphas)
    archive_vectors = state.archive_vectors
    lanczos.release_vectors(state)

    replay = lanczos.lanczos_start(
        op,
        c,
        reorth=config.reorth_policy != constants.ReorthPolicy.NONE,
        keep_archive=config.reorth_policy == constants.ReorthPolicy.FULL,
        budget=budget,
    )
    lanczos.lanczos_advance(replay, first_length)
    # Accumulates Q_M U; each new block is folded in and released.
    z = lanczos.detach_window(replay)
    budget.set(_ACCUMULATOR_SLOT, len(z) - 1)
    _combine_in_place(z, u[:first_length])
    width = len(z)
    budget.set(_ACCUMULATOR_SLOT, width)
    replay.reorth = config.reorth_policy == constants.ReorthPolicy.FULL
    while replay.steps_done < total_steps and not replay.breakdown:
      seam = replay.steps_done
      lanczos.lanczos_advance(replay, min(m, total_steps - seam))
      z.extend(lanczos.detach_window(replay))
      budget.set(_ACCUMULATOR_SLOT, len(z) - 1)
      _combine_in_place(
          z, np.vstack([np.eye(width), u[seam : replay.steps_done]])
      )
      budget.set(_ACCUMULATOR_SLOT, width)
    if not np.array_equal(replay.alphas, pass_one_alphas):
      _logger.warning(
          "Second Lanczos pass deviates from the first by %.3e",
          float(np.abs(np.subtract(replay.alphas, pass_one_alphas)).max()),
      )
    archive_vectors = max(archive_vectors, replay.archive_vectors)
    lanczos.release_vectors(replay)
    solution = _solution_from_vectors(z, y, c_norm_sq)

  report = SolveReport(
      method=constants.Method.TWO_PASS,
      matvecs=op.matvec_count - start_count,
      cycles=cycles,
      steps=total_steps,
      k=poles.k,
      m=m,
      maxmem=config.maxmem,
      estimates=tuple(estimates),
      peak_vectors=budget.peak,
      termination=termination,
      poles=poles,
      interval=first.interval,
      spectral_policy=first.spectral_policy,
      tridiagonal=tridiagonal,
      elapsed_seconds=stopwatch.elapsed_seconds,
      archive_vectors=archive_vectors,
  )
  _logger.info(
      "Two-pass solve finished (%s): %d matvecs over %d steps",
      termination, report.matvecs, total_steps,
  )
  return solution, report
