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

"""Problem assembly, solver runs and CSV rows for experiments."""

from collections.abc import Iterable, Sequence
from concurrent import futures
import csv
import dataclasses
import logging
import math
from typing import TextIO

import numpy as np

from lyapcomp import finite_precision
from lyapcomp import operators
from lyapcomp import solvers
from lyapcomp.utils import constants
from lyapcomp.utils import errors
from lyapcomp.utils import performance_tool

_logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "N",
    "tol",
    "k",
    "matvecs",
    "time_s",
    "scaled_residual",
    "cycles",
    "peak_vectors",
    "method",
)
DEFAULT_EXTRA_WEIGHT = 10.0


@dataclasses.dataclass(frozen=True)
class ProblemOptions:
  """Where the operator and the right-hand side come from.

  Attributes:
    kind: Generated Laplacian or Matrix Market input.
    n_side: Grid points per direction of the Laplacian.
    matrix: Path of the system matrix (A, or M of E x' = M x + b u).
    mass: Optional path of the mass matrix E.
    extra_matrices: Paths of matrices F_i subtracted as M - weight * sum F_i.
    extra_weight: Weight of the extra matrices.
    rhs: Right-hand side kind.
    rhs_file: Path of the right-hand side vector.
    eigs: Explicit spectral interval of the unscaled operator.
  """

  kind: constants.ProblemKind = constants.ProblemKind.LAP4D
  n_side: int | None = None
  matrix: str | None = None
  mass: str | None = None
  extra_matrices: tuple[str, ...] = ()
  extra_weight: float = DEFAULT_EXTRA_WEIGHT
  rhs: constants.RhsKind = constants.RhsKind.GAUSSIAN
  rhs_file: str | None = None
  eigs: operators.SpectralInterval | None = None

  def __post_init__(self) -> None:
    match self.kind:
      case constants.ProblemKind.LAP4D:
        if self.n_side is None or self.n_side < 1:
          raise errors.ConfigError(
              f"lap4d needs a positive n_side, got {self.n_side}"
          )
        if self.matrix or self.mass or self.extra_matrices:
          raise errors.ConfigError("lap4d does not read matrix files")
        if self.rhs != constants.RhsKind.GAUSSIAN:
          raise errors.ConfigError("lap4d uses the Gaussian right-hand side")
      case constants.ProblemKind.MTX:
        if not self.matrix:
          raise errors.ConfigError("mtx problems need a matrix path")
        if self.rhs != constants.RhsKind.FILE or not self.rhs_file:
          raise errors.ConfigError("mtx problems need a right-hand side file")
    if self.extra_matrices and not self.mass:
      raise errors.ConfigError("Extra matrices need a generalized problem")


@dataclasses.dataclass(frozen=True, eq=False)
class Problem:
  """A scaled problem A X + X A = c c^T with ||c|| = 1.

  Attributes:
    name: Short description for logs.
    op: The scaled operator.
    c: Unit-norm right-hand side.
    rhs_norm: Norm of the right-hand side before scaling.
    matrix: The explicit unscaled matrix, if there is one.
  """

  name: str
  op: operators.SymmetricOperator
  c: np.ndarray
  rhs_norm: float
  matrix: operators.SparseCSR | None = None

  @property
  def dimension(self) -> int:
    return self.op.dimension


def build_problem(options: ProblemOptions) -> Problem:
  """Generates or loads the operator and right-hand side, then scales them.

  Raises:
    InputError: On invalid input files or inconsistent dimensions.
    OSError: If a file cannot be read.
  """
  matrix: operators.SparseCSR | None = None
  if options.kind == constants.ProblemKind.LAP4D:
    assert options.n_side is not None
    matrix = operators.kron_sum_laplacian(options.n_side)
    hint = options.eigs or operators.laplacian_extremal_eigs(options.n_side)
    op: operators.SymmetricOperator = operators.MatrixOperator(matrix, hint)
    b = operators.gaussian_rhs(options.n_side)
    name = f"lap4d(n_side={options.n_side})"
  else:
    assert options.matrix is not None and options.rhs_file is not None
    system = operators.load_matrix_market(options.matrix)
    b = operators.load_vector(options.rhs_file)
    if options.mass:
      if options.extra_matrices:
        system = operators.combine_matrices(
            system,
            [operators.load_matrix_market(p) for p in options.extra_matrices],
            options.extra_weight,
        )
      generalized = operators.cholesky_transformed_operator(
          system, operators.load_matrix_market(options.mass)
      )
      generalized.spectral_hint = options.eigs
      op = generalized
      b = operators.transformed_rhs(generalized, b)
    else:
      if not system.is_symmetric():
        raise errors.InputError(f"{options.matrix} is not symmetric")
      matrix = system
      op = operators.MatrixOperator(system, options.eigs)
    if b.shape != (op.dimension,):
      raise errors.InputError(
          f"Right-hand side has length {b.size}, operator dimension is"
          f" {op.dimension}"
      )
    name = f"mtx({options.matrix})"
  rhs_norm = float(np.linalg.norm(b))
  op, c = operators.normalize_problem(op, b)
  return Problem(name=name, op=op, c=c, rhs_norm=rhs_norm, matrix=matrix)


@dataclasses.dataclass(frozen=True)
class ExperimentRow:
  """One CSV row: a single method on a single problem.

  Attributes:
    n: Problem dimension N.
    tol: Requested tolerance.
    k: Number of poles.
    matvecs: Operator applications of the solve (verification excluded).
    time_s: Wall-clock seconds of the solve.
    scaled_residual: True residual norm divided by ||c||^2.
    cycles: Number of cycles.
    peak_vectors: Peak stored long vectors.
    method: Solver name.
    termination: Why the solve stopped, None for failed rows.
  """

  n: int
  tol: float
  k: float
  matvecs: float
  time_s: float
  scaled_residual: float
  cycles: float
  peak_vectors: float
  method: constants.Method
  termination: constants.TerminationReason | None = None

  @classmethod
  def failed(
      cls, n: int, tol: float, method: constants.Method
  ) -> "ExperimentRow":
    nan = math.nan
    return cls(n, tol, nan, nan, nan, nan, nan, nan, method)

  @property
  def ok(self) -> bool:
    return self.termination is not None

  def csv_fields(self, deterministic: bool = False) -> list[str]:
    def count(value: float) -> str:
      return "nan" if math.isnan(value) else str(int(value))

    time_s = 0.0 if deterministic else self.time_s
    return [
        str(self.n),
        f"{self.tol:g}",
        count(self.k),
        count(self.matvecs),
        "nan" if math.isnan(time_s) else f"{time_s:.6f}",
        f"{self.scaled_residual:.6e}",
        count(self.cycles),
        count(self.peak_vectors),
        str(self.method),
    ]


def run_method(
    problem: Problem,
    method: constants.Method,
    config: solvers.SolverConfig,
) -> tuple[ExperimentRow, solvers.SolveReport]:
  """Runs one solver and verifies its true residual.

  The reference method is memory-unbounded; it is run with the M and poles a
  compression solve on the same problem settles on, and only its own
  operator applications and time are reported.
  """
  op, c = problem.op, problem.c
  match method:
    case constants.Method.COMPRESS:
      solution, report = solvers.compress_solve(op, c, config)
    case constants.Method.TWO_PASS:
      solution, report = solvers.two_pass_solve(op, c, config)
    case constants.Method.REFERENCE:
      _, plan = solvers.compress_solve(op, c, config)
      start_count = op.matvec_count
      with performance_tool.Stopwatch() as stopwatch:
        solution = solvers.reference_solve(
            op,
            c,
            min(plan.steps, op.dimension),
            plan.poles,
            reorth=config.reorth_policy != constants.ReorthPolicy.NONE,
        )
      report = dataclasses.replace(
          plan,
          method=constants.Method.REFERENCE,
          matvecs=op.matvec_count - start_count,
          peak_vectors=plan.steps + 1,
          elapsed_seconds=stopwatch.elapsed_seconds,
      )
  residual = solvers.true_residual_fro(op, solution, c)
  row = ExperimentRow(
      n=problem.dimension,
      tol=config.tol,
      k=report.k,
      matvecs=report.matvecs,
      time_s=report.elapsed_seconds,
      scaled_residual=residual / float(c @ c),
      cycles=report.cycles,
      peak_vectors=report.peak_vectors,
      method=method,
      termination=report.termination,
  )
  _logger.info(
      "%s %s: %d matvecs, scaled residual %.3e (%s)",
      problem.name, method, report.matvecs, row.scaled_residual,
      report.termination,
  )
  return row, report


def log_finite_precision_diagnostics(
    problem: Problem, report: solvers.SolveReport
) -> finite_precision.FiniteprecisionBounds | None:
  """Logs the roundoff bound constants for problems with an explicit matrix."""
  if problem.matrix is None:
    return None
  scale = problem.rhs_norm**2
  norm_a = problem.matrix.spectral_norm() / scale
  a, b = report.interval
  bounds = finite_precision.fp_bound_constants(
      n=problem.dimension,
      steps=report.steps,
      max_row_nnz=problem.matrix.max_row_nnz,
      norm_ratio=problem.matrix.abs_norm_ratio(),
      lambda_min=a,
      lambda_max=b,
      norm_a=norm_a,
  )
  _logger.info(
      "Roundoff diagnostics: eps0 = %.3e, eps1 = %.3e, slack = %.3e, "
      "Lanczos bound = %.3e, valid = %s",
      bounds.eps0, bounds.eps1, bounds.slack, bounds.lanczos_residual_bound,
      bounds.valid,
  )
  return bounds


@dataclasses.dataclass(frozen=True)
class SweepTask:
  problem: ProblemOptions
  method: constants.Method
  config: solvers.SolverConfig


def _run_task(task: SweepTask) -> ExperimentRow:
  problem = build_problem(task.problem)
  row, _ = run_method(problem, task.method, task.config)
  return row


def _expected_dimension(options: ProblemOptions) -> int:
  return options.n_side**2 if options.n_side is not None else 0


def run_sweep(
    tasks: Sequence[SweepTask], jobs: int = 1
) -> list[ExperimentRow]:
  """Runs every task, possibly in parallel, keeping the task order.

  A failing task is logged and yields a row of NaNs; the sweep continues.
  """
  if jobs < 1:
    raise errors.ConfigError(f"jobs must be positive: {jobs}")
  rows: list[ExperimentRow] = []
  with futures.ThreadPoolExecutor(max_workers=jobs) as executor:
    pending = [executor.submit(_run_task, task) for task in tasks]
    for task, future in zip(tasks, pending):
      try:
        rows.append(future.result())
      except (errors.Error, OSError):
        _logger.exception(
            "Row %s / %s failed", task.problem.n_side, task.method
        )
        rows.append(
            ExperimentRow.failed(
                _expected_dimension(task.problem), task.config.tol, task.method
            )
        )
  return rows


def write_rows(
    rows: Iterable[ExperimentRow], stream: TextIO, deterministic: bool = False
) -> None:
  """Writes the header and one line per row."""
  writer = csv.writer(stream, lineterminator="\n")
  writer.writerow(CSV_COLUMNS)
  for row in rows:
    writer.writerow(row.csv_fields(deterministic))
