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

"""Command line front end.

Usage:
  lyapcomp solve --problem=lap4d --n_side=64 --tol=1e-8 --method=compress
  lyapcomp solve --problem=mtx --matrix=M.mtx --mass=E.mtx --rhs=file \
      --rhs_file=b.txt
  lyapcomp bench --sizes=16,64 --methods=compress,two-pass --out=table.csv
  lyapcomp poles --k=8 --a=1 --b=1e4

Exit codes: 0 when the tolerance was reached (or the Krylov space became
invariant), 2 when a solve stopped before the tolerance or a sweep row
failed, 3 on invalid input.
"""

from collections.abc import Sequence
import contextlib
import dataclasses
import logging
import sys
from typing import TextIO

from absl import app
from absl import flags

from lyapcomp import experiments
from lyapcomp import solvers
from lyapcomp import zolotarev
from lyapcomp.utils import constants
from lyapcomp.utils import errors

_logger = logging.getLogger(__name__)

_PROBLEM = flags.DEFINE_enum_class(
    "problem", constants.ProblemKind.LAP4D, constants.ProblemKind,
    "Problem source."
)
_N_SIDE = flags.DEFINE_integer(
    "n_side", 16, "Interior grid points per direction of the Laplacian."
)
_MATRIX = flags.DEFINE_string("matrix", None, "Matrix Market file of A or M.")
_MASS = flags.DEFINE_string("mass", None, "Matrix Market file of E.")
_EXTRA_MATRIX = flags.DEFINE_multi_string(
    "extra_matrix", [], "Matrices F_i of M - weight * sum F_i."
)
_EXTRA_WEIGHT = flags.DEFINE_float(
    "extra_weight",
    experiments.DEFAULT_EXTRA_WEIGHT,
    "Weight of --extra_matrix.",
)
_RHS = flags.DEFINE_enum_class(
    "rhs", constants.RhsKind.GAUSSIAN, constants.RhsKind, "Right-hand side."
)
_RHS_FILE = flags.DEFINE_string(
    "rhs_file", None, "Right-hand side vector file."
)
_TOL = flags.DEFINE_float("tol", 1e-8, "Relative residual tolerance.")
_MAXMEM = flags.DEFINE_integer(
    "maxmem", constants.DEFAULT_MAXMEM, "Maximum number of stored vectors."
)
_METHOD = flags.DEFINE_enum(
    "method", constants.Method.COMPRESS, [m.value for m in constants.Method],
    "Solver."
)
_EIGS = flags.DEFINE_list(
    "eigs", None, "Spectral interval 'a,b' of the unscaled operator."
)
_REORTH = flags.DEFINE_enum(
    "reorth", constants.ReorthPolicy.FIRST_CYCLE,
    [policy.value for policy in constants.ReorthPolicy],
    "Lanczos reorthogonalization policy."
)
_MAX_MATVECS = flags.DEFINE_integer(
    "max_matvecs", None, "Cap on Lanczos steps."
)
_OUT = flags.DEFINE_string("out", "-", "CSV destination; '-' is stdout.")
_SIZES = flags.DEFINE_list("sizes", ["16", "64"], "Laplacian n_side sweep.")
_METHODS = flags.DEFINE_list(
    "methods", ["compress", "two-pass"], "Methods of the sweep."
)
_JOBS = flags.DEFINE_integer("jobs", 1, "Sweep rows run in parallel.")
_K = flags.DEFINE_integer("k", 4, "Number of poles.")
_A = flags.DEFINE_float("a", 1.0, "Lower end of the spectral interval.")
_B = flags.DEFINE_float("b", 100.0, "Upper end of the spectral interval.")
_GRID_POINTS = flags.DEFINE_integer(
    "grid_points", constants.DEFAULT_GRID_POINTS, "Grid size of raterr."
)
_DETERMINISTIC = flags.DEFINE_bool(
    "deterministic", False, "Write time_s as 0 for byte-identical output."
)


@dataclasses.dataclass(frozen=True)
class SolveOptions:
  problem: experiments.ProblemOptions
  config: solvers.SolverConfig
  method: constants.Method = constants.Method.COMPRESS
  out: str = "-"
  deterministic: bool = False


@dataclasses.dataclass(frozen=True)
class BenchOptions:
  sizes: tuple[int, ...]
  methods: tuple[constants.Method, ...]
  config: solvers.SolverConfig
  jobs: int = 1
  out: str = "-"
  deterministic: bool = False

  def __post_init__(self) -> None:
    if not self.methods:
      raise errors.ConfigError("The method list is empty")
    if not self.sizes:
      raise errors.ConfigError("The size list is empty")


@dataclasses.dataclass(frozen=True)
class PolesOptions:
  k: int
  a: float
  b: float
  grid_points: int = constants.DEFAULT_GRID_POINTS


@contextlib.contextmanager
def _open_output(path: str, stdout: TextIO):
  if path == "-":
    yield stdout
  else:
    with open(path, "w", newline="", encoding="utf-8") as stream:
      yield stream


def _exit_code(rows: Sequence[experiments.ExperimentRow]) -> constants.ExitCode:
  if all(
      row.ok and row.termination != constants.TerminationReason.CAP
      for row in rows
  ):
    return constants.ExitCode.OK
  return constants.ExitCode.CAP


def cmd_solve(
    options: SolveOptions, stdout: TextIO = sys.stdout
) -> constants.ExitCode:
  """Solves one problem and writes its CSV row.

  Raises:
    InputError: On invalid input.
    OSError: If a file cannot be read or written.
  """
  problem = experiments.build_problem(options.problem)
  row, report = experiments.run_method(problem, options.method, options.config)
  experiments.log_finite_precision_diagnostics(problem, report)
  with _open_output(options.out, stdout) as stream:
    experiments.write_rows([row], stream, options.deterministic)
  print(
      f"{problem.name}: {options.method} stopped on {report.termination} after"
      f" {report.matvecs} matvecs in {report.cycles} cycle(s), k = {report.k},"
      f" scaled residual {row.scaled_residual:.3e}"
      f" (estimate {report.residual_estimate:.3e})",
      file=sys.stderr,
  )
  return _exit_code([row])


def cmd_bench(
    options: BenchOptions, stdout: TextIO = sys.stdout
) -> constants.ExitCode:
  """Sweeps Laplacian sizes and methods and writes one row per pair."""
  tasks = [
      experiments.SweepTask(
          experiments.ProblemOptions(
              kind=constants.ProblemKind.LAP4D, n_side=n_side
          ),
          method,
          options.config,
      )
      for n_side in options.sizes
      for method in options.methods
  ]
  rows = experiments.run_sweep(tasks, jobs=options.jobs)
  with _open_output(options.out, stdout) as stream:
    experiments.write_rows(rows, stream, options.deterministic)
  return _exit_code(rows)


def cmd_poles(
    options: PolesOptions, stdout: TextIO = sys.stdout
) -> constants.ExitCode:
  """Prints optimal poles, the Zolotarev bound and the grid raterr."""
  poles = zolotarev.zolotarev_poles(options.k, options.a, options.b)
  for pole in poles:
    print(f"pole {pole:.16e}", file=stdout)
  print(
      f"bound {zolotarev.zolotarev_bound(options.k, options.a, options.b):.6e}",
      file=stdout,
  )
  raterr = zolotarev.raterr(poles, options.a, options.b, options.grid_points)
  print(f"raterr {raterr:.6e}", file=stdout)
  return constants.ExitCode.OK


def _parse_interval(values: Sequence[str] | None) -> tuple[float, float] | None:
  if not values:
    return None
  if len(values) != 2:
    raise errors.ConfigError(f"--eigs expects 'a,b', got {','.join(values)}")
  try:
    a, b = (float(value) for value in values)
  except ValueError as e:
    raise errors.ConfigError(f"--eigs is not numeric: {values}") from e
  return a, b


def _config_from_flags() -> solvers.SolverConfig:
  return solvers.SolverConfig(
      tol=_TOL.value,
      maxmem=_MAXMEM.value,
      max_matvecs=_MAX_MATVECS.value,
      reorth_policy=constants.ReorthPolicy(_REORTH.value),
  )


def _problem_from_flags() -> experiments.ProblemOptions:
  return experiments.ProblemOptions(
      kind=_PROBLEM.value,
      n_side=_N_SIDE.value if _PROBLEM.value == constants.ProblemKind.LAP4D
      else None,
      matrix=_MATRIX.value,
      mass=_MASS.value,
      extra_matrices=tuple(_EXTRA_MATRIX.value),
      extra_weight=_EXTRA_WEIGHT.value,
      rhs=_RHS.value,
      rhs_file=_RHS_FILE.value,
      eigs=_parse_interval(_EIGS.value),
  )


def _run_command(command: str) -> constants.ExitCode:
  match command:
    case "solve":
      return cmd_solve(
          SolveOptions(
              problem=_problem_from_flags(),
              config=_config_from_flags(),
              method=constants.Method(_METHOD.value),
              out=_OUT.value,
              deterministic=_DETERMINISTIC.value,
          )
      )
    case "bench":
      try:
        sizes = tuple(int(size) for size in _SIZES.value)
        methods = tuple(constants.Method(name) for name in _METHODS.value)
      except ValueError as e:
        raise errors.ConfigError(f"Invalid sweep list: {e}") from e
      return cmd_bench(
          BenchOptions(
              sizes=sizes,
              methods=methods,
              config=_config_from_flags(),
              jobs=_JOBS.value,
              out=_OUT.value,
              deterministic=_DETERMINISTIC.value,
          )
      )
    case "poles":
      return cmd_poles(
          PolesOptions(_K.value, _A.value, _B.value, _GRID_POINTS.value)
      )
    case _:
      raise errors.UsageError(
          f"Unknown command {command!r}; expected solve, bench or poles"
      )


def main(argv: Sequence[str]) -> int:
  if len(argv) != 2:
    print("Usage: lyapcomp {solve|bench|poles} [--flags]", file=sys.stderr)
    return constants.ExitCode.INPUT_ERROR
  try:
    return _run_command(argv[1])
  except (
      errors.InputError,
      errors.UsageError,
      errors.SpectralEstimateError,
      OSError,
  ) as e:
    _logger.error("%s", e)
    print(f"error: {e}", file=sys.stderr)
    return constants.ExitCode.INPUT_ERROR
  except (errors.NumericalError, errors.MemoryBudgetError) as e:
    _logger.error("Solver failed: %s", e)
    print(f"error: solver failed: {e}", file=sys.stderr)
    return constants.ExitCode.CAP


def run() -> None:
  app.run(main)


if __name__ == "__main__":
  run()
