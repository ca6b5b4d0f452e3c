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

"""Exceptions raised by solvers, operators and file readers."""


class Error(Exception):
  """Base class of all lyapcomp errors."""


class InputError(Error):
  """Raised when user-provided data is invalid (shape, norm, domain)."""


class ParseError(InputError):
  """Raised when an input file cannot be parsed."""

  def __init__(self, message: str, line_number: int | None = None) -> None:
    if line_number is not None:
      message = f"line {line_number}: {message}"
    super().__init__(message)
    self.line_number = line_number


class ConfigError(InputError):
  """Raised when solver or command options are inconsistent."""


class UsageError(Error):
  """Raised when an API is called in a state that does not allow it."""


class NumericalError(Error):
  """Raised when a numerical kernel fails to produce a trustworthy result."""


class SingularEquationError(NumericalError):
  """Raised when a projected Lyapunov equation has no unique solution."""


class SingularShiftError(NumericalError):
  """Raised when a pole coincides with an eigenvalue of the shifted matrix."""

  def __init__(self, message: str, pole_index: int) -> None:
    super().__init__(message)
    self.pole_index = pole_index


class FactorizationError(NumericalError):
  """Raised when a Cholesky factorization fails."""


class SpectralEstimateError(NumericalError):
  """Raised when the spectral interval estimate is not positive."""


class MemoryBudgetError(Error):
  """Raised when more long vectors are stored than the budget allows."""
