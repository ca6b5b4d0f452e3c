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

"""Constants shared by solvers, the command line and tests."""

import enum

import numpy as np

# Unit roundoff of binary64.
UNIT_ROUNDOFF = float(np.finfo(np.float64).eps) / 2
DEFAULT_MAXMEM = 120
DEFAULT_GRID_POINTS = 4096
# Spectral-estimate safety factors applied to the first-cycle Ritz extremes.
RITZ_LOWER_FACTOR = 0.1
RITZ_UPPER_FACTOR = 1.1
# A column is dropped when its post-projection norm falls below this fraction
# of its pre-projection norm.
DROP_TOLERANCE = 1e-12
POLE_PERTURBATION = 1e-8


@enum.unique
class Method(enum.StrEnum):
  COMPRESS = "compress"
  TWO_PASS = "two-pass"
  REFERENCE = "reference"


@enum.unique
class ReorthPolicy(enum.StrEnum):
  """When the Lanczos recurrence is fully reorthogonalized."""

  FIRST_CYCLE = "first-cycle"
  FULL = "full"
  NONE = "none"


@enum.unique
class SpectralEstimatePolicy(enum.StrEnum):
  EXACT_INPUT = "exact-input"
  FIRST_CYCLE_RITZ = "first-cycle-ritz"


@enum.unique
class TerminationReason(enum.StrEnum):
  TOL = "tol"
  BREAKDOWN = "breakdown"
  CAP = "cap"


@enum.unique
class ProblemKind(enum.StrEnum):
  LAP4D = "lap4d"
  MTX = "mtx"


@enum.unique
class RhsKind(enum.StrEnum):
  GAUSSIAN = "gaussian"
  FILE = "file"


@enum.unique
class ExitCode(enum.IntEnum):
  OK = 0
  CAP = 2
  INPUT_ERROR = 3
