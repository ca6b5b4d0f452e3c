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

"""Resumable Lanczos recurrence with cycle windows and reorthogonalization.

The state keeps the two live recurrence vectors and, while window retention
is on, every basis vector produced since the last `detach_window`. Storage of
long vectors is reported to a `VectorBudget`, which enforces the memory cap
of the compression solver.
"""

import dataclasses
import logging

import numpy as np

from lyapcomp import dense_core
from lyapcomp import operators
from lyapcomp.utils import constants
from lyapcomp.utils import errors

_logger = logging.getLogger(__name__)

_LANCZOS_SLOT = "lanczos"

Vectors = list[np.ndarray]


class VectorBudget:
  """Counts stored length-N vectors per owner and tracks the peak.

  Only basis vectors are counted; the single work vector holding a fresh
  product Aq is not.
  """

  def __init__(self, limit: int | None = None) -> None:
    self.limit = limit
    self._slots: dict[str, int] = {}
    self._peak = 0

  @property
  def current(self) -> int:
    return sum(self._slots.values())

  @property
  def peak(self) -> int:
    return self._peak

  def set(self, owner: str, count: int) -> None:
    """Declares that `owner` now stores `count` vectors.

    Raises:
      MemoryBudgetError: If the total exceeds the limit.
    """
    self._slots[owner] = count
    total = self.current
    self._peak = max(self._peak, total)
    if self.limit is not None and total > self.limit:
      raise errors.MemoryBudgetError(
          f"{total} stored vectors exceed the budget of {self.limit}"
class _ArchiveStore:
  """Growable N x j column store (amortized doubling)."""

  def __init__(self, n: int, capacity: int = 16) -> None:
    self._data = np.empty((n, max(capacity, 1)), order="F")
    self._size = 0

  def __len__(self) -> int:
    return self._size

  def append(self, v: np.ndarray) -> None:
    if self._size == self._data.shape[1]:
      grown = np.empty(
          (self._data.shape[0], 2 * self._data.shape[1]), order="F"
      )
      grown[:, : self._size] = self._data[:, : self._size]
      self._data = grown
    self._data[:, self._size] = v
    self._size += 1

  @property
  def matrix(self) -> np.ndarray:
    return self._data[:, : self._size]


@dataclasses.dataclass(eq=False)
class LanczosState:
  """Mutable state of one Lanczos run.

  Window vectors are separate arrays so that callers can combine them in
  place and free them one by one.

  Attributes:
    op: The operator.
    q_prev: Previous Lanczos vector, None before the first step.
    q_curr: Next vector to multiply; None after a breakdown.
    alphas: Diagonal coefficients.
    betas: Off-diagonal coefficients; `betas[j - 1]` couples q_j and q_{j+1}.
    steps_done: Number of completed steps.
    reorth: Whether new vectors are fully reorthogonalized.
    retain_window: Whether produced vectors are stored until detached.
    breakdown: Whether an invariant subspace was found.
    budget: Memory instrumentation.
    norm_estimate: Running Gershgorin bound of ||T||, an estimate of ||A||.
    c_norm: Norm of the starting vector.
    window: Vectors produced since the last detach, oldest first.
    archive: Every vector of the run, kept only for full
      reorthogonalization across detached windows.
  """

  op: operators.SymmetricOperator
  q_prev: np.ndarray | None
  q_curr: np.ndarray | None
  alphas: list[float]
  betas: list[float]
  steps_done: int
  reorth: bool
  retain_window: bool
  breakdown: bool
  budget: VectorBudget
  norm_estimate: float
  c_norm: float
  window: Vectors = dataclasses.field(default_factory=list, repr=False)
  archive: _ArchiveStore | None = dataclasses.field(default=None, repr=False)
  _q_prev_in_window: bool = False

  @property
  def beta_last(self) -> float:
    """Beta at the current seam (0 before the first step)."""
    return self.betas[-1] if self.betas else 0.0

  @property
  def window_size(self) -> int:
    return len(self.window)

  @property
  def window_matrix(self) -> np.ndarray:
    """A stacked copy of the window, for callers without a memory cap."""
    if not self.window:
      return np.empty((self.op.dimension, 0))
    return np.column_stack(self.window)

  @property
  def archive_vectors(self) -> int:
    return len(self.archive) if self.archive is not None else 0

  @property
  def stored_basis(self) -> np.ndarray | Vectors:
    """The stored vectors new ones are orthogonalized against."""
    return self.archive.matrix if self.archive is not None else self.window

  def tridiagonal(self) -> dense_core.TridiagonalMatrix:
    """Returns T_j for all completed steps."""
    if not self.steps_done:
      raise errors.UsageError("No Lanczos step has been taken")
    return dense_core.TridiagonalMatrix(
        np.array(self.alphas), np.array(self.betas[:-1])
    )

  def tridiagonal_block(
      self, start: int, stop: int
  ) -> dense_core.TridiagonalMatrix:
    """Returns the principal block of T for steps start+1..stop."""
    return dense_core.TridiagonalMatrix(
        np.array(self.alphas[start:stop]),
        np.array(self.betas[start : stop - 1]),
    )

  def _report(self) -> None:
    live = len(self.window) + (self.q_curr is not None)
    if self.q_prev is not None and not self._q_prev_in_window:
      live += 1
    self.budget.set(_LANCZOS_SLOT, live)


def lanczos_start(
    op: operators.SymmetricOperator,
    c: np.ndarray,
    reorth: bool,
    *,
    retain_window: bool = True,
    keep_archive: bool = False,
    budget: VectorBudget | None = None,
) -> LanczosState:
  """Starts the Lanczos process with q_1 = c / ||c||.

  Args:
    op: Symmetric operator.
    c: Starting vector.
    reorth: Whether to fully reorthogonalize new vectors.
    retain_window: Whether to store produced vectors until detached.
    keep_archive: Whether to keep every vector of the run for
      reorthogonalization across detached windows. The archive is not part of
      the memory budget.
    budget: Memory instrumentation, a fresh unbounded one by default.

  Returns:
    The initial state.

  Raises:
    InputError: If c is zero or has the wrong length.
  """
  c = np.asarray(c, dtype=np.float64)
  if c.shape != (op.dimension,):
    raise errors.InputError(
        f"Expected a vector of length {op.dimension}, got shape {c.shape}"
    )
  c_norm = float(np.linalg.norm(c))
  if c_norm == 0.0:
    raise errors.InputError("Starting vector is zero")
  state = LanczosState(
      op=op,
      q_prev=None,
      q_curr=c / c_norm,
      alphas=[],
      betas=[],
      steps_done=0,
      reorth=reorth,
      retain_window=retain_window,
      breakdown=False,
      budget=budget if budget is not None else VectorBudget(),
      norm_estimate=0.0,
      c_norm=c_norm,
      archive=_ArchiveStore(op.dimension) if keep_archive else None,
  )
  state._report()
  return state


def _reorthogonalize(
    state: LanczosState, w: np.ndarray, q: np.ndarray
) -> tuple[np.ndarray, float]:
  """Orthogonalizes w against the stored basis and then against q.

  Returns:
    The new w and its removed component along q, a correction of alpha.
  """
  w, _ = dense_core.project_out(w, state.stored_basis)
  w, coefficients = dense_core.project_out(w, [q])
  return w, float(coefficients[0])


def lanczos_advance(state: LanczosState, steps: int) -> LanczosState:
  """Runs up to `steps` Lanczos steps, stopping early on breakdown.

  Args:
    state: State to advance in place.
    steps: Number of steps; each consumes exactly one operator application.

  Returns:
    The same state object.

  Raises:
    UsageError: If the process already broke down or was released, or
      reorthogonalization is requested without any stored basis.
  """
  if state.breakdown:
    raise errors.UsageError("Cannot advance a Lanczos process after breakdown")
  if state.q_curr is None:
    raise errors.UsageError("Lanczos vectors were released")
  if state.reorth and not state.retain_window and state.archive is None:
    raise errors.UsageError("Reorthogonalization needs a stored basis")
  n = state.op.dimension
  for _ in range(steps):
    q = state.q_curr
    assert q is not None
    w = state.op.apply(q)
    beta_prev = state.beta_last
    if state.q_prev is not None:
      w -= beta_prev * state.q_prev
    alpha = float(q @ w)
    w -= alpha * q
    if state.reorth:
      w, correction = _reorthogonalize(state, w, q)
      alpha += correction
    beta = float(np.linalg.norm(w))

    state.alphas.append(alpha)
    state.steps_done += 1
    if state.retain_window:
      state.window.append(q)
    if state.archive is not None:
      state.archive.append(q)
    state.norm_estimate = max(
        state.norm_estimate, abs(alpha) + beta + beta_prev
    )
    state.q_prev = q
    state._q_prev_in_window = state.retain_window
    if beta <= n * constants.UNIT_ROUNDOFF * state.norm_estimate:
      _logger.info(
          "Lanczos breakdown at step %d (beta = %.3e)", state.steps_done, beta
      )
      state.betas.append(0.0)
      state.q_curr = None
      state.breakdown = True
      state._report()
      break
    state.betas.append(beta)
    w /= beta
    state.q_curr = w
    state._report()
  return state


def detach_window(state: LanczosState) -> Vectors:
  """Returns the vectors produced since the last detach and forgets them.

  The state keeps only the seam vector q_prev (the last returned vector,
  shared, not copied) and q_curr.

  Raises:
    UsageError: If window retention is off.
  """
  if not state.retain_window:
    raise errors.UsageError("Lanczos window was not retained")
  block, state.window = state.window, []
  state._q_prev_in_window = False
  state._report()
  return block


def release_vectors(state: LanczosState) -> None:
  """Drops every stored vector; the coefficients stay available."""
  state.window = []
  state.archive = None
  state.q_prev = None
  state.q_curr = None
  state._q_prev_in_window = False
  state._report()
