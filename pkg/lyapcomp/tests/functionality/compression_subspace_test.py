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

"""Checks the compressed cycle quantities against explicitly built bases.

The solver never forms W_i, the basis of Q(T_i, [e_1, e_L], poles) in
Lanczos coordinates. These tests rebuild it from the per-cycle factors,
W_1 = W~_1 and W_i = blkdiag(W_{i-1}, I) W~_i, and compare it with rational
Krylov bases computed directly from the leading blocks of T_M.
"""

import dataclasses

from absl.testing import absltest
from absl.testing import parameterized
import numpy as np
from scipy import linalg

from lyapcomp import operators
from lyapcomp import rational_arnoldi
from lyapcomp import solvers
from lyapcomp import zolotarev
from lyapcomp.tests import problem_utils
from lyapcomp.utils import constants

_N = 200
_K = 6
_MAXMEM = 30
_CYCLES = 4


@dataclasses.dataclass(frozen=True, eq=False)
class _ExplicitCycle:
  cycle: solvers.CycleState
  length: int
  w_basis: np.ndarray


def _unit(order: int, index: int) -> np.ndarray:
  vector = np.zeros(order)
  vector[index] = 1.0
  return vector


def _explicit_cycles(
    cycles: list[solvers.CycleState],
) -> list[_ExplicitCycle]:
  explicit = []
  w_basis = None
  length = 0
  for cycle in cycles:
    length += cycle.steps
    if w_basis is None:
      w_basis = cycle.wtilde
    else:
      w_basis = linalg.block_diag(w_basis, np.eye(cycle.steps)) @ cycle.wtilde
    explicit.append(_ExplicitCycle(cycle, length, w_basis))
  return explicit


def _partial_fractions(
    t: np.ndarray, weights: np.ndarray, poles: zolotarev.PoleSet
) -> np.ndarray:
  """Returns sum_j weights_j (T - pole_j I)^{-1} e_1."""
  start = _unit(t.shape[0], 0)
  identity = np.eye(t.shape[0])
  return sum(
      weight * np.linalg.solve(t - pole * identity, start)
      for weight, pole in zip(weights, poles)
  )


def _least_squares_residual(basis: np.ndarray, block: np.ndarray) -> float:
  coefficients, *_ = np.linalg.lstsq(basis, block, rcond=None)
  return float(
      np.linalg.norm(block - basis @ coefficients) / np.linalg.norm(block)
  )


class CompressionSubspaceTest(absltest.TestCase):

  @classmethod
  def setUpClass(cls):
    super().setUpClass()
    op = problem_utils.log_spaced_diagonal(_N, 1.0, 100.0)
    c = np.random.default_rng(31).standard_normal(_N)
    cls.poles = zolotarev.zolotarev_poles(_K, 1.0, 100.0)
    m = _MAXMEM - 2 * _K - 1
    config = solvers.SolverConfig(
        tol=1e-14,
        maxmem=_MAXMEM,
        max_matvecs=_MAXMEM - 1 + (_CYCLES - 1) * m,
        poles=cls.poles,
        reorth_policy=constants.ReorthPolicy.FULL,
    )
    recorded: list[solvers.CycleState] = []
    _, cls.report = solvers.compress_solve(
        op, c, config, on_cycle=recorded.append
    )
    cls.c_norm_sq = float(c @ c)
    cls.t = cls.report.tridiagonal.to_dense()
    cls.cycles = _explicit_cycles(recorded)

  def leading(self, length: int) -> np.ndarray:
    return self.t[:length, :length]

  def test_run_has_enough_cycles(self):
    self.assertEqual(self.report.termination, constants.TerminationReason.CAP)
    self.assertLen(self.cycles, _CYCLES)
    self.assertEqual(self.cycles[-1].length, self.report.steps)

  def test_w_basis_spans_two_sided_rational_space(self):
    for explicit in self.cycles:
      with self.subTest(cycle=explicit.cycle.cycle_index):
        length = explicit.length
        np.testing.assert_allclose(
            explicit.w_basis.T @ explicit.w_basis,
            np.eye(explicit.w_basis.shape[1]),
            atol=1e-12,
        )
        boundary = np.column_stack(
            [_unit(length, 0), _unit(length, length - 1)]
        )
        direct = rational_arnoldi.rational_block_arnoldi(
            self.leading(length), boundary, self.poles
        ).v
        self.assertEqual(direct.shape[1], explicit.w_basis.shape[1])
        self.assertLessEqual(
            problem_utils.max_principal_angle(explicit.w_basis, direct), 1e-8
        )

  def test_u_basis_spans_rational_space_of_start_vector(self):
    for explicit in self.cycles:
      with self.subTest(cycle=explicit.cycle.cycle_index):
        length = explicit.length
        u_basis = explicit.w_basis @ explicit.cycle.utilde
        direct = rational_arnoldi.rational_block_arnoldi(
            self.leading(length), _unit(length, 0), self.poles
        ).v
        self.assertLessEqual(
            problem_utils.max_principal_angle(u_basis, direct), 1e-8
        )

  def test_projected_quantities(self):
    for explicit in self.cycles:
      with self.subTest(cycle=explicit.cycle.cycle_index):
        cycle, w_basis = explicit.cycle, explicit.w_basis
        t_leading = self.leading(explicit.length)
        np.testing.assert_allclose(cycle.w, w_basis[0, :], atol=1e-12)
        np.testing.assert_allclose(
            cycle.wtilde_last_row, w_basis[-1, :], atol=1e-12
        )
        scale = np.linalg.norm(t_leading, 2)
        np.testing.assert_allclose(
            cycle.s_tilde, w_basis.T @ t_leading @ w_basis, atol=1e-10 * scale
        )

  def test_solution_matches_direct_projection(self):
    for explicit in self.cycles:
      with self.subTest(cycle=explicit.cycle.cycle_index):
        cycle = explicit.cycle
        u_basis = explicit.w_basis @ cycle.utilde
        compressed = u_basis @ cycle.y @ u_basis.T
        u, y = solvers.projected_rational_solve(
            self.leading(explicit.length), self.poles, np.sqrt(self.c_norm_sq)
        )
        direct = u @ y @ u.T
        self.assertLess(
            np.linalg.norm(compressed - direct) / np.linalg.norm(direct), 1e-8
        )

  def test_padded_basis_contains_next_rational_space(self):
    for previous, current in zip(self.cycles, self.cycles[1:]):
      with self.subTest(cycle=current.cycle.cycle_index):
        length = current.length
        padded = linalg.block_diag(
            previous.w_basis, np.eye(length - previous.length)
        )
        boundary = np.column_stack(
            [_unit(length, 0), _unit(length, length - 1)]
        )
        one_sided = rational_arnoldi.rational_block_arnoldi(
            self.leading(length), _unit(length, 0), self.poles
        ).v
        two_sided = rational_arnoldi.rational_block_arnoldi(
            self.leading(length), boundary, self.poles
        ).v
        self.assertLessEqual(_least_squares_residual(two_sided, one_sided),
                             1e-8)
        self.assertLessEqual(_least_squares_residual(padded, two_sided), 1e-8)

  def test_rational_function_update_is_low_rank(self):
    weights = np.random.default_rng(32).standard_normal(_K)
    for previous, current in zip(self.cycles, self.cycles[1:]):
      with self.subTest(cycle=current.cycle.cycle_index):
        extended = _partial_fractions(
            self.leading(current.length), weights, self.poles
        )
        update = (
            extended[: previous.length]
            - _partial_fractions(
                self.leading(previous.length), weights, self.poles
            )
        )
        remainder = update - previous.w_basis @ (previous.w_basis.T @ update)
        self.assertLessEqual(
            np.linalg.norm(remainder), 1e-8 * np.linalg.norm(extended)
        )


class ResidualEstimateTest(absltest.TestCase):

  def test_estimate_expressions_agree(self):
    op = problem_utils.log_spaced_diagonal(100, 1.0, 100.0)
    c = np.random.default_rng(33).standard_normal(100)
    recorded: list[solvers.CycleState] = []
    _, report = solvers.compress_solve(
        op,
        c,
        solvers.SolverConfig(
            tol=1e-14,
            maxmem=24,
            max_matvecs=23 + 3 * 13,
            poles=zolotarev.zolotarev_poles(5, 1.0, 100.0),
            reorth_policy=constants.ReorthPolicy.FULL,
        ),
        on_cycle=recorded.append,
    )
    self.assertLen(recorded, 4)
    c_norm_sq = float(c @ c)
    t = report.tridiagonal.to_dense()
    for explicit in _explicit_cycles(recorded):
      cycle = explicit.cycle
      with self.subTest(cycle=cycle.cycle_index):
        u_basis = explicit.w_basis @ cycle.utilde
        explicit_estimate = cycle.beta_seam * np.linalg.norm(
            u_basis[-1, :] @ cycle.y
        )
        self.assertAlmostEqual(
            cycle.estimate, explicit_estimate,
            delta=1e-12 * cycle.estimate,
        )
        self.assertEqual(solvers.residual_estimate(cycle), cycle.estimate)
        length = explicit.length
        u, y = solvers.projected_rational_solve(
            t[:length, :length], report.poles, np.sqrt(c_norm_sq)
        )
        self.assertLess(
            abs(cycle.beta_seam * np.linalg.norm(u[-1, :] @ y)
                - cycle.estimate),
            1e-10 * c_norm_sq,
        )
        if cycle.qw is not None:
          self.assertEqual(
              cycle.beta_seam, report.tridiagonal.offdiag[length - 1]
          )


class ResidualBoundTest(parameterized.TestCase):

  @parameterized.named_parameters(
      ("tol_driven_poles", dict(tol=1e-6, maxmem=40)),
      ("few_poles", dict(tol=1e-8, maxmem=20, max_matvecs=80, k=2)),
      ("capped", dict(tol=1e-12, maxmem=20, max_matvecs=40, k=4)),
  )
  def test_true_residual_below_bound(self, kwargs):
    cond = 100.0
    rng = np.random.default_rng(34)
    a = problem_utils.random_spd(100, rng, cond=cond)
    op = operators.MatrixOperator(a, (1.0, cond))
    c = rng.standard_normal(100)
    kwargs = dict(kwargs)
    k = kwargs.pop("k", None)
    if k is not None:
      kwargs["poles"] = zolotarev.zolotarev_poles(k, 1.0, cond)
    solution, report = solvers.compress_solve(
        op,
        c,
        solvers.SolverConfig(
            reorth_policy=constants.ReorthPolicy.FULL, **kwargs
        ),
    )
    a_min, a_max = report.interval
    bound = solvers.residual_bound(
        report.residual_estimate,
        zolotarev.raterr(report.poles, a_min, a_max),
        a_min,
        a_max,
        np.sqrt(float(c @ c)),
    )
    true_residual = solvers.true_residual_fro(op, solution, c)
    self.assertLessEqual(true_residual, bound * (1 + 1e-8))
    dense = problem_utils.dense_residual(a, solution.to_dense(), c)
    self.assertAlmostEqual(true_residual, dense, delta=1e-6 * dense)

class ResidualRelationTest(absltest.TestCase):

  def test_reference_residual_against_lanczos_residual(self):
    n, cond = 120, 100.0
    rng = np.random.default_rng(35)
    a = problem_utils.random_spd(n, rng, cond=cond)
    c = rng.standard_normal(n)
    op = operators.MatrixOperator(a, (1.0, cond))
    poles = zolotarev.zolotarev_poles(5, 1.0, cond)
    recorded: list[solvers.CycleState] = []
    _, report = solvers.compress_solve(
        op,
        c,
        solvers.SolverConfig(
            tol=1e-14,
            maxmem=24,
            max_matvecs=23 + 3 * 13,
            poles=poles,
            reorth_policy=constants.ReorthPolicy.FULL,
        ),
        on_cycle=recorded.append,
    )
    self.assertLen(recorded, 4)
    c_norm = float(np.linalg.norm(c))
    raterr = zolotarev.raterr(poles, 1.0, cond)
    rational_term = 2 * cond * raterr * c_norm**2

    for explicit in _explicit_cycles(recorded):
      cycle, length = explicit.cycle, explicit.length
      with self.subTest(cycle=cycle.cycle_index):
        x_m = solvers.lanczos_solution(
            report.tridiagonal.leading(length), c_norm
        )
        q, _ = problem_utils.dense_lanczos(a, c, length)
        lanczos_residual = problem_utils.dense_residual(a, q @ x_m @ q.T, c)
        self.assertAlmostEqual(
            lanczos_residual,
            np.sqrt(2) * cycle.beta_seam * np.linalg.norm(x_m[:, -1]),
            delta=1e-7 * lanczos_residual,
        )

        reference = solvers.reference_solve(op, c, length, poles)
        reference_residual = problem_utils.dense_residual(
            a, reference.to_dense(), c
        )
        self.assertLessEqual(
            reference_residual,
            lanczos_residual + rational_term + 1e-10 * c_norm**2,
        )
        bound = solvers.residual_bound(
            cycle.estimate, raterr, 1.0, cond, c_norm
        )
        self.assertLessEqual(reference_residual, bound * (1 + 1e-8))



if __name__ == "__main__":
  absltest.main()
