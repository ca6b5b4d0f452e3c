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

from absl.testing import absltest
from absl.testing import parameterized
import numpy as np

from lyapcomp import dense_core
from lyapcomp import finite_precision
from lyapcomp import lanczos
from lyapcomp import operators
from lyapcomp.tests import problem_utils
from lyapcomp.utils import errors


class LanczosStartTest(absltest.TestCase):

  def test_normalizes_start_vector(self):
    op = operators.MatrixOperator(np.eye(3))
    state = lanczos.lanczos_start(op, np.array([3.0, 4.0, 0.0]), reorth=False)
    np.testing.assert_allclose(state.q_curr, [0.6, 0.8, 0.0])
    self.assertEqual(state.steps_done, 0)
    self.assertEqual(state.c_norm, 5.0)

  def test_reorth_basis_holds_first_vector(self):
    op = operators.MatrixOperator(np.diag([1.0, 2.0, 3.0]))
    c = np.array([2.0, 1.0, 1.0])
    state = lanczos.lanczos_start(op, c, reorth=True)
    self.assertEqual(state.stored_basis, [])
    np.testing.assert_allclose(state.q_curr, c / np.linalg.norm(c))
    lanczos.lanczos_advance(state, 1)
    self.assertLen(state.stored_basis, 1)
    np.testing.assert_allclose(state.stored_basis[0], c / np.linalg.norm(c))
    archived = lanczos.lanczos_start(op, c, reorth=True, keep_archive=True)
    self.assertEqual(archived.stored_basis.shape, (3, 0))
    lanczos.lanczos_advance(archived, 1)
    np.testing.assert_allclose(
        archived.stored_basis[:, 0], c / np.linalg.norm(c)
    )

  def test_rejects_zero_vector(self):
    op = operators.MatrixOperator(np.eye(2))
    with self.assertRaises(errors.InputError):
      lanczos.lanczos_start(op, np.zeros(2), reorth=False)


class LanczosAdvanceTest(absltest.TestCase):

  def test_one_dimensional_breakdown(self):
    op = operators.MatrixOperator(np.array([[2.0]]))
    state = lanczos.lanczos_start(op, np.array([3.0]), reorth=False)
    lanczos.lanczos_advance(state, 5)
    self.assertEqual(state.alphas, [2.0])
    self.assertEqual(state.betas, [0.0])
    self.assertTrue(state.breakdown)
    self.assertEqual(op.matvec_count, 1)
    with self.assertRaises(errors.UsageError):
      lanczos.lanczos_advance(state, 1)

  def test_two_dimensional_hand_recurrence(self):
    op = operators.MatrixOperator(np.diag([1.0, 3.0]))
    c = np.array([1.0, 1.0]) / np.sqrt(2)
    state = lanczos.lanczos_start(op, c, reorth=False)
    lanczos.lanczos_advance(state, 3)
    np.testing.assert_allclose(state.alphas, [2.0, 2.0])
    np.testing.assert_allclose(state.betas, [1.0, 0.0], atol=1e-15)
    self.assertTrue(state.breakdown)
    self.assertEqual(state.steps_done, 2)

  def test_matches_reorthogonalized_dense_reference(self):
    rng = np.random.default_rng(4)
    matrix = operators.kron_sum_laplacian(5)
    op = operators.MatrixOperator(matrix)
    c = rng.standard_normal(op.dimension)
    state = lanczos.lanczos_start(op, c, reorth=False)
    lanczos.lanczos_advance(state, 10)
    _, t_reference = problem_utils.dense_lanczos(matrix.to_dense(), c, 10)
    scale = np.abs(t_reference).max()
    np.testing.assert_allclose(
        state.tridiagonal().to_dense(), t_reference, atol=1e-8 * scale
    )
    self.assertEqual(op.matvec_count, 10)

  def test_three_term_relation_and_orthogonality(self):
    rng = np.random.default_rng(5)
    matrix = operators.kron_sum_laplacian(8)
    op = operators.MatrixOperator(matrix)
    state = lanczos.lanczos_start(
        op, rng.standard_normal(op.dimension), reorth=True
    )
    lanczos.lanczos_advance(state, 30)
    q = state.window_matrix
    t = state.tridiagonal().to_dense()
    residual = matrix.to_dense() @ q - q @ t
    residual[:, -1] -= state.beta_last * state.q_curr
    norm_a = operators.laplacian_extremal_eigs(8)[1]
    self.assertLess(np.linalg.norm(residual), 1e-10 * norm_a)
    full = np.column_stack([q, state.q_curr])
    self.assertLess(np.linalg.norm(full.T @ full - np.eye(31)), 1e-10)

  def test_full_reorthogonalization_on_long_run(self):
    rng = np.random.default_rng(6)
    op = operators.MatrixOperator(operators.kron_sum_laplacian(24))
    state = lanczos.lanczos_start(
        op, rng.standard_normal(op.dimension), reorth=True
    )
    lanczos.lanczos_advance(state, 200)
    q = state.window_matrix
    self.assertLess(np.linalg.norm(q.T @ q - np.eye(200)), 1e-10)


class DetachWindowTest(absltest.TestCase):

  def test_cycles_and_seam(self):
    rng = np.random.default_rng(9)
    op = operators.MatrixOperator(operators.kron_sum_laplacian(10))
    budget = lanczos.VectorBudget(limit=30)
    state = lanczos.lanczos_start(
        op, rng.standard_normal(op.dimension), reorth=True, budget=budget
    )
    lanczos.lanczos_advance(state, 20)
    first = lanczos.detach_window(state)
    self.assertLen(first, 20)
    self.assertIs(first[-1], state.q_prev)
    self.assertEqual(state.window_size, 0)
    self.assertEqual(budget.current, 2)

    state.reorth = False
    lanczos.lanczos_advance(state, 8)
    second = lanczos.detach_window(state)
    self.assertLen(second, 8)
    self.assertLess(
        np.abs(np.column_stack(first).T @ np.column_stack(second)).max(), 1e-6
    )
    self.assertEqual(budget.peak, 21)
    self.assertEqual(op.matvec_count, 28)

  def test_detach_requires_retention(self):
    op = operators.MatrixOperator(np.eye(2))
    state = lanczos.lanczos_start(
        op, np.ones(2), reorth=False, retain_window=False
    )
    with self.assertRaises(errors.UsageError):
      lanczos.detach_window(state)

  def test_release_keeps_coefficients(self):
    op = operators.MatrixOperator(operators.kron_sum_laplacian(4))
    budget = lanczos.VectorBudget(limit=10)
    state = lanczos.lanczos_start(
        op,
        np.random.default_rng(3).standard_normal(16),
        reorth=True,
        keep_archive=True,
        budget=budget,
    )
    lanczos.lanczos_advance(state, 6)
    tridiagonal = state.tridiagonal()
    lanczos.release_vectors(state)
    self.assertEqual(state.window_size, 0)
    self.assertEqual(state.archive_vectors, 0)
    self.assertIsNone(state.q_curr)
    self.assertEqual(budget.peak, 7)
    np.testing.assert_array_equal(state.tridiagonal().diag, tridiagonal.diag)
    with self.assertRaises(errors.UsageError):
      lanczos.lanczos_advance(state, 1)

  def test_budget_overflow(self):
    op = operators.MatrixOperator(operators.kron_sum_laplacian(4))
    state = lanczos.lanczos_start(
        op,
        np.random.default_rng(2).standard_normal(16),
        reorth=False,
        budget=lanczos.VectorBudget(limit=5),
    )
    with self.assertRaises(errors.MemoryBudgetError):
      lanczos.lanczos_advance(state, 5)

class RitzValueTest(parameterized.TestCase):

  @parameterized.named_parameters(
      ("plain", False),
      ("reorthogonalized", True),
  )
  def test_ritz_values_stay_near_the_spectrum(self, reorth):
    n, steps, lambda_max = 400, 300, 1e4
    op = problem_utils.log_spaced_diagonal(n, 1.0, lambda_max)
    state = lanczos.lanczos_start(
        op,
        np.random.default_rng(17).standard_normal(n),
        reorth=reorth,
        retain_window=reorth,
    )
    lanczos.lanczos_advance(state, steps)
    self.assertEqual(state.steps_done, steps)
    slack = finite_precision.fp_bound_constants(
        n, steps, 1, 1.0, 1.0, lambda_max, lambda_max
    ).slack
    ritz = dense_core.sym_eigvals(state.tridiagonal())
    self.assertGreaterEqual(ritz.min(), 1.0 - slack)
    self.assertLessEqual(ritz.max(), lambda_max + slack)



if __name__ == "__main__":
  absltest.main()
