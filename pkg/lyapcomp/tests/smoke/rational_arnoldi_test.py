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

from lyapcomp import rational_arnoldi
from lyapcomp import zolotarev
from lyapcomp.tests import problem_utils
from lyapcomp.utils import errors


def _distance_to_span(v: np.ndarray, block: np.ndarray) -> float:
  """Relative Frobenius distance of `block` to the span of orthonormal `v`."""
  remainder = block - v @ (v.T @ block)
  return float(np.linalg.norm(remainder) / np.linalg.norm(block))


class RationalBlockArnoldiTest(parameterized.TestCase):

  @parameterized.named_parameters(
      ("vector_three_poles", 1, 3),
      ("block_two_poles", 2, 2),
      ("block_five_poles", 2, 5),
  )
  def test_orthonormal_basis_of_expected_width(self, block_width, k):
    rng = np.random.default_rng(k)
    s = problem_utils.random_spd(30, rng, cond=1e3)
    b = rng.standard_normal((30, block_width))
    poles = zolotarev.zolotarev_poles(k, 1.0, 1e3)
    basis = rational_arnoldi.rational_block_arnoldi(s, b, poles)
    self.assertEqual(basis.width, k * block_width)
    self.assertEqual(basis.dropped, 0)
    self.assertEqual(basis.solve_count, k)
    np.testing.assert_allclose(
        basis.v.T @ basis.v, np.eye(basis.width), atol=1e-12
    )

  def test_span_contains_shifted_solves(self):
    rng = np.random.default_rng(11)
    s = problem_utils.random_spd(25, rng, cond=100.0)
    b = rng.standard_normal((25, 2))
    poles = zolotarev.zolotarev_poles(4, 1.0, 100.0)
    basis = rational_arnoldi.rational_block_arnoldi(s, b, poles)
    for xi in poles:
      solved = np.linalg.solve(s - xi * np.eye(25), b)
      self.assertLess(_distance_to_span(basis.v, solved), 1e-10)

  def test_diagonal_matrix_keeps_unit_vector(self):
    basis = rational_arnoldi.rational_block_arnoldi(
        np.diag([1.0, 2.0]), np.array([1.0, 0.0]), [-2.0]
    )
    np.testing.assert_allclose(np.abs(basis.v), [[1.0], [0.0]])

  def test_two_by_two_shifted_solve(self):
    basis = rational_arnoldi.rational_block_arnoldi(
        np.array([[2.0, 1.0], [1.0, 2.0]]), np.array([1.0, 0.0]), [-2.0]
    )
    expected = np.array([4.0, -1.0]) / np.sqrt(17)
    np.testing.assert_allclose(
        basis.v[:, 0] * np.sign(basis.v[0, 0]), expected, atol=1e-15
    )

  def test_single_pole_spans_one_solve(self):
    s = np.diag([1.0, 2.0, 4.0])
    b = np.ones(3)
    basis = rational_arnoldi.rational_block_arnoldi(s, b, [-1.0])
    expected = np.array([1 / 2, 1 / 3, 1 / 5])
    expected /= np.linalg.norm(expected)
    np.testing.assert_allclose(np.abs(basis.v[:, 0]), expected, atol=1e-14)

  def test_conjugate_pair_gives_real_basis(self):
    rng = np.random.default_rng(12)
    s = problem_utils.random_spd(12, rng, cond=10.0)
    b = rng.standard_normal(12)
    xi = -2.0 + 1.5j
    basis = rational_arnoldi.rational_block_arnoldi(s, b, [xi, np.conj(xi)])
    self.assertFalse(np.iscomplexobj(basis.v))
    self.assertEqual(basis.width, 2)
    self.assertEqual(basis.solve_count, 2)
    solved = np.linalg.solve(s - xi * np.eye(12), b)
    self.assertLess(_distance_to_span(basis.v, solved.real[:, None]), 1e-10)
    self.assertLess(_distance_to_span(basis.v, solved.imag[:, None]), 1e-10)

  def test_unpaired_complex_pole(self):
    with self.assertRaises(errors.InputError):
      rational_arnoldi.rational_block_arnoldi(
          np.eye(3), np.ones(3), [-1.0 + 1.0j, -2.0]
      )

  def test_invariant_space_stops_early(self):
    s = np.diag([1.0, 2.0, 3.0])
    e1 = np.array([1.0, 0.0, 0.0])
    with self.assertLogs(level="WARNING"):
      basis = rational_arnoldi.rational_block_arnoldi(s, e1, [-1.0, -2.0])
    self.assertEqual(basis.width, 1)
    self.assertEqual(basis.dropped, 1)
    np.testing.assert_allclose(np.abs(basis.v[:, 0]), e1)

  def test_rejects_zero_block(self):
    with self.assertRaises(errors.InputError):
      rational_arnoldi.rational_block_arnoldi(np.eye(2), np.zeros(2), [-1.0])

  def test_rejects_row_mismatch(self):
    with self.assertRaises(errors.InputError):
      rational_arnoldi.rational_block_arnoldi(np.eye(2), np.ones(3), [-1.0])


class CollisionTest(absltest.TestCase):

  def test_raise_policy(self):
    with self.assertRaises(errors.SingularShiftError) as context:
      rational_arnoldi.rational_block_arnoldi(
          np.diag([1.0, 2.0, 3.0]),
          np.ones(3),
          [-1.0, 2.0],
          on_collision=rational_arnoldi.CollisionPolicy.RAISE,
      )
    self.assertEqual(context.exception.pole_index, 1)

  def test_perturb_policy_moves_pole(self):
    with self.assertLogs(level="WARNING") as logs:
      basis = rational_arnoldi.rational_block_arnoldi(
          np.diag([1.0, 2.0, 3.0]), np.ones(3), [2.0]
      )
    self.assertIn("collides", logs.output[0])
    self.assertLess(basis.poles[0], 2.0)
    self.assertAlmostEqual(basis.poles[0], 2.0, delta=1e-6)
    self.assertEqual(basis.width, 1)
    self.assertTrue(np.all(np.isfinite(basis.v)))


if __name__ == "__main__":
  absltest.main()
