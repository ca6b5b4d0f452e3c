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

"""Desk-scale runs of the memory-capped solvers."""

import tracemalloc

from absl.testing import absltest
from absl.testing import parameterized
import numpy as np

from lyapcomp import experiments
from lyapcomp import solvers
from lyapcomp.tests import problem_utils
from lyapcomp.utils import constants

_Termination = constants.TerminationReason


class LaplacianSolveTest(absltest.TestCase):

  def test_n_4096_under_default_budget(self):
    problem = experiments.build_problem(experiments.ProblemOptions(n_side=64))
    self.assertEqual(problem.dimension, 4096)
    config = solvers.SolverConfig(tol=1e-8, maxmem=120)

    solution, report = solvers.compress_solve(problem.op, problem.c, config)
    self.assertEqual(report.termination, _Termination.TOL)
    self.assertEqual(
        report.spectral_policy, constants.SpectralEstimatePolicy.EXACT_INPUT
    )
    self.assertLessEqual(report.peak_vectors, 120)
    scaled = solvers.true_residual_fro(problem.op, solution, problem.c)
    self.assertLessEqual(scaled, 1e-8)

    _, two_pass_report = solvers.two_pass_solve(problem.op, problem.c, config)
    self.assertEqual(two_pass_report.steps, report.steps)
    self.assertEqual(two_pass_report.matvecs, 2 * report.matvecs)
    self.assertLessEqual(two_pass_report.peak_vectors, 120)


class LossOfOrthogonalityTest(absltest.TestCase):

  def test_converges_without_reorthogonalization(self):
    op = problem_utils.log_spaced_diagonal(400, 1.0, 1e4)
    c = np.random.default_rng(41).standard_normal(400)
    c_norm_sq = float(c @ c)
    _, reorthogonalized = solvers.compress_solve(
        op,
        c,
        solvers.SolverConfig(
            tol=1e-6, maxmem=80, reorth_policy=constants.ReorthPolicy.FULL
        ),
    )
    self.assertEqual(reorthogonalized.termination, _Termination.TOL)

    cap = 20 * reorthogonalized.steps
    solution, report = solvers.compress_solve(
        op,
        c,
        solvers.SolverConfig(
            tol=1e-6,
            maxmem=80,
            max_matvecs=cap,
            reorth_policy=constants.ReorthPolicy.FIRST_CYCLE,
        ),
    )
    self.assertEqual(report.termination, _Termination.TOL)
    self.assertLessEqual(report.matvecs, cap)
    self.assertEqual(report.archive_vectors, 0)
    self.assertLessEqual(report.peak_vectors, 80)
    self.assertLessEqual(
        solvers.true_residual_fro(op, solution, c) / c_norm_sq, 1e-6
    )


class AllocatedMemoryTest(parameterized.TestCase):

  @parameterized.named_parameters(
      ("compress", solvers.compress_solve),
      ("two_pass", solvers.two_pass_solve),
  )
  def test_traced_peak_stays_within_budget(self, solve):
    n, maxmem = 100_000, 40
    op = problem_utils.log_spaced_diagonal(n, 1.0, 100.0)
    c = np.random.default_rng(43).standard_normal(n)
    config = solvers.SolverConfig(tol=1e-8, maxmem=maxmem)

    tracemalloc.start()
    try:
      _, report = solve(op, c, config)
      _, peak_bytes = tracemalloc.get_traced_memory()
    finally:
      tracemalloc.stop()

    self.assertEqual(report.termination, _Termination.TOL)
    self.assertGreater(report.cycles, 1)
    self.assertLessEqual(report.peak_vectors, maxmem)
    # The solution factor is part of the peak; a few work vectors are allowed.
    self.assertLessEqual(peak_bytes / (8 * n), maxmem + 6)


if __name__ == "__main__":
  absltest.main()
