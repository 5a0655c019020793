/*
 * Copyright 2026 the gpcmtest authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <vector>

#include "gpcm/covariance.hpp"
#include "gpcm/model_space.hpp"
#include "gpcm/types.hpp"

namespace gpcm {

/// Weighted zeroth/first/second moments of the data under a responsibility
/// matrix: soft counts n_j, weighted means, and scatter matrices
/// W_j = sum_i z_ij (x_i - m_j)(x_i - m_j)'.
struct SufficientStats {
  Vector counts;                 // k
  Matrix means;                  // k x p
  std::vector<Matrix> scatters;  // k matrices, each p x p
  int n = 0;                     // number of observations

  int k() const { return static_cast<int>(counts.size()); }
  int p() const { return static_cast<int>(means.cols()); }
};

/// Knobs for the iterative M-step solvers.
struct MStepConfig {
  int inner_max_iter = 200;        // alternation rounds for coupled updates
  double inner_tol = 1e-10;        // relative objective decrease to stop at
  int orientation_max_iter = 100;  // rounds inside the orientation update
};

/// Covariance factors for all components with equality constraints stored
/// once (vector length 1) and per-component factors stored k times.
struct CovarianceSet {
  std::vector<double> lambdas;
  std::vector<Vector> shapes;
  std::vector<Matrix> orientations;

  double lambda(int j) const { return lambdas[lambdas.size() == 1 ? 0 : j]; }
  const Vector& shape(int j) const { return shapes[shapes.size() == 1 ? 0 : j]; }
  const Matrix& orientation(int j) const {
    return orientations[orientations.size() == 1 ? 0 : j];
  }
  CovarianceFactors factors(int j) const { return {lambda(j), shape(j), orientation(j)}; }
};

/// Minimizes sum_l [ b_l * exp(-zeta_l) + weight * zeta_l ] subject to
/// zeta_1 >= ... >= zeta_p, optionally with sum_l zeta_l = 0.  `quad_forms`
/// is b (all entries must be strictly positive; otherwise
/// InvalidProjectionError), `weight` is the soft count in front of the linear
/// term.  Solved by a primal active-set method whose working-set subproblems
/// have closed forms; the returned point is KKT-certified.
Vector ordered_eigenvalue_solve(const Vector& quad_forms, double weight, bool unit_determinant);

/// Minimizes g(Gamma) = sum_j tr(W_j Gamma Xi_j^-1 Gamma') over orthogonal
/// Gamma, where Xi_j = diag(xis[j]).  Starts from `init` (must be orthogonal)
/// and never returns a Gamma with larger g.  Majorization steps (one SVD per
/// round) do the bulk of the work; when a step stalls, pairwise Jacobi
/// rotations with exactly solvable 2 x 2 subproblems finish the job.  With a
/// single group the answer is the eigenvector matrix of W_1 and is returned
/// directly.
Matrix update_common_orientation(const std::vector<Matrix>& scatters,
                                 const std::vector<Vector>& xis, const Matrix& init,
                                 const MStepConfig& cfg = {});

/// M-step objective F = sum_j [ tr(W_j Sigma_j^-1) + n_j log|Sigma_j| ],
/// the part of -2 * expected complete log-likelihood that depends on the
/// covariances.
double mstep_objective(const SufficientStats& stats, const CovarianceSet& cov);

/// Covariance update for model `m`.  `warm` may carry the previous iteration's
/// factors to warm-start the coupled solvers; pass nullptr on the first call.
/// The result never has a larger objective than `warm`.  Throws
/// DegenerateScatterError when the scatters cannot support the model.
CovarianceSet mstep_covariances(const ModelId& m, const SufficientStats& stats,
                                const CovarianceSet* warm, const MStepConfig& cfg = {});

/// Same update exposed as one CovarianceFactors per component.  An empty
/// `warm` means a cold start.
std::vector<CovarianceFactors> mstep(const ModelId& m, const SufficientStats& stats,
                                     const std::vector<CovarianceFactors>& warm = {},
                                     const MStepConfig& cfg = {});

}  // namespace gpcm
