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

#include "gpcm/types.hpp"

namespace gpcm {

/// Spectral factorization of one covariance matrix,
///   Sigma = lambda * Gamma * diag(shape) * Gamma',
/// with lambda = |Sigma|^(1/p) so that shape has unit product, and shape
/// sorted in non-increasing order.
struct CovarianceFactors {
  double lambda = 1.0;
  Vector shape;        // length p, positive, non-increasing, product 1
  Matrix orientation;  // p x p orthogonal, columns match shape entries

  int dim() const { return static_cast<int>(shape.size()); }

  /// Throws ValidationError when any structural invariant is broken.
  void validate() const;
};

/// Rebuilds the dense covariance matrix (exactly symmetric).
Matrix compose_covariance(const CovarianceFactors& f);

/// Factors a symmetric positive definite matrix.  Eigenvalues are sorted in
/// decreasing order; each eigenvector's sign is fixed so its first entry of
/// non-negligible magnitude is positive.  Throws DecompositionError when the
/// input is not symmetric or not positive definite.
CovarianceFactors decompose_covariance(const Matrix& sigma);

/// log N(x; mean, Sigma) evaluated through the factors, never forming Sigma.
double log_density(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& mean,
                   const CovarianceFactors& f);

}  // namespace gpcm
